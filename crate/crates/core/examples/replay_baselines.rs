//! Generative replay against the two experience-replay baselines on a
//! class-sorted toy stream, with the memory each one holds.
//!
//! ```text
//! cargo run --release --example replay_baselines -- [seed]
//! ```

use ocdgr::data::{toy_generate, ToyConfig};
use ocdgr::eval::{exact_log_z, test_log_prob_report, LogZ};
use ocdgr::online::{er_ml_capacity, stream_train, StreamOptions, TrainerKind};
use ocdgr::rbm::Hyperparameters;
use ocdgr::rng::{derive_seed, seeded_rng};

fn main() -> ocdgr::Result<()> {
    let seed: u64 = std::env::args()
        .nth(1)
        .map_or(0, |s| s.parse().expect("seed must be an integer"));
    let toy = ToyConfig {
        n_per_class: 200,
        ..ToyConfig::default()
    };
    let stream = toy_generate(&toy, &mut seeded_rng(derive_seed(seed, "data")))?;
    let test = toy_generate(
        &ToyConfig {
            n_per_class: 50,
            ..toy
        },
        &mut seeded_rng(derive_seed(seed, "toy-test")),
    )?;
    let hyper = Hyperparameters::new(toy.n_visible(), 20);
    println!(
        "{} rows in class order, n_h = {}, ER-ML holds at most {} rows\n",
        stream.len(),
        hyper.n_hidden,
        er_ml_capacity(hyper.n_visible, hyper.n_hidden)
    );

    println!("trainer  test log p  cross-class std  params  peak replay rows  peak total scalars");
    for kind in TrainerKind::ALL {
        let mut rng = seeded_rng(derive_seed(seed, "train"));
        let options = StreamOptions {
            checkpoint_every: stream.len(),
            ..StreamOptions::default()
        };
        let outcome = stream_train(kind, &stream, &hyper, &options, &mut rng)?;
        let report = test_log_prob_report(&outcome.params, &test, LogZ::exact(exact_log_z(&outcome.params)?))?;
        let peak = outcome
            .procedure_footprints
            .iter()
            .max_by_key(|f| f.total_scalars())
            .expect("stream has at least one procedure");
        println!(
            "{:<7}  {:>10.3}  {:>15.3}  {:>6}  {:>16}  {:>18}",
            kind.name(),
            report.mean_log_prob,
            report.cross_class_std,
            peak.parameter_scalars,
            peak.replay_rows,
            peak.total_scalars()
        );
    }
    Ok(())
}
