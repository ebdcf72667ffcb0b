//! Stream ten block classes one after another and watch which classes the
//! model can still generate after each one.
//!
//! ```text
//! cargo run --release --example toy_generative_replay -- [seed] [trainer]
//! ```

use ocdgr::experiment::{run_toy_demo, ToyDemoConfig};
use ocdgr::online::TrainerKind;

fn main() -> ocdgr::Result<()> {
    let mut args = std::env::args().skip(1);
    let seed = args.next().map_or(0, |s| s.parse().expect("seed must be an integer"));
    let trainer: TrainerKind = args.next().map_or(Ok(TrainerKind::Ocdgr), |s| s.parse())?;
    let config = ToyDemoConfig {
        trainer,
        seed,
        ..ToyDemoConfig::default()
    };
    let stages = run_toy_demo(&config)?;

    println!("trainer {trainer}, seed {seed}; share of 1,000 samples per class");
    print!("seen ");
    for c in 0..config.toy.n_classes {
        print!("{c:>6}");
    }
    println!("   min seen  max unseen");
    for stage in &stages {
        print!("{:>4} ", stage.observed_classes);
        for n in stage.histogram.values() {
            print!("{:>6.1}", *n as f64 / config.samples_per_stage as f64 * 100.0);
        }
        println!(
            "   {:>7.1}%  {:>9.1}%",
            stage.min_observed_share() * 100.0,
            stage.max_unobserved_share() * 100.0
        );
    }
    Ok(())
}
