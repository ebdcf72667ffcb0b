//! Offline CD-1 on the toy block data, tracking the exact training log-likelihood.
//!
//! ```text
//! cargo run --release --example offline_cd -- [epochs] [seed]
//! ```

use ocdgr::data::{toy_generate, ToyConfig};
use ocdgr::eval::{exact_log_z, test_log_prob_report, LogZ};
use ocdgr::kernel::train_offline;
use ocdgr::rbm::{init_params, Hyperparameters};
use ocdgr::rng::{derive_seed, seeded_rng};

fn main() -> ocdgr::Result<()> {
    let mut args = std::env::args().skip(1);
    let epochs: usize = args.next().map_or(50, |s| s.parse().expect("epochs must be an integer"));
    let seed: u64 = args.next().map_or(0, |s| s.parse().expect("seed must be an integer"));

    let toy = ToyConfig {
        n_per_class: 100,
        ..ToyConfig::default()
    };
    let data = toy_generate(&toy, &mut seeded_rng(derive_seed(seed, "data")))?;
    // Twenty hidden units keeps the exact partition function cheap (2^20 states).
    let mut hyper = Hyperparameters::new(toy.n_visible(), 20);
    hyper.epochs = 1;
    let mut rng = seeded_rng(derive_seed(seed, "train"));
    let mut params = init_params(hyper.n_visible, hyper.n_hidden, hyper.init_std, &mut rng)?;

    println!("epoch  log Z       mean train log p");
    for epoch in 0..=epochs {
        if epoch % 10 == 0 || epoch == epochs {
            let report = test_log_prob_report(&params, &data, LogZ::exact(exact_log_z(&params)?))?;
            println!("{epoch:>5}  {:>9.3}  {:>10.3}", report.log_z, report.mean_log_prob);
        }
        if epoch < epochs {
            params = train_offline(&params, &data, &hyper, &mut rng)?;
        }
    }
    Ok(())
}
