//! Stream the bundled 5,000-image MNIST subset class by class through all
//! three online trainers and score each on the 1,000 test images with AIS.
//!
//! ```text
//! cargo run --release --example mnist_stream -- [n_hidden] [seed] [random]
//! ```
//!
//! Pass `random` as the third argument for a shuffled stream. Results are
//! also written to `target/mnist_stream/compare.csv`.

use std::path::PathBuf;

use ocdgr::data::{Binarization, StreamOrder};
use ocdgr::experiment::{run_compare, DatasetSpec, EstimatorSpec, ExperimentConfig};
use ocdgr::online::TrainerKind;
use ocdgr::Hyperparameters;

fn main() -> ocdgr::Result<()> {
    let mut args = std::env::args().skip(1);
    let n_hidden = args.next().map_or(25, |s| s.parse().expect("n_hidden must be an integer"));
    let seed = args.next().map_or(0, |s| s.parse().expect("seed must be an integer"));
    let order = match args.next().as_deref() {
        Some("random") => StreamOrder::Random { seed },
        _ => StreamOrder::SortedByClass,
    };

    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/mnist");
    let dataset = DatasetSpec::Idx {
        train_images: root.join("train-images-idx3-ubyte.gz"),
        train_labels: root.join("train-labels-idx1-ubyte.gz"),
        test_images: Some(root.join("t10k-images-idx3-ubyte.gz")),
        test_labels: Some(root.join("t10k-labels-idx1-ubyte.gz")),
        binarization: Binarization::Threshold,
        train_limit: None,
        test_limit: None,
        name: Some("MNIST".into()),
    };
    let mut config = ExperimentConfig::new(dataset, Hyperparameters::new(0, n_hidden));
    config.order = order;
    config.seed = seed;
    config.estimator = EstimatorSpec::Ais {
        n_betas: 1_000,
        n_chains: 50,
    };
    config.output_dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../target/mnist_stream");

    let rows = run_compare(&config, &TrainerKind::ALL)?;
    println!("n_h = {n_hidden}, seed {seed}, {order:?}");
    println!(
        "{:>6} {:>10} {:>8} {:>10} {:>9} {:>12} {:>9}",
        "", "log p", "+/- z", "class std", "replay", "scalars", "ms"
    );
    for r in &rows {
        println!(
            "{:>6} {:>10.2} {:>8.3} {:>10.2} {:>9} {:>12} {:>9.0}",
            r.trainer.name(),
            r.mean_log_prob.unwrap_or(f64::NAN),
            r.log_z_std.unwrap_or(f64::NAN),
            r.cross_class_std.unwrap_or(f64::NAN),
            r.peak_replay_rows,
            r.peak_total_scalars,
            r.wall_ms
        );
    }
    Ok(())
}
