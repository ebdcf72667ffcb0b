//! Every on-disk format: model files, bit-packed batch caches, gzip IDX and 0/1 text.
//!
//! ```text
//! cargo run --example model_files -- [dir]
//! ```

use std::path::PathBuf;

use ocdgr::data::{
    binarize, load_batch_cache, load_binary_text, load_idx, save_batch_cache, toy_generate, write_binary_text,
    write_idx, Binarization, RawDataset, ToyConfig,
};
use ocdgr::rbm::persist::ModelFile;
use ocdgr::rbm::{init_params, Hyperparameters};
use ocdgr::rng::seeded_rng;

fn main() -> ocdgr::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map_or_else(|| std::env::temp_dir().join("ocdgr_model_files"), PathBuf::from);
    std::fs::create_dir_all(&dir).map_err(|e| ocdgr::Error::Io {
        path: dir.clone(),
        source: e,
    })?;
    let mut rng = seeded_rng(1);

    let hyper = Hyperparameters::new(100, 20);
    let mut model = ModelFile::new(init_params(100, 20, 0.01, &mut rng)?, hyper);
    model.observed_count = Some(2_000);
    model.metadata = "{\"note\":\"example checkpoint\"}".into();
    let path = dir.join("example.rbm");
    model.save(&path)?;
    let back = ModelFile::load(&path)?;
    println!("model     {}  identical after reload: {}", path.display(), back == model);

    let toy = toy_generate(&ToyConfig::default(), &mut rng)?;
    let path = dir.join("toy.batch");
    save_batch_cache(&path, &toy)?;
    let back = load_batch_cache(&path)?;
    println!("cache     {}  {} rows, identical: {}", path.display(), back.len(), back == toy);

    let path = dir.join("toy.txt");
    write_binary_text(&path, &toy)?;
    let back = load_binary_text(&path)?;
    println!("text      {}  rows identical: {}", path.display(), back.rows() == toy.rows());

    // A tiny 2x3 greyscale set; threshold binarization keeps pixels >= 128.
    let raw = RawDataset {
        height: 2,
        width: 3,
        pixels: vec![0, 127, 128, 255, 30, 200, 255, 255, 0, 0, 129, 1],
        labels: vec![4, 9],
    };
    let (images, labels) = (dir.join("tiny-images.idx.gz"), dir.join("tiny-labels.idx.gz"));
    write_idx(&images, &labels, &raw)?;
    let back = load_idx(&images, &labels)?;
    let bits = binarize(&back, Binarization::Threshold, &mut rng)?;
    println!("idx       {}  identical: {}", images.display(), back == raw);
    println!("binarized rows: {:?}", bits.to_bits());
    Ok(())
}
