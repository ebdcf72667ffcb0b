//! File-format round trips and malformed-input handling.

use std::fs;

use ndarray::Array2;
use ocdgr::data::{
    batch_cache_bytes, binarize, load_batch_cache, load_binary_text, load_idx, save_batch_cache, write_binary_text,
    write_idx, Binarization, RawDataset, CACHE_MAGIC,
};
use ocdgr::rbm::persist::ModelFile;
use ocdgr::rbm::{init_params, BinaryBatch, Hyperparameters};
use ocdgr::rng::seeded_rng;
use ocdgr::Error;
use proptest::prelude::*;
use tempfile::TempDir;

fn sample_raw() -> RawDataset {
    RawDataset {
        height: 2,
        width: 2,
        pixels: vec![0, 127, 128, 255, 9, 200, 100, 140, 255, 255, 255, 255],
        labels: vec![3, 0, 7],
    }
}

#[test]
fn idx_plain_and_gzip_round_trip() {
    let dir = TempDir::new().unwrap();
    for ext in ["idx", "idx.gz"] {
        let (img, lab) = (dir.path().join(format!("i.{ext}")), dir.path().join(format!("l.{ext}")));
        write_idx(&img, &lab, &sample_raw()).unwrap();
        assert_eq!(load_idx(&img, &lab).unwrap(), sample_raw());
    }
    let plain = fs::read(dir.path().join("i.idx")).unwrap();
    assert_eq!(&plain[..4], &[0, 0, 8, 3]);
    assert_eq!(plain.len(), 16 + 12);
    assert_eq!(&fs::read(dir.path().join("i.idx.gz")).unwrap()[..2], &[0x1f, 0x8b]);
}

#[test]
fn threshold_binarization_keeps_128_and_above() {
    let bits = binarize(&sample_raw(), Binarization::Threshold, &mut seeded_rng(0)).unwrap();
    assert_eq!(bits.to_bits(), vec![vec![0, 0, 1, 1], vec![0, 1, 0, 1], vec![1, 1, 1, 1]]);
    assert_eq!(bits.labels(), Some(&[3, 0, 7][..]));
}

#[test]
fn stochastic_binarization_is_exact_at_the_extremes() {
    let raw = RawDataset {
        height: 1,
        width: 4,
        pixels: vec![0, 255, 0, 255],
        labels: vec![1],
    };
    let bits = binarize(&raw, Binarization::Stochastic, &mut seeded_rng(3)).unwrap();
    assert_eq!(bits.to_bits(), vec![vec![0, 1, 0, 1]]);
}

#[test]
fn truncated_images_report_missing_bytes() {
    let dir = TempDir::new().unwrap();
    let (img, lab) = (dir.path().join("i.idx"), dir.path().join("l.idx"));
    write_idx(&img, &lab, &sample_raw()).unwrap();
    let bytes = fs::read(&img).unwrap();
    fs::write(&img, &bytes[..bytes.len() - 3]).unwrap();
    let err = load_idx(&img, &lab).unwrap_err();
    assert!(matches!(err, Error::Format { .. }));
    let text = err.to_string();
    assert!(text.contains("i.idx") && text.contains("missing"), "{text}");
    assert_eq!(err.exit_code(), 3);
}

#[test]
fn truncated_header_and_bad_magic_are_format_errors() {
    let dir = TempDir::new().unwrap();
    let (img, lab) = (dir.path().join("i.idx"), dir.path().join("l.idx"));
    write_idx(&img, &lab, &sample_raw()).unwrap();
    let bytes = fs::read(&img).unwrap();
    fs::write(&img, &bytes[..10]).unwrap();
    assert!(matches!(load_idx(&img, &lab), Err(Error::Format { .. })));
    let mut swapped = bytes.clone();
    swapped[3] = 1;
    fs::write(&img, &swapped).unwrap();
    assert!(matches!(load_idx(&img, &lab), Err(Error::Format { offset: Some(0), .. })));
    // Label file given where images are expected.
    assert!(matches!(load_idx(&lab, &lab), Err(Error::Format { .. })));
}

#[test]
fn trailing_bytes_are_rejected() {
    let dir = TempDir::new().unwrap();
    let (img, lab) = (dir.path().join("i.idx"), dir.path().join("l.idx"));
    write_idx(&img, &lab, &sample_raw()).unwrap();
    let mut bytes = fs::read(&lab).unwrap();
    bytes.push(0);
    fs::write(&lab, bytes).unwrap();
    assert!(matches!(load_idx(&img, &lab), Err(Error::Format { .. })));
}

#[test]
fn image_label_count_mismatch() {
    let dir = TempDir::new().unwrap();
    let (img, lab) = (dir.path().join("i.idx"), dir.path().join("l.idx"));
    write_idx(&img, &lab, &sample_raw()).unwrap();
    let mut fewer = sample_raw();
    fewer.truncate(2);
    write_idx(dir.path().join("i2.idx"), dir.path().join("l2.idx"), &fewer).unwrap();
    match load_idx(&img, dir.path().join("l2.idx")) {
        Err(Error::CountMismatch { images: 3, labels: 2 }) => {}
        other => panic!("expected count mismatch, got {other:?}"),
    }
}

#[test]
fn missing_file_is_a_usage_error_naming_the_path() {
    let err = load_idx("/definitely/missing/i.idx", "/definitely/missing/l.idx").unwrap_err();
    assert_eq!(err.exit_code(), 2);
    assert!(err.to_string().contains("/definitely/missing/i.idx"));
}

#[test]
fn text_errors_carry_line_numbers() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("bad.txt");
    fs::write(&path, "# header\n0 1 1\n\n1 0 2\n").unwrap();
    let text = load_binary_text(&path).unwrap_err().to_string();
    assert!(text.contains("line 4"), "{text}");
    fs::write(&path, "0 1 1\n1 0\n").unwrap();
    let text = load_binary_text(&path).unwrap_err().to_string();
    assert!(text.contains("line 2"), "{text}");
    fs::write(&path, "# only a comment\n").unwrap();
    assert!(load_binary_text(&path).is_err());
}

#[test]
fn corrupted_cache_is_rejected() {
    let batch = BinaryBatch::from_bits(3, &[vec![1, 0, 1]], Some(vec![2])).unwrap();
    let bytes = batch_cache_bytes(&batch);
    assert_eq!(&bytes[..8], CACHE_MAGIC);
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("b.cache");
    fs::write(&path, &bytes[..bytes.len() - 1]).unwrap();
    assert!(matches!(load_batch_cache(&path), Err(Error::Format { .. })));
    let mut wrong = bytes.clone();
    wrong[0] = b'X';
    fs::write(&path, wrong).unwrap();
    assert!(matches!(load_batch_cache(&path), Err(Error::Format { offset: Some(0), .. })));
}

#[test]
fn model_file_round_trip_and_corruption() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("m.rbm");
    let mut model = ModelFile::new(init_params(7, 3, 0.5, &mut seeded_rng(4)).unwrap(), Hyperparameters::new(7, 3));
    model.observed_count = Some(1234);
    model.metadata = "{\"a\":1}".into();
    model.save(&path).unwrap();
    assert_eq!(ModelFile::load(&path).unwrap(), model);
    let bytes = fs::read(&path).unwrap();
    fs::write(&path, &bytes[..bytes.len() - 5]).unwrap();
    assert!(matches!(ModelFile::load(&path), Err(Error::Format { .. })));
}

fn batch_strategy() -> impl Strategy<Value = BinaryBatch> {
    (1usize..6, 1usize..70, any::<bool>()).prop_flat_map(|(rows, n_v, labelled)| {
        (
            prop::collection::vec(0u8..2, rows * n_v),
            prop::collection::vec(0usize..1000, rows),
        )
            .prop_map(move |(bits, labels)| {
                let m = Array2::from_shape_vec((rows, n_v), bits.into_iter().map(f64::from).collect()).unwrap();
                BinaryBatch::new(m, labelled.then_some(labels)).unwrap()
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cache_round_trips(batch in batch_strategy()) {
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("b.cache");
        save_batch_cache(&path, &batch).unwrap();
        prop_assert_eq!(load_batch_cache(&path).unwrap(), batch);
    }

    #[test]
    fn text_round_trips_rows(batch in batch_strategy()) {
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("b.txt");
        write_binary_text(&path, &batch).unwrap();
        let back = load_binary_text(&path).unwrap();
        prop_assert_eq!(back.rows(), batch.rows());
    }

    #[test]
    fn idx_round_trips(n in 1usize..5, h in 1usize..6, w in 1usize..6, seed in any::<u64>()) {
        use rand::Rng;
        let mut rng = seeded_rng(seed);
        let raw = RawDataset {
            height: h,
            width: w,
            pixels: (0..n * h * w).map(|_| rng.random()).collect(),
            labels: (0..n).map(|_| rng.random_range(0..10)).collect(),
        };
        let dir = TempDir::new().unwrap();
        let (img, lab) = (dir.path().join("i.gz"), dir.path().join("l"));
        write_idx(&img, &lab, &raw).unwrap();
        prop_assert_eq!(load_idx(&img, &lab).unwrap(), raw);
    }
}
