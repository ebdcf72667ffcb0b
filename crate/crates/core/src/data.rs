//! Dataset loading, binarization, the block toy dataset and stream ordering.
//!
//! File layouts are described in `docs/FORMATS.md`.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use flate2::read::GzDecoder;
use flate2::write::GzEncoder;
use flate2::Compression;
use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rbm::BinaryBatch;
use crate::rng::seeded_rng;

pub const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
pub const IDX_LABELS_MAGIC: u32 = 0x0000_0801;
const GZIP_MAGIC: [u8; 2] = [0x1f, 0x8b];

/// Pixels at or above this value become 1 under [`Binarization::Threshold`].
pub const THRESHOLD: u8 = 128;

/// Labeled 8-bit images, stored row-major one image after another.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawDataset {
    pub height: usize,
    pub width: usize,
    pub pixels: Vec<u8>,
    pub labels: Vec<usize>,
}

impl RawDataset {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.height * self.width
    }

    pub fn image(&self, i: usize) -> &[u8] {
        let n = self.n_features();
        &self.pixels[i * n..(i + 1) * n]
    }

    /// Keep the first `n` images.
    pub fn truncate(&mut self, n: usize) {
        if n < self.len() {
            self.labels.truncate(n);
            self.pixels.truncate(n * self.n_features());
        }
    }
}

fn read_maybe_gz(path: &Path) -> Result<Vec<u8>> {
    let raw = fs::read(path).map_err(|e| Error::io(path, e))?;
    if raw.starts_with(&GZIP_MAGIC) {
        let mut out = Vec::new();
        GzDecoder::new(raw.as_slice())
            .read_to_end(&mut out)
            .map_err(|e| Error::Format {
                path: path.to_path_buf(),
                offset: None,
                line: None,
                message: format!("corrupt gzip stream: {e}"),
            })?;
        Ok(out)
    } else {
        Ok(raw)
    }
}

fn format_error(path: &Path, offset: usize, message: String) -> Error {
    Error::Format {
        path: path.to_path_buf(),
        offset: Some(offset as u64),
        line: None,
        message,
    }
}

fn need(bytes: &[u8], path: &Path, start: usize, len: usize, what: &str) -> Result<()> {
    if bytes.len() < start + len {
        return Err(format_error(
            path,
            bytes.len(),
            format!(
                "truncated {what}: bytes {start}..{} missing from byte {}",
                start + len,
                bytes.len()
            ),
        ));
    }
    Ok(())
}

fn be_u32(bytes: &[u8], at: usize) -> u32 {
    u32::from_be_bytes(bytes[at..at + 4].try_into().expect("4 bytes"))
}

fn check_magic(bytes: &[u8], path: &Path, expected: u32) -> Result<()> {
    need(bytes, path, 0, 4, "header")?;
    let magic = be_u32(bytes, 0);
    if magic != expected {
        return Err(format_error(
            path,
            0,
            format!("bad magic number {magic:#010x}, expected {expected:#010x}"),
        ));
    }
    Ok(())
}

/// Parse an IDX image file (`0x00000803`, count, rows, cols, pixels).
/// Gzip-compressed input is detected and inflated; offsets in errors refer
/// to the inflated bytes.
///
/// Returns `(count, height, width, pixels)`.
pub fn read_idx_images(path: &Path) -> Result<(usize, usize, usize, Vec<u8>)> {
    let bytes = read_maybe_gz(path)?;
    check_magic(&bytes, path, IDX_IMAGES_MAGIC)?;
    need(&bytes, path, 4, 12, "header")?;
    let n = be_u32(&bytes, 4) as usize;
    let height = be_u32(&bytes, 8) as usize;
    let width = be_u32(&bytes, 12) as usize;
    let len = n * height * width;
    need(&bytes, path, 16, len, "pixel data")?;
    if bytes.len() > 16 + len {
        return Err(format_error(path, 16 + len, format!("{} trailing bytes", bytes.len() - 16 - len)));
    }
    Ok((n, height, width, bytes[16..].to_vec()))
}

/// Parse an IDX label file (`0x00000801`, count, one byte per label).
pub fn read_idx_labels(path: &Path) -> Result<Vec<usize>> {
    let bytes = read_maybe_gz(path)?;
    check_magic(&bytes, path, IDX_LABELS_MAGIC)?;
    need(&bytes, path, 4, 4, "header")?;
    let n = be_u32(&bytes, 4) as usize;
    need(&bytes, path, 8, n, "label data")?;
    if bytes.len() > 8 + n {
        return Err(format_error(path, 8 + n, format!("{} trailing bytes", bytes.len() - 8 - n)));
    }
    Ok(bytes[8..].iter().map(|&b| b as usize).collect())
}

/// Load an image file and its label file, checking that the counts agree.
pub fn load_idx(images_path: impl AsRef<Path>, labels_path: impl AsRef<Path>) -> Result<RawDataset> {
    let (images, height, width, pixels) = read_idx_images(images_path.as_ref())?;
    let labels = read_idx_labels(labels_path.as_ref())?;
    if images != labels.len() {
        return Err(Error::CountMismatch {
            images,
            labels: labels.len(),
        });
    }
    Ok(RawDataset {
        height,
        width,
        pixels,
        labels,
    })
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    let gz = path.extension().is_some_and(|e| e == "gz");
    let out = if gz {
        let mut enc = GzEncoder::new(Vec::new(), Compression::default());
        enc.write_all(bytes).map_err(|e| Error::io(path, e))?;
        enc.finish().map_err(|e| Error::io(path, e))?
    } else {
        bytes.to_vec()
    };
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Write `data` as an IDX image/label pair, gzip-compressed when a path ends
/// in `.gz`.
pub fn write_idx(images_path: impl AsRef<Path>, labels_path: impl AsRef<Path>, data: &RawDataset) -> Result<()> {
    if let Some(&l) = data.labels.iter().find(|&&l| l > 255) {
        return Err(Error::Domain(format!("label {l} does not fit in one byte")));
    }
    let n = data.len() as u32;
    let mut images = Vec::with_capacity(16 + data.pixels.len());
    for word in [IDX_IMAGES_MAGIC, n, data.height as u32, data.width as u32] {
        images.extend_from_slice(&word.to_be_bytes());
    }
    images.extend_from_slice(&data.pixels);
    let mut labels = Vec::with_capacity(8 + data.len());
    labels.extend_from_slice(&IDX_LABELS_MAGIC.to_be_bytes());
    labels.extend_from_slice(&n.to_be_bytes());
    labels.extend(data.labels.iter().map(|&l| l as u8));
    write_bytes(images_path.as_ref(), &images)?;
    write_bytes(labels_path.as_ref(), &labels)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Binarization {
    /// 1 iff the pixel is at least [`THRESHOLD`].
    #[default]
    Threshold,
    /// 1 with probability `pixel / 255`.
    Stochastic,
}

/// Turn 8-bit images into a labeled binary batch. The generator is only
/// consumed in stochastic mode.
pub fn binarize<R: Rng + ?Sized>(raw: &RawDataset, mode: Binarization, rng: &mut R) -> Result<BinaryBatch> {
    let rows = Array2::from_shape_vec((raw.len(), raw.n_features()), raw.pixels.clone())
        .map_err(|_| Error::dim("pixel buffer", raw.len() * raw.n_features(), raw.pixels.len()))?;
    let bits = match mode {
        Binarization::Threshold => rows.mapv(|p| (p >= THRESHOLD) as u8 as f64),
        Binarization::Stochastic => rows.mapv(|p| (rng.random::<f64>() < p as f64 / 255.0) as u8 as f64),
    };
    BinaryBatch::new(bits, Some(raw.labels.clone()))
}

/// Read whitespace-separated `0`/`1` rows, one per line. Blank lines and
/// lines starting with `#` are skipped.
pub fn load_binary_text(path: impl AsRef<Path>) -> Result<BinaryBatch> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let fail = |line: usize, message: String| Error::Format {
        path: path.to_path_buf(),
        offset: None,
        line: Some(line),
        message,
    };
    let mut arity = None;
    let mut values = Vec::new();
    let mut n_rows = 0;
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim_start().starts_with('#') {
            continue;
        }
        let mut count = 0;
        for token in line.split_whitespace() {
            values.push(match token {
                "0" => 0.0,
                "1" => 1.0,
                other => return Err(fail(line_no, format!("token {other:?} is not 0 or 1"))),
            });
            count += 1;
        }
        if count == 0 {
            continue;
        }
        match arity {
            None => arity = Some(count),
            Some(n) if n != count => {
                return Err(fail(line_no, format!("{count} values, expected {n}")));
            }
            Some(_) => {}
        }
        n_rows += 1;
    }
    let n_v = arity.ok_or_else(|| fail(1, "no data rows".into()))?;
    BinaryBatch::new(
        Array2::from_shape_vec((n_rows, n_v), values).expect("rows have constant arity"),
        None,
    )
}

/// Write rows as space-separated `0`/`1` text, one row per line.
pub fn write_binary_text(path: impl AsRef<Path>, batch: &BinaryBatch) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::with_capacity(batch.len() * (2 * batch.n_visible() + 1));
    for row in batch.rows().outer_iter() {
        for (i, &x) in row.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            out.push(if x != 0.0 { '1' } else { '0' });
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub const CACHE_MAGIC: &[u8; 8] = b"OCDGRBAT";
pub const CACHE_VERSION: u32 = 1;

/// Serialize a batch in the bit-packed cache format.
pub fn batch_cache_bytes(batch: &BinaryBatch) -> Vec<u8> {
    let n_v = batch.n_visible();
    let row_bytes = n_v.div_ceil(8);
    let mut out = Vec::with_capacity(29 + batch.len() * (row_bytes + 4));
    out.extend_from_slice(CACHE_MAGIC);
    out.extend_from_slice(&CACHE_VERSION.to_le_bytes());
    out.extend_from_slice(&(batch.len() as u64).to_le_bytes());
    out.extend_from_slice(&(n_v as u64).to_le_bytes());
    out.push(batch.labels().is_some() as u8);
    for row in batch.rows().outer_iter() {
        let mut packed = vec![0u8; row_bytes];
        for (i, &x) in row.iter().enumerate() {
            if x != 0.0 {
                packed[i / 8] |= 1 << (i % 8);
            }
        }
        out.extend_from_slice(&packed);
    }
    if let Some(labels) = batch.labels() {
        for &l in labels {
            out.extend_from_slice(&(l as u32).to_le_bytes());
        }
    }
    out
}

/// Inverse of [`batch_cache_bytes`].
pub fn batch_from_cache_bytes(bytes: &[u8], path: &Path) -> Result<BinaryBatch> {
    let read_u64 = |at: usize| u64::from_le_bytes(bytes[at..at + 8].try_into().expect("8 bytes")) as usize;
    need(bytes, path, 0, 29, "cache header")?;
    if &bytes[..8] != CACHE_MAGIC {
        return Err(format_error(path, 0, "not a batch cache file".into()));
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes"));
    if version != CACHE_VERSION {
        return Err(format_error(path, 8, format!("unsupported cache version {version}")));
    }
    let n_rows = read_u64(12);
    let n_v = read_u64(20);
    let has_labels = match bytes[28] {
        0 => false,
        1 => true,
        other => return Err(format_error(path, 28, format!("bad label flag {other}"))),
    };
    let row_bytes = n_v.div_ceil(8);
    let body = n_rows
        .checked_mul(row_bytes + if has_labels { 4 } else { 0 })
        .ok_or_else(|| format_error(path, 12, "row count overflows".into()))?;
    need(bytes, path, 29, body, "cache body")?;
    let mut rows = Array2::zeros((n_rows, n_v));
    for (r, mut row) in rows.outer_iter_mut().enumerate() {
        let packed = &bytes[29 + r * row_bytes..29 + (r + 1) * row_bytes];
        for (i, x) in row.iter_mut().enumerate() {
            *x = ((packed[i / 8] >> (i % 8)) & 1) as f64;
        }
    }
    let labels = has_labels.then(|| {
        let start = 29 + n_rows * row_bytes;
        (0..n_rows)
            .map(|r| u32::from_le_bytes(bytes[start + 4 * r..start + 4 * r + 4].try_into().expect("4 bytes")) as usize)
            .collect()
    });
    BinaryBatch::new(rows, labels)
}

pub fn save_batch_cache(path: impl AsRef<Path>, batch: &BinaryBatch) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, batch_cache_bytes(batch)).map_err(|e| Error::io(path, e))
}

pub fn load_batch_cache(path: impl AsRef<Path>) -> Result<BinaryBatch> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    batch_from_cache_bytes(&bytes, path)
}

/// Geometry of the block toy dataset: class `c` (0-based) switches on only
/// the units in `[c·block, (c+1)·block)`, each with probability `p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ToyConfig {
    pub n_per_class: usize,
    pub n_classes: usize,
    pub block: usize,
    pub p: f64,
}

impl Default for ToyConfig {
    fn default() -> Self {
        Self {
            n_per_class: 1_000,
            n_classes: 10,
            block: 10,
            p: 0.3,
        }
    }
}

impl ToyConfig {
    pub fn n_visible(&self) -> usize {
        self.n_classes * self.block
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_per_class == 0 || self.n_classes == 0 || self.block == 0 {
            return Err(Error::Config(format!(
                "toy dataset needs positive sizes, got {} per class, {} classes, block {}",
                self.n_per_class, self.n_classes, self.block
            )));
        }
        if !(0.0..=1.0).contains(&self.p) {
            return Err(Error::Config(format!("toy activation probability {} outside [0, 1]", self.p)));
        }
        Ok(())
    }
}

/// `n_per_class` rows for each class in turn, labeled `0..n_classes`.
pub fn toy_generate<R: Rng + ?Sized>(config: &ToyConfig, rng: &mut R) -> Result<BinaryBatch> {
    config.validate()?;
    let n = config.n_per_class * config.n_classes;
    let mut rows = Array2::zeros((n, config.n_visible()));
    let mut labels = Vec::with_capacity(n);
    for (r, mut row) in rows.outer_iter_mut().enumerate() {
        let class = r / config.n_per_class;
        for i in class * config.block..(class + 1) * config.block {
            row[i] = (rng.random::<f64>() < config.p) as u8 as f64;
        }
        labels.push(class);
    }
    BinaryBatch::new(rows, Some(labels))
}

/// One prototype per class with its whole block switched on.
pub fn toy_prototypes(config: &ToyConfig) -> Result<BinaryBatch> {
    config.validate()?;
    let rows = Array2::from_shape_fn((config.n_classes, config.n_visible()), |(c, i)| {
        (i / config.block == c) as u8 as f64
    });
    BinaryBatch::new(rows, Some((0..config.n_classes).collect()))
}

/// Presentation order of an observation stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum StreamOrder {
    /// Ascending class, original order within each class.
    SortedByClass,
    /// Uniform permutation drawn from `seed`.
    Random { seed: u64 },
}

/// Row indices of `dataset` in stream order.
pub fn stream_permutation(dataset: &BinaryBatch, order: StreamOrder) -> Result<Vec<usize>> {
    let mut idx: Vec<usize> = (0..dataset.len()).collect();
    match order {
        StreamOrder::SortedByClass => {
            let labels = dataset
                .labels()
                .ok_or_else(|| Error::Config("class-sorted order needs labels".into()))?;
            idx.sort_by_key(|&i| labels[i]);
        }
        StreamOrder::Random { seed } => idx.shuffle(&mut seeded_rng(seed)),
    }
    Ok(idx)
}

/// `dataset` reordered for streaming; labels travel with their rows.
pub fn order_stream(dataset: &BinaryBatch, order: StreamOrder) -> Result<BinaryBatch> {
    Ok(dataset.select(&stream_permutation(dataset, order)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded_rng;

    fn sample_raw() -> RawDataset {
        RawDataset {
            height: 2,
            width: 3,
            pixels: vec![0, 127, 128, 255, 10, 200, 0, 0, 0, 0, 0, 0],
            labels: vec![7, 2],
        }
    }

    #[test]
    fn idx_round_trip_plain_and_gz() {
        let dir = tempfile::tempdir().unwrap();
        for ext in ["", ".gz"] {
            let img = dir.path().join(format!("img{ext}"));
            let lab = dir.path().join(format!("lab{ext}"));
            write_idx(&img, &lab, &sample_raw()).unwrap();
            assert_eq!(load_idx(&img, &lab).unwrap(), sample_raw());
        }
        let bytes = fs::read(dir.path().join("img")).unwrap();
        assert_eq!(&bytes[..4], &[0, 0, 8, 3]);
        assert_eq!(bytes.len(), 16 + 12);
    }

    #[test]
    fn idx_errors() {
        let dir = tempfile::tempdir().unwrap();
        let img = dir.path().join("img");
        let lab = dir.path().join("lab");
        write_idx(&img, &lab, &sample_raw()).unwrap();

        let err = load_idx(&lab, &lab).unwrap_err();
        assert!(matches!(err, Error::Format { offset: Some(0), .. }), "{err}");

        let bytes = fs::read(&img).unwrap();
        fs::write(&img, &bytes[..20]).unwrap();
        let err = load_idx(&img, &lab).unwrap_err();
        assert!(err.to_string().contains("16..28"), "{err}");
        assert_eq!(err.exit_code(), 3);

        let mut short = sample_raw();
        short.labels.pop();
        write_idx(dir.path().join("i2"), &lab, &sample_raw()).unwrap();
        write_idx(dir.path().join("i3"), dir.path().join("l3"), &short).unwrap();
        let err = load_idx(dir.path().join("i2"), dir.path().join("l3")).unwrap_err();
        assert!(matches!(err, Error::CountMismatch { images: 2, labels: 1 }));

        let err = load_idx(dir.path().join("missing"), &lab).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("missing"));
    }

    #[test]
    fn threshold_binarization() {
        let b = binarize(&sample_raw(), Binarization::Threshold, &mut seeded_rng(0)).unwrap();
        assert_eq!(b.to_bits(), vec![vec![0, 0, 1, 1, 0, 1], vec![0; 6]]);
        assert_eq!(b.labels(), Some(&[7, 2][..]));

        let scaled = RawDataset {
            pixels: b.to_bits().concat().iter().map(|&x| x * 255).collect(),
            ..sample_raw()
        };
        let again = binarize(&scaled, Binarization::Threshold, &mut seeded_rng(0)).unwrap();
        assert_eq!(again, b);
    }

    #[test]
    fn stochastic_binarization_rate() {
        let raw = RawDataset {
            height: 1,
            width: 1,
            pixels: vec![51; 10_000],
            labels: vec![0; 10_000],
        };
        let b = binarize(&raw, Binarization::Stochastic, &mut seeded_rng(1)).unwrap();
        let mean = b.rows().mean().unwrap();
        assert!((0.185..=0.215).contains(&mean), "{mean}");
    }

    #[test]
    fn binary_text_round_trip_and_errors() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("rows.txt");
        fs::write(&p, "0 1 1\n1 0 0\n").unwrap();
        let b = load_binary_text(&p).unwrap();
        assert_eq!(b.to_bits(), vec![vec![0, 1, 1], vec![1, 0, 0]]);

        let q = dir.path().join("copy.txt");
        write_binary_text(&q, &b).unwrap();
        assert_eq!(fs::read_to_string(&q).unwrap(), "0 1 1\n1 0 0\n");

        fs::write(&p, "0 2 1\n").unwrap();
        let err = load_binary_text(&p).unwrap_err();
        assert!(matches!(err, Error::Format { line: Some(1), .. }), "{err}");
        fs::write(&p, "0 1 1\n\n1 0\n").unwrap();
        assert!(matches!(load_binary_text(&p).unwrap_err(), Error::Format { line: Some(3), .. }));
        fs::write(&p, "# header\n1 0\n").unwrap();
        assert_eq!(load_binary_text(&p).unwrap().len(), 1);
        fs::write(&p, "\n").unwrap();
        assert!(load_binary_text(&p).is_err());
    }

    #[test]
    fn cache_round_trip() {
        let mut rng = seeded_rng(2);
        let rows: Vec<Vec<u8>> = (0..7).map(|_| (0..13).map(|_| rng.random_bool(0.4) as u8).collect()).collect();
        for labels in [None, Some(vec![3, 1, 4, 1, 5, 9, 2])] {
            let b = BinaryBatch::from_bits(13, &rows, labels).unwrap();
            let bytes = batch_cache_bytes(&b);
            assert_eq!(batch_from_cache_bytes(&bytes, Path::new("x")).unwrap(), b);
            assert!(batch_from_cache_bytes(&bytes[..bytes.len() - 1], Path::new("x")).is_err());
        }
        assert!(batch_from_cache_bytes(b"OCDGRRBM", Path::new("x")).is_err());
    }

    #[test]
    fn toy_dataset_shape() {
        let cfg = ToyConfig::default();
        let toy = toy_generate(&cfg, &mut seeded_rng(3)).unwrap();
        assert_eq!(toy.len(), 10_000);
        assert_eq!(toy.n_visible(), 100);
        for (r, row) in toy.rows().outer_iter().enumerate() {
            let c = toy.label(r).unwrap();
            assert_eq!(c, r / 1_000);
            for (i, &x) in row.iter().enumerate() {
                if i / 10 != c {
                    assert_eq!(x, 0.0);
                }
            }
        }
        let zero = toy_generate(&ToyConfig { p: 0.0, n_per_class: 5, ..cfg }, &mut seeded_rng(3)).unwrap();
        assert!(zero.rows().iter().all(|&x| x == 0.0));
        assert!(toy_generate(&ToyConfig { block: 0, ..cfg }, &mut seeded_rng(3)).is_err());
        assert!(toy_generate(&ToyConfig { p: 1.5, ..cfg }, &mut seeded_rng(3)).is_err());

        let protos = toy_prototypes(&cfg).unwrap();
        assert_eq!(protos.len(), 10);
        assert_eq!(protos.rows().sum(), 100.0);
        assert_eq!(protos.row(3).iter().skip(30).take(10).sum::<f64>(), 10.0);
    }

    #[test]
    fn toy_block_rate() {
        let cfg = ToyConfig {
            n_per_class: 10_000,
            n_classes: 2,
            ..ToyConfig::default()
        };
        let toy = toy_generate(&cfg, &mut seeded_rng(4)).unwrap();
        for c in 0..2 {
            let block = toy.rows().slice(ndarray::s![c * 10_000..(c + 1) * 10_000, c * 10..(c + 1) * 10]).to_owned();
            let mean = block.mean().unwrap();
            assert!((0.285..=0.315).contains(&mean), "class {c}: {mean}");
        }
    }

    #[test]
    fn ordering() {
        let b = BinaryBatch::from_bits(1, &[vec![0], vec![1], vec![0], vec![1]], Some(vec![2, 0, 1, 0])).unwrap();
        assert_eq!(stream_permutation(&b, StreamOrder::SortedByClass).unwrap(), vec![1, 3, 2, 0]);
        let sorted = order_stream(&b, StreamOrder::SortedByClass).unwrap();
        assert_eq!(sorted.labels(), Some(&[0, 0, 1, 2][..]));
        assert!(order_stream(&b.clone().without_labels(), StreamOrder::SortedByClass).is_err());

        let random = StreamOrder::Random { seed: 9 };
        assert_eq!(stream_permutation(&b, random).unwrap(), stream_permutation(&b, random).unwrap());
        let big = BinaryBatch::new(Array2::zeros((60_000, 1)), None).unwrap();
        let mut perm = stream_permutation(&big, random).unwrap();
        assert_ne!(perm[..10], (0..10).collect::<Vec<_>>()[..]);
        perm.sort_unstable();
        assert!(perm.iter().enumerate().all(|(i, &p)| i == p));
    }

    #[test]
    fn stream_order_json() {
        let s: StreamOrder = serde_json::from_str(r#"{"mode":"random","seed":5}"#).unwrap();
        assert_eq!(s, StreamOrder::Random { seed: 5 });
        let s: StreamOrder = serde_json::from_str(r#"{"mode":"sorted_by_class"}"#).unwrap();
        assert_eq!(s, StreamOrder::SortedByClass);
    }
}
