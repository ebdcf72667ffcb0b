//! Reproducible experiments: configuration, streaming training with
//! checkpoint evaluation, trainer comparison, sampling and the toy replay
//! demo. The command-line tool is a thin layer over these functions.
//!
//! Every file written here carries the resolved configuration that produced
//! it: JSON outputs in a `config` field, CSV and text outputs in a leading
//! `#` comment line, model files in their metadata string.
//!
//! Component generators are derived from the master seed with
//! [`derive_seed`], so evaluating more or fewer checkpoints never perturbs
//! the training stream.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::data::{
    binarize, load_batch_cache, load_binary_text, load_idx, order_stream, toy_generate, toy_prototypes,
    write_binary_text, Binarization, StreamOrder, ToyConfig,
};
use crate::error::{Error, Result};
use crate::eval::{ais_log_z, class_histogram, exact_log_z, test_log_prob_report, AisSchedule, EvaluationReport, LogZ};
use crate::online::{
    generate_replay, stream_train, MemoryAccounting, MemoryFootprint, StreamOptions, StreamOutcome, TrainerKind,
};
use crate::rbm::persist::ModelFile;
use crate::rbm::{BinaryBatch, Hyperparameters, RbmParameters};
use crate::reference::{published, REFERENCE_TAG};
use crate::rng::{derive_indexed_seed, derive_seed, seeded_rng};

pub const MODEL_FILE: &str = "model.rbm";
pub const CHECKPOINT_CSV: &str = "checkpoints.csv";
pub const CONFIG_FILE: &str = "config.json";
/// Subdirectory holding one `model_<observed_count>.rbm` per checkpoint.
pub const CHECKPOINT_DIR: &str = "checkpoints";
pub const COMPARE_CSV: &str = "compare.csv";
pub const TOY_CSV: &str = "toy_histograms.csv";

/// Where training and test rows come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DatasetSpec {
    /// Block toy data generated from the `data` seed; the test split is
    /// drawn independently.
    Toy {
        #[serde(default)]
        toy: ToyConfig,
        #[serde(default = "default_test_per_class")]
        test_per_class: usize,
    },
    /// IDX image/label pairs (optionally gzip-compressed), binarized on load.
    Idx {
        train_images: PathBuf,
        train_labels: PathBuf,
        #[serde(default)]
        test_images: Option<PathBuf>,
        #[serde(default)]
        test_labels: Option<PathBuf>,
        #[serde(default)]
        binarization: Binarization,
        /// Keep only the first rows of each split.
        #[serde(default)]
        train_limit: Option<usize>,
        #[serde(default)]
        test_limit: Option<usize>,
        #[serde(default)]
        name: Option<String>,
    },
    /// Whitespace-separated 0/1 text files (unlabeled).
    Text {
        train: PathBuf,
        #[serde(default)]
        test: Option<PathBuf>,
        #[serde(default)]
        name: Option<String>,
    },
    /// Bit-packed batch cache files.
    Cache {
        train: PathBuf,
        #[serde(default)]
        test: Option<PathBuf>,
        #[serde(default)]
        name: Option<String>,
    },
}

fn default_test_per_class() -> usize {
    100
}

/// Loaded splits. Without a test file the training rows double as test rows.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedData {
    pub train: BinaryBatch,
    pub test: BinaryBatch,
    /// Name used to look up published reference values.
    pub name: Option<String>,
}

impl DatasetSpec {
    pub fn load(&self, master_seed: u64) -> Result<LoadedData> {
        let mut rng = seeded_rng(derive_seed(master_seed, "data"));
        match self {
            DatasetSpec::Toy { toy, test_per_class } => {
                let train = toy_generate(toy, &mut rng)?;
                let test_cfg = ToyConfig {
                    n_per_class: *test_per_class,
                    ..*toy
                };
                let test = toy_generate(&test_cfg, &mut seeded_rng(derive_seed(master_seed, "toy-test")))?;
                Ok(LoadedData { train, test, name: None })
            }
            DatasetSpec::Idx {
                train_images,
                train_labels,
                test_images,
                test_labels,
                binarization,
                train_limit,
                test_limit,
                name,
            } => {
                let load = |images: &Path, labels: &Path, limit: Option<usize>, rng: &mut _| -> Result<BinaryBatch> {
                    let mut raw = load_idx(images, labels)?;
                    if let Some(n) = limit {
                        raw.truncate(n);
                    }
                    binarize(&raw, *binarization, rng)
                };
                let train = load(train_images, train_labels, *train_limit, &mut rng)?;
                let test = match (test_images, test_labels) {
                    (Some(i), Some(l)) => load(i, l, *test_limit, &mut rng)?,
                    (None, None) => train.clone(),
                    _ => return Err(Error::Config("test_images and test_labels go together".into())),
                };
                Ok(LoadedData {
                    train,
                    test,
                    name: Some(name.clone().unwrap_or_else(|| "MNIST".into())),
                })
            }
            DatasetSpec::Text { train, test, name } | DatasetSpec::Cache { train, test, name } => {
                let read = |p: &Path| match self {
                    DatasetSpec::Text { .. } => load_binary_text(p),
                    _ => load_batch_cache(p),
                };
                let train_rows = read(train)?;
                let test_rows = match test {
                    Some(p) => read(p)?,
                    None => train_rows.clone(),
                };
                if test_rows.n_visible() != train_rows.n_visible() {
                    return Err(Error::dim("test row width", train_rows.n_visible(), test_rows.n_visible()));
                }
                Ok(LoadedData {
                    train: train_rows,
                    test: test_rows,
                    name: name.clone(),
                })
            }
        }
    }
}

/// How checkpoints are scored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EstimatorSpec {
    /// Exact enumeration; fails for models with both layers above 25 units.
    Exact,
    /// AIS with equally spaced temperatures.
    Ais { n_betas: usize, n_chains: usize },
    /// AIS with the long 14,501-temperature ladder and 100 chains.
    LongLadder,
    /// No evaluation; metric columns are left empty.
    Skip,
}

impl Default for EstimatorSpec {
    fn default() -> Self {
        EstimatorSpec::Ais {
            n_betas: 1_000,
            n_chains: 100,
        }
    }
}

impl EstimatorSpec {
    pub fn log_z(&self, params: &RbmParameters, seed: u64) -> Result<Option<LogZ>> {
        let mut rng = seeded_rng(seed);
        Ok(match *self {
            EstimatorSpec::Exact => Some(LogZ::exact(exact_log_z(params)?)),
            EstimatorSpec::Ais { n_betas, n_chains } => {
                Some(ais_log_z(params, &AisSchedule::uniform(n_betas, n_chains)?, &mut rng)?)
            }
            EstimatorSpec::LongLadder => Some(ais_log_z(params, &AisSchedule::long_ladder(), &mut rng)?),
            EstimatorSpec::Skip => None,
        })
    }

    /// `log Z` plus the test report, or `None` when skipping.
    pub fn evaluate(&self, params: &RbmParameters, test: &BinaryBatch, seed: u64) -> Result<Option<EvaluationReport>> {
        match self.log_z(params, seed)? {
            Some(z) => Ok(Some(test_log_prob_report(params, test, z)?)),
            None => Ok(None),
        }
    }
}

/// Everything that determines one streaming experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub dataset: DatasetSpec,
    #[serde(default = "default_trainer")]
    pub trainer: TrainerKind,
    /// `n_visible = 0` is filled in from the data.
    #[serde(default)]
    pub hyper: Hyperparameters,
    #[serde(default = "default_order")]
    pub order: StreamOrder,
    #[serde(default = "default_checkpoint_every")]
    pub checkpoint_every: usize,
    #[serde(default)]
    pub estimator: EstimatorSpec,
    #[serde(default)]
    pub accounting: MemoryAccounting,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
    /// Record wall-clock times. Turn off for byte-identical reruns.
    #[serde(default = "default_timing")]
    pub timing: bool,
}

fn default_trainer() -> TrainerKind {
    TrainerKind::Ocdgr
}

fn default_order() -> StreamOrder {
    StreamOrder::SortedByClass
}

fn default_checkpoint_every() -> usize {
    1_000
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("runs/default")
}

fn default_timing() -> bool {
    true
}

impl ExperimentConfig {
    pub fn new(dataset: DatasetSpec, hyper: Hyperparameters) -> Self {
        Self {
            dataset,
            trainer: default_trainer(),
            hyper,
            order: default_order(),
            checkpoint_every: default_checkpoint_every(),
            estimator: EstimatorSpec::default(),
            accounting: MemoryAccounting::default(),
            output_dir: default_output_dir(),
            seed: 0,
            timing: true,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// Fill in the visible layer size from the data and validate.
    pub fn resolve(&mut self, data: &LoadedData) -> Result<()> {
        let n_v = data.train.n_visible();
        if self.hyper.n_visible == 0 {
            self.hyper.n_visible = n_v;
        } else if self.hyper.n_visible != n_v {
            return Err(Error::Config(format!(
                "hyper.n_visible is {} but the data has {n_v} columns",
                self.hyper.n_visible
            )));
        }
        self.hyper.validate()?;
        if self.checkpoint_every == 0 {
            return Err(Error::Config("checkpoint_every must be positive".into()));
        }
        Ok(())
    }

    fn stream_options(&self) -> StreamOptions {
        StreamOptions {
            checkpoint_every: self.checkpoint_every,
            accounting: self.accounting,
        }
    }
}

/// One row of `checkpoints.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointRow {
    pub observed_count: usize,
    pub trainer: TrainerKind,
    pub log_z_estimate: Option<f64>,
    pub log_z_std: Option<f64>,
    pub mean_log_prob: Option<f64>,
    pub cross_class_std: Option<f64>,
    pub wall_ms: f64,
}

/// A trained stream and its final evaluation.
#[derive(Debug, Clone)]
pub struct TrainedRun {
    pub trainer: TrainerKind,
    pub outcome: StreamOutcome,
    pub rows: Vec<CheckpointRow>,
    pub final_report: Option<EvaluationReport>,
    pub wall_ms: f64,
}

impl TrainedRun {
    /// Largest footprint seen after any update procedure.
    pub fn peak_footprint(&self) -> MemoryFootprint {
        self.outcome
            .procedure_footprints
            .iter()
            .copied()
            .max_by_key(|f| f.total_scalars())
            .unwrap_or(MemoryFootprint {
                parameter_scalars: 2 * self.outcome.params.scalar_count(),
                replay_rows: 0,
                replay_scalars: 0,
            })
    }
}

/// Stream `data.train` through `config.trainer`, scoring every checkpoint
/// and the final parameters on `data.test`. `config` must be resolved.
pub fn train_and_evaluate(config: &ExperimentConfig, data: &LoadedData, evaluate_checkpoints: bool) -> Result<TrainedRun> {
    let stream = order_stream(&data.train, config.order)?;
    let mut rng = seeded_rng(derive_seed(config.seed, "train"));
    let started = Instant::now();
    let outcome = stream_train(config.trainer, &stream, &config.hyper, &config.stream_options(), &mut rng)?;
    let wall_ms = if config.timing { started.elapsed().as_secs_f64() * 1e3 } else { 0.0 };

    let mut rows = Vec::with_capacity(outcome.checkpoints.len());
    for (i, cp) in outcome.checkpoints.iter().enumerate() {
        let report = if evaluate_checkpoints {
            config
                .estimator
                .evaluate(&cp.params, &data.test, derive_indexed_seed(config.seed, "checkpoint-eval", i as u64))?
        } else {
            None
        };
        rows.push(CheckpointRow {
            observed_count: cp.observed_count,
            trainer: config.trainer,
            log_z_estimate: report.as_ref().map(|r| r.log_z),
            log_z_std: report.as_ref().map(|r| r.log_z_std),
            mean_log_prob: report.as_ref().map(|r| r.mean_log_prob),
            cross_class_std: report.as_ref().map(|r| r.cross_class_std),
            wall_ms: if config.timing { cp.wall_ms } else { 0.0 },
        });
    }
    let final_report = config
        .estimator
        .evaluate(&outcome.params, &data.test, derive_seed(config.seed, "final-eval"))?;
    Ok(TrainedRun {
        trainer: config.trainer,
        outcome,
        rows,
        final_report,
        wall_ms,
    })
}

/// Write `# <label>: <json>` followed by CSV rows with the given header.
fn write_csv<T: Serialize>(path: &Path, label: &str, config_json: &str, header: &[&str], rows: &[T]) -> Result<()> {
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    writeln!(file, "# {label}: {config_json}").map_err(|e| Error::io(path, e))?;
    let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(file);
    writer.write_record(header)?;
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Rows of a CSV file written by this module, skipping the config line.
pub fn read_csv_records(path: impl AsRef<Path>) -> Result<(Vec<String>, Vec<csv::StringRecord>)> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            other => Error::Config(format!("{other:?}")),
        })?;
    let header = reader.headers()?.iter().map(str::to_owned).collect();
    let rows = reader.records().collect::<std::result::Result<Vec<_>, _>>()?;
    Ok((header, rows))
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

const CHECKPOINT_HEADER: [&str; 7] = [
    "observed_count",
    "trainer",
    "log_z_estimate",
    "log_z_std",
    "mean_log_prob",
    "cross_class_std",
    "wall_ms",
];

/// Outputs of [`run_train`].
#[derive(Debug, Clone)]
pub struct TrainSummary {
    pub config: ExperimentConfig,
    pub run: TrainedRun,
    pub model_path: PathBuf,
    pub csv_path: PathBuf,
}

/// Train as configured and write `model.rbm`, `checkpoints.csv`,
/// `config.json` and the checkpoint snapshots into the output directory.
pub fn run_train(config: &ExperimentConfig) -> Result<TrainSummary> {
    let mut config = config.clone();
    let data = config.dataset.load(config.seed)?;
    config.resolve(&data)?;
    let run = train_and_evaluate(&config, &data, true)?;

    let dir = config.output_dir.clone();
    create_dir(&dir)?;
    let json = config.to_json();
    let mut model = ModelFile::new(run.outcome.params.clone(), config.hyper.clone());
    model.observed_count = Some(run.outcome.observed_count as u64);
    model.metadata = json.clone();
    let model_path = dir.join(MODEL_FILE);
    model.save(&model_path)?;
    let snapshots = dir.join(CHECKPOINT_DIR);
    create_dir(&snapshots)?;
    for checkpoint in &run.outcome.checkpoints {
        let mut snapshot = ModelFile::new(checkpoint.params.clone(), config.hyper.clone());
        snapshot.observed_count = Some(checkpoint.observed_count as u64);
        snapshot.metadata = json.clone();
        snapshot.save(snapshots.join(format!("model_{}.rbm", checkpoint.observed_count)))?;
    }
    let csv_path = dir.join(CHECKPOINT_CSV);
    write_csv(&csv_path, "config", &json, &CHECKPOINT_HEADER, &run.rows)?;
    let config_path = dir.join(CONFIG_FILE);
    fs::write(&config_path, serde_json::to_string_pretty(&config)?).map_err(|e| Error::io(&config_path, e))?;
    Ok(TrainSummary {
        config,
        run,
        model_path,
        csv_path,
    })
}

/// Inputs of [`run_evaluate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluateRequest {
    pub model: PathBuf,
    /// The test split of this dataset is scored.
    pub data: DatasetSpec,
    #[serde(default)]
    pub estimator: EstimatorSpec,
    #[serde(default)]
    pub seed: u64,
}

/// An evaluation report together with the request that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationOutput {
    pub config: EvaluateRequest,
    #[serde(flatten)]
    pub report: EvaluationReport,
}

/// Score a saved model on a test set. Writes the JSON report to `output`
/// when given.
pub fn run_evaluate(request: &EvaluateRequest, output: Option<&Path>) -> Result<EvaluationOutput> {
    let model = ModelFile::load(&request.model)?;
    let data = request.data.load(request.seed)?;
    if data.test.n_visible() != model.params.n_visible() {
        return Err(Error::dim("test row width", model.params.n_visible(), data.test.n_visible()));
    }
    let estimator = match request.estimator {
        EstimatorSpec::Skip => EstimatorSpec::default(),
        other => other,
    };
    let report = estimator
        .evaluate(&model.params, &data.test, derive_seed(request.seed, "evaluate"))?
        .expect("estimator is not skip");
    let out = EvaluationOutput {
        config: request.clone(),
        report,
    };
    if let Some(path) = output {
        fs::write(path, serde_json::to_string_pretty(&out)?).map_err(|e| Error::io(path, e))?;
    }
    Ok(out)
}

/// Inputs of [`run_generate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerateRequest {
    pub model: PathBuf,
    pub n: usize,
    /// Defaults to the model's own `gibbs_steps`.
    #[serde(default)]
    pub gibbs_steps: Option<usize>,
    #[serde(default)]
    pub seed: u64,
}

/// Draw `n` samples from a saved model the way replay data is generated,
/// optionally writing them as 0/1 text with a config comment line.
pub fn run_generate(request: &GenerateRequest, output: Option<&Path>) -> Result<BinaryBatch> {
    if request.n == 0 {
        return Err(Error::Config("sample count must be positive".into()));
    }
    let model = ModelFile::load(&request.model)?;
    let steps = request.gibbs_steps.unwrap_or(model.hyper.gibbs_steps);
    let mut rng = seeded_rng(derive_seed(request.seed, "generate"));
    let samples = generate_replay(&model.params, request.n, steps, &mut rng)?;
    if let Some(path) = output {
        write_binary_text(path, &samples)?;
        let body = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let header = format!("# generate: {}\n", serde_json::to_string(request)?);
        fs::write(path, header + &body).map_err(|e| Error::io(path, e))?;
    }
    Ok(samples)
}

/// One row of `compare.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub trainer: TrainerKind,
    pub observed_count: usize,
    pub log_z: Option<f64>,
    pub log_z_std: Option<f64>,
    pub mean_log_prob: Option<f64>,
    pub cross_class_std: Option<f64>,
    /// Parameters plus momentum buffer.
    pub parameter_scalars: usize,
    pub peak_replay_rows: usize,
    pub peak_replay_scalars: usize,
    pub peak_total_scalars: usize,
    pub wall_ms: f64,
    pub reference_dataset: Option<String>,
    pub reference_mean_log_prob: Option<f64>,
    pub reference_tag: Option<String>,
}

pub const COMPARE_HEADER: [&str; 14] = [
    "trainer",
    "observed_count",
    "log_z",
    "log_z_std",
    "mean_log_prob",
    "cross_class_std",
    "parameter_scalars",
    "peak_replay_rows",
    "peak_replay_scalars",
    "peak_total_scalars",
    "wall_ms",
    "reference_dataset",
    "reference_mean_log_prob",
    "reference_tag",
];

/// Compare `trainers` on the dataset, ordering and seed of `config` and write
/// `compare.csv`. The trainer field of `config` is ignored.
pub fn run_compare(config: &ExperimentConfig, trainers: &[TrainerKind]) -> Result<Vec<CompareRow>> {
    if trainers.is_empty() {
        return Err(Error::Config("nothing to compare".into()));
    }
    let mut config = config.clone();
    let data = config.dataset.load(config.seed)?;
    config.resolve(&data)?;
    let reference = data.name.as_deref().and_then(published);
    let mut rows = Vec::with_capacity(trainers.len());
    for &kind in trainers {
        let run_config = ExperimentConfig {
            trainer: kind,
            ..config.clone()
        };
        let run = train_and_evaluate(&run_config, &data, false)?;
        let peak = run.peak_footprint();
        let report = run.final_report.as_ref();
        rows.push(CompareRow {
            trainer: kind,
            observed_count: run.outcome.observed_count,
            log_z: report.map(|r| r.log_z),
            log_z_std: report.map(|r| r.log_z_std),
            mean_log_prob: report.map(|r| r.mean_log_prob),
            cross_class_std: report.map(|r| r.cross_class_std),
            parameter_scalars: peak.parameter_scalars,
            peak_replay_rows: peak.replay_rows,
            peak_replay_scalars: peak.replay_scalars,
            peak_total_scalars: peak.total_scalars(),
            wall_ms: run.wall_ms,
            reference_dataset: reference.map(|r| r.dataset.to_owned()),
            reference_mean_log_prob: reference.map(|r| r.for_trainer(kind)),
            reference_tag: reference.map(|_| REFERENCE_TAG.to_owned()),
        });
    }
    create_dir(&config.output_dir)?;
    write_csv(
        &config.output_dir.join(COMPARE_CSV),
        "config",
        &config.to_json(),
        &COMPARE_HEADER,
        &rows,
    )?;
    Ok(rows)
}

/// Settings of the class-by-class toy replay demo.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ToyDemoConfig {
    pub toy: ToyConfig,
    pub trainer: TrainerKind,
    /// `n_visible = 0` is filled in from the toy geometry.
    pub hyper: Hyperparameters,
    pub samples_per_stage: usize,
    /// Gibbs steps used to draw the inspected samples.
    pub sample_gibbs_steps: usize,
    pub k: usize,
    pub seed: u64,
    pub output_dir: Option<PathBuf>,
}

impl Default for ToyDemoConfig {
    fn default() -> Self {
        Self {
            toy: ToyConfig::default(),
            trainer: TrainerKind::Ocdgr,
            hyper: Hyperparameters::new(0, 50),
            samples_per_stage: 1_000,
            sample_gibbs_steps: 1,
            k: 1,
            seed: 0,
            output_dir: None,
        }
    }
}

/// Class histogram of generated samples after one class of the stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToyStage {
    /// Number of classes seen so far; classes `0..observed_classes`.
    pub observed_classes: usize,
    pub histogram: BTreeMap<usize, usize>,
}

impl ToyStage {
    fn shares(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        let total: usize = self.histogram.values().sum();
        self.histogram
            .iter()
            .map(move |(&c, &n)| (c, n as f64 / total.max(1) as f64))
    }

    /// Smallest share of samples among observed classes.
    pub fn min_observed_share(&self) -> f64 {
        self.shares()
            .filter(|(c, _)| *c < self.observed_classes)
            .map(|(_, s)| s)
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest share among classes not yet observed; 0 when all are observed.
    pub fn max_unobserved_share(&self) -> f64 {
        self.shares()
            .filter(|(c, _)| *c >= self.observed_classes)
            .map(|(_, s)| s)
            .fold(0.0, f64::max)
    }
}

/// Stream the toy classes in order and, after each class, histogram
/// generated samples by their nearest class prototype.
pub fn run_toy_demo(config: &ToyDemoConfig) -> Result<Vec<ToyStage>> {
    let toy = config.toy;
    let mut hyper = config.hyper.clone();
    if hyper.n_visible == 0 {
        hyper.n_visible = toy.n_visible();
    }
    hyper.validate()?;
    if config.samples_per_stage == 0 {
        return Err(Error::Config("samples_per_stage must be positive".into()));
    }
    let data = toy_generate(&toy, &mut seeded_rng(derive_seed(config.seed, "data")))?;
    let prototypes = toy_prototypes(&toy)?;
    let options = StreamOptions {
        checkpoint_every: toy.n_per_class,
        accounting: MemoryAccounting::Scalar,
    };
    let mut rng = seeded_rng(derive_seed(config.seed, "train"));
    let outcome = stream_train(config.trainer, &data, &hyper, &options, &mut rng)?;

    let mut stages = Vec::with_capacity(outcome.checkpoints.len());
    for (i, cp) in outcome.checkpoints.iter().enumerate() {
        let mut sample_rng = seeded_rng(derive_indexed_seed(config.seed, "toy-samples", i as u64));
        let samples = generate_replay(&cp.params, config.samples_per_stage, config.sample_gibbs_steps, &mut sample_rng)?;
        stages.push(ToyStage {
            observed_classes: i + 1,
            histogram: class_histogram(&samples, &prototypes, config.k)?,
        });
    }

    if let Some(dir) = &config.output_dir {
        create_dir(dir)?;
        let mut header: Vec<String> = vec!["observed_classes".into()];
        header.extend((0..toy.n_classes).map(|c| format!("class_{c}")));
        header.extend(["min_observed_share".into(), "max_unobserved_share".into()]);
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        let rows: Vec<Vec<String>> = stages
            .iter()
            .map(|s| {
                let mut row = vec![s.observed_classes.to_string()];
                row.extend((0..toy.n_classes).map(|c| s.histogram.get(&c).copied().unwrap_or(0).to_string()));
                row.push(s.min_observed_share().to_string());
                row.push(s.max_unobserved_share().to_string());
                row
            })
            .collect();
        let resolved = ToyDemoConfig {
            hyper,
            ..config.clone()
        };
        write_csv(&dir.join(TOY_CSV), "config", &serde_json::to_string(&resolved)?, &header, &rows)?;
    }
    Ok(stages)
}
