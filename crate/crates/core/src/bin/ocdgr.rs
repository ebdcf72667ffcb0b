use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use ocdgr::data::StreamOrder;
use ocdgr::experiment::{
    run_compare, run_evaluate, run_generate, run_toy_demo, run_train, DatasetSpec, EstimatorSpec, EvaluateRequest,
    ExperimentConfig, GenerateRequest, ToyDemoConfig,
};
use ocdgr::online::TrainerKind;
use ocdgr::{Error, Result};

/// Online RBM training with generative or experience replay.
#[derive(Parser)]
#[command(name = "ocdgr", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Stream a dataset through one trainer; writes model.rbm, checkpoints.csv and config.json.
    Train {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
        #[arg(long, value_parser = parse_trainer)]
        trainer: Option<TrainerKind>,
    },
    /// Score a saved model on a test set and print the JSON report.
    Evaluate {
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        test: TestData,
        #[command(flatten)]
        estimator: EstimatorArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write the report here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Draw samples from a saved model as 0/1 text.
    Generate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        n: usize,
        /// Gibbs steps per sample; defaults to the model's own setting.
        #[arg(long)]
        gibbs_steps: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run several trainers on one configuration; writes compare.csv.
    Compare {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
        #[arg(long, value_delimiter = ',', value_parser = parse_trainer)]
        trainers: Vec<TrainerKind>,
    },
    /// Stream the ten toy classes in order and histogram generated samples after each.
    ToyDemo {
        /// JSON toy-demo settings; defaults are used when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_parser = parse_trainer)]
        trainer: Option<TrainerKind>,
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
}

/// Command-line overrides applied on top of a config file.
#[derive(Args)]
struct Overrides {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    #[arg(long)]
    checkpoint_every: Option<usize>,
    #[arg(long)]
    n_hidden: Option<usize>,
    #[arg(long, value_enum)]
    order: Option<OrderArg>,
    /// Seed of the random order; defaults to the master seed.
    #[arg(long)]
    order_seed: Option<u64>,
    #[command(flatten)]
    estimator: EstimatorArgs,
    /// Write wall_ms as 0 so reruns are byte-identical.
    #[arg(long)]
    no_timing: bool,
}

#[derive(Args)]
struct EstimatorArgs {
    #[arg(long, value_enum)]
    estimator: Option<EstimatorArg>,
    #[arg(long, default_value_t = 1_000)]
    ais_betas: usize,
    #[arg(long, default_value_t = 100)]
    ais_chains: usize,
}

#[derive(Args)]
struct TestData {
    /// Whitespace-separated 0/1 rows.
    #[arg(long, group = "test")]
    test_text: Option<PathBuf>,
    /// IDX image file; needs --test-labels.
    #[arg(long, group = "test", requires = "test_labels")]
    test_images: Option<PathBuf>,
    #[arg(long)]
    test_labels: Option<PathBuf>,
    /// Bit-packed batch cache.
    #[arg(long, group = "test")]
    test_cache: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum OrderArg {
    Sorted,
    Random,
}

#[derive(Clone, Copy, ValueEnum)]
enum EstimatorArg {
    Exact,
    Ais,
    LongLadder,
    Skip,
}

fn parse_trainer(s: &str) -> std::result::Result<TrainerKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

impl EstimatorArgs {
    fn resolve(&self) -> Option<EstimatorSpec> {
        self.estimator.map(|e| match e {
            EstimatorArg::Exact => EstimatorSpec::Exact,
            EstimatorArg::Ais => EstimatorSpec::Ais {
                n_betas: self.ais_betas,
                n_chains: self.ais_chains,
            },
            EstimatorArg::LongLadder => EstimatorSpec::LongLadder,
            EstimatorArg::Skip => EstimatorSpec::Skip,
        })
    }
}

impl Overrides {
    fn apply(&self, config: &mut ExperimentConfig) {
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(dir) = &self.output_dir {
            config.output_dir = dir.clone();
        }
        if let Some(n) = self.checkpoint_every {
            config.checkpoint_every = n;
        }
        if let Some(n) = self.n_hidden {
            config.hyper.n_hidden = n;
        }
        match self.order {
            Some(OrderArg::Sorted) => config.order = StreamOrder::SortedByClass,
            Some(OrderArg::Random) => {
                config.order = StreamOrder::Random {
                    seed: self.order_seed.unwrap_or(config.seed),
                }
            }
            None => {}
        }
        if let Some(estimator) = self.estimator.resolve() {
            config.estimator = estimator;
        }
        if self.no_timing {
            config.timing = false;
        }
    }
}

impl TestData {
    fn spec(&self) -> Result<DatasetSpec> {
        if let Some(path) = &self.test_text {
            return Ok(DatasetSpec::Text {
                train: path.clone(),
                test: None,
                name: None,
            });
        }
        if let Some(path) = &self.test_cache {
            return Ok(DatasetSpec::Cache {
                train: path.clone(),
                test: None,
                name: None,
            });
        }
        match (&self.test_images, &self.test_labels) {
            (Some(images), Some(labels)) => Ok(DatasetSpec::Idx {
                train_images: images.clone(),
                train_labels: labels.clone(),
                test_images: None,
                test_labels: None,
                binarization: Default::default(),
                train_limit: None,
                test_limit: None,
                name: None,
            }),
            _ => Err(Error::Config(
                "give a test set with --test-text, --test-cache or --test-images/--test-labels".into(),
            )),
        }
    }
}

fn load_config(path: &PathBuf, overrides: &Overrides) -> Result<ExperimentConfig> {
    let mut config = ExperimentConfig::from_file(path)?;
    overrides.apply(&mut config);
    Ok(config)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train {
            config,
            overrides,
            trainer,
        } => {
            let mut config = load_config(&config, &overrides)?;
            if let Some(kind) = trainer {
                config.trainer = kind;
            }
            let summary = run_train(&config)?;
            println!("model: {}", summary.model_path.display());
            println!("checkpoints: {}", summary.csv_path.display());
            if let Some(report) = &summary.run.final_report {
                println!("final mean log-prob: {:.4} nats", report.mean_log_prob);
            }
        }
        Command::Evaluate {
            model,
            test,
            estimator,
            seed,
            out,
        } => {
            let request = EvaluateRequest {
                model,
                data: test.spec()?,
                estimator: estimator.resolve().unwrap_or_default(),
                seed,
            };
            let output = run_evaluate(&request, out.as_deref())?;
            println!("{}", serde_json::to_string_pretty(&output)?);
        }
        Command::Generate {
            model,
            n,
            gibbs_steps,
            seed,
            out,
        } => {
            let request = GenerateRequest {
                model,
                n,
                gibbs_steps,
                seed,
            };
            let samples = run_generate(&request, Some(&out))?;
            println!("wrote {} samples to {}", samples.len(), out.display());
        }
        Command::Compare {
            config,
            overrides,
            trainers,
        } => {
            let config = load_config(&config, &overrides)?;
            let trainers = if trainers.is_empty() {
                TrainerKind::ALL.to_vec()
            } else {
                trainers
            };
            let rows = run_compare(&config, &trainers)?;
            for row in rows {
                println!(
                    "{:>6}  mean_log_prob {:>10}  peak_total_scalars {:>10}",
                    row.trainer.name(),
                    row.mean_log_prob.map_or("-".into(), |v| format!("{v:.3}")),
                    row.peak_total_scalars
                );
            }
            println!("wrote {}", config.output_dir.join(ocdgr::experiment::COMPARE_CSV).display());
        }
        Command::ToyDemo {
            config,
            seed,
            trainer,
            output_dir,
        } => {
            let mut demo = match config {
                Some(path) => {
                    let text = std::fs::read_to_string(&path).map_err(|e| Error::Io {
                        path: path.clone(),
                        source: e,
                    })?;
                    serde_json::from_str(&text)?
                }
                None => ToyDemoConfig::default(),
            };
            if let Some(seed) = seed {
                demo.seed = seed;
            }
            if let Some(kind) = trainer {
                demo.trainer = kind;
            }
            if output_dir.is_some() {
                demo.output_dir = output_dir;
            }
            for stage in run_toy_demo(&demo)? {
                let counts: Vec<String> = stage.histogram.values().map(|n| n.to_string()).collect();
                println!("{:>2} classes seen: {}", stage.observed_classes, counts.join(" "));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
