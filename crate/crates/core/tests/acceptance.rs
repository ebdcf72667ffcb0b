//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! The process exits 0 after reporting unless `ACCEPTANCE_STRICT` is set, in
//! which case any FAIL gives exit status 1.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use ndarray::{Array1, Array2};
use ocdgr::data::{Binarization, StreamOrder};
use ocdgr::eval::{ais_log_z, exact_log_z, test_log_prob_report, AisSchedule, LogZ};
use ocdgr::experiment::{
    read_csv_records, run_compare, run_toy_demo, train_and_evaluate, DatasetSpec, EstimatorSpec, ExperimentConfig,
    ToyDemoConfig, TrainedRun, COMPARE_HEADER,
};
use ocdgr::kernel::{positive_statistics, train_offline};
use ocdgr::online::{
    er_ml_capacity, er_update_procedure, generate_replay, ocdgr_update_procedure, MemoryAccounting, OnlineTrainer,
    ReplayMemory, TrainerKind,
};
use ocdgr::rbm::{energy, free_energy, init_params, BinaryBatch, Hyperparameters, RbmParameters};
use ocdgr::reference::{published, REFERENCE_TAG};
use ocdgr::rng::seeded_rng;
use rand::Rng;

type Outcome = Result<(bool, String), ocdgr::Error>;

struct Report {
    passed: usize,
    total: usize,
}

impl Report {
    fn run(&mut self, id: u32, budget: Option<Duration>, check: impl FnOnce() -> Outcome) {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let (ok, detail) = match result {
            Ok((ok, detail)) => (ok, detail),
            Err(e) => (false, format!("error: {e}")),
        };
        let in_time = budget.is_none_or(|b| elapsed <= b);
        let budget_note = match budget {
            Some(b) if !in_time => format!(", over the {:.0} s budget", b.as_secs_f64()),
            Some(b) => format!(", budget {:.0} s", b.as_secs_f64()),
            None => String::new(),
        };
        let pass = ok && in_time;
        self.total += 1;
        self.passed += pass as usize;
        println!(
            "criterion {id}: {} ({detail}; {:.2} s{budget_note})",
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        );
    }
}

fn bits(index: usize, n: usize) -> Array1<f64> {
    (0..n).map(|i| ((index >> i) & 1) as f64).collect()
}

fn normalization() -> Outcome {
    let mut worst = 0.0f64;
    for i in 0..20u64 {
        let sigma = if i < 10 { 0.1 } else { 1.0 };
        let params = init_params(8, 6, sigma, &mut seeded_rng(i))?;
        let log_z = exact_log_z(&params)?;
        let mut total = 0.0;
        for v in 0..1usize << 8 {
            total += (-free_energy(&params, &bits(v, 8))? - log_z).exp();
        }
        worst = worst.max((total - 1.0).abs());
    }
    Ok((worst <= 1e-8, format!("20 machines, max |sum - 1| = {worst:.2e}")))
}

fn ais_accuracy() -> Outcome {
    let schedule = AisSchedule::uniform(1_000, 100)?;
    let mut within = 0;
    let mut worst = 0.0f64;
    for i in 0..10u64 {
        let params = init_params(10, 8, 0.1, &mut seeded_rng(100 + i))?;
        let exact = exact_log_z(&params)?;
        let ais = ais_log_z(&params, &schedule, &mut seeded_rng(200 + i))?;
        let err = (ais.estimate - exact).abs();
        worst = worst.max(err);
        within += (err <= f64::max(0.05, 3.0 * ais.std)) as usize;
    }
    Ok((within >= 9, format!("{within}/10 within tolerance, max error {worst:.2e}")))
}

fn gradient_agreement() -> Outcome {
    let (n_v, n_h) = (6, 4);
    let mut rng = seeded_rng(300);
    let params = init_params(n_v, n_h, 1.0, &mut rng)?;
    let rows: Vec<Vec<u8>> = vec![vec![1, 0, 1, 1, 0, 0], vec![0, 1, 1, 0, 1, 0], vec![1, 1, 1, 0, 0, 1], vec![0, 0, 0, 1, 1, 1]];
    let data = BinaryBatch::from_bits(n_v, &rows, None)?;
    let n = data.len() as f64;

    // Data expectation by explicit enumeration of the hidden layer.
    let mut e_w = Array2::<f64>::zeros((n_h, n_v));
    let mut e_a = Array1::<f64>::zeros(n_v);
    let mut e_b = Array1::<f64>::zeros(n_h);
    for v in data.rows().outer_iter() {
        let weights: Vec<f64> = (0..1usize << n_h)
            .map(|h| energy(&params, v, &bits(h, n_h)).map(|e| (-e).exp()))
            .collect::<Result<_, _>>()?;
        let z: f64 = weights.iter().sum();
        for (h, w) in weights.iter().enumerate() {
            let hv = bits(h, n_h);
            let p = w / z;
            for j in 0..n_h {
                for i in 0..n_v {
                    e_w[[j, i]] += p * hv[j] * v[i] / n;
                }
                e_b[j] += p * hv[j] / n;
            }
        }
        e_a += &(&v / n);
    }
    let (stats, _) = positive_statistics(&params, &data)?;
    let grad_err = [
        (&stats.weight_stat / n - &e_w).iter().fold(0.0f64, |m, x| m.max(x.abs())),
        (&stats.visible_stat / n - &e_a).iter().fold(0.0f64, |m, x| m.max(x.abs())),
        (&stats.hidden_stat / n - &e_b).iter().fold(0.0f64, |m, x| m.max(x.abs())),
    ]
    .into_iter()
    .fold(0.0, f64::max);

    let train_ll = |p: &RbmParameters| -> Result<f64, ocdgr::Error> {
        Ok(test_log_prob_report(p, &data, LogZ::exact(exact_log_z(p)?))?.mean_log_prob)
    };
    let mut hyper = Hyperparameters::new(n_v, n_h);
    hyper.epochs = 2_000;
    hyper.batch_size = data.len();
    let start = init_params(n_v, n_h, hyper.init_std, &mut rng)?;
    let trained = train_offline(&start, &data, &hyper, &mut rng)?;
    let (before, after) = (train_ll(&start)?, train_ll(&trained)?);
    Ok((
        grad_err <= 1e-12 && after > before,
        format!("gradient max error {grad_err:.1e}; train log-lik {before:.4} -> {after:.4}"),
    ))
}

fn markov_property() -> Outcome {
    let (n_v, n_h) = (16, 6);
    let hyper = Hyperparameters {
        batch_size: 10,
        replay_size: 30,
        epochs: 3,
        ..Hyperparameters::new(n_v, n_h)
    };
    let stream = |n: usize, seed: u64| -> Result<BinaryBatch, ocdgr::Error> {
        let mut rng = seeded_rng(seed);
        let rows: Vec<Vec<u8>> = (0..n).map(|_| (0..n_v).map(|_| rng.random_bool(0.3) as u8).collect()).collect();
        BinaryBatch::from_bits(n_v, &rows, None)
    };
    let init = init_params(n_v, n_h, 0.1, &mut seeded_rng(400))?;
    let history = |kind: TrainerKind, data: &BinaryBatch, seed: u64| -> Result<OnlineTrainer, ocdgr::Error> {
        let mut trainer = OnlineTrainer::new(kind, init.clone(), hyper.clone(), MemoryAccounting::Scalar)?;
        let mut rng = seeded_rng(seed);
        for row in data.rows().outer_iter() {
            trainer.observe(row, &mut rng)?;
        }
        Ok(trainer)
    };
    let (h1, h2) = (stream(40, 401)?, stream(70, 402)?);
    let next = stream(10, 403)?;

    // Same parameters, momentum, pending batch and generator; different pasts.
    let a = history(TrainerKind::Ocdgr, &h1, 404)?;
    let b = history(TrainerKind::Ocdgr, &h2, 405)?;
    let mut sa = a.state().clone();
    let mut sb = b.state().clone();
    sb.params = sa.params.clone();
    sb.update_state = sa.update_state.clone();
    sa.pending = next.clone();
    sb.pending = next.clone();
    let oa = ocdgr_update_procedure(sa.clone(), &hyper, &mut seeded_rng(406))?;
    let ob = ocdgr_update_procedure(sb.clone(), &hyper, &mut seeded_rng(406))?;
    let ocd_equal = oa.params == ob.params && oa.update_state == ob.update_state;

    // The experience-replay memory carries the past into the update.
    let a = history(TrainerKind::ErIm, &h1, 404)?;
    let b = history(TrainerKind::ErIm, &h2, 405)?;
    let memory = |t: &OnlineTrainer| t.memory().cloned().unwrap_or_else(ReplayMemory::unbounded);
    let (ea, _) = er_update_procedure(sa, memory(&a), &hyper, &mut seeded_rng(406))?;
    let (eb, _) = er_update_procedure(sb, memory(&b), &hyper, &mut seeded_rng(406))?;
    let er_differs = ea.params != eb.params;
    Ok((
        ocd_equal && er_differs,
        format!("generative replay bitwise equal: {ocd_equal}; ER-IM differs: {er_differs}"),
    ))
}

fn toy_retention() -> Outcome {
    let mut per_seed = Vec::new();
    let mut all = true;
    for seed in 0..3u64 {
        let config = ToyDemoConfig {
            seed,
            ..ToyDemoConfig::default()
        };
        let stages = run_toy_demo(&config)?;
        let good = stages
            .iter()
            .filter(|s| s.min_observed_share() >= 0.05 && s.max_unobserved_share() <= 0.02)
            .count();
        all &= good >= 8;
        per_seed.push(format!("seed {seed}: {good}/10"));
    }
    Ok((all, format!("stages meeting both shares, {}", per_seed.join(", "))))
}

fn mnist_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/mnist")
}

fn mnist_spec(train_limit: Option<usize>) -> DatasetSpec {
    let root = mnist_root();
    DatasetSpec::Idx {
        train_images: root.join("train-images-idx3-ubyte.gz"),
        train_labels: root.join("train-labels-idx1-ubyte.gz"),
        test_images: Some(root.join("t10k-images-idx3-ubyte.gz")),
        test_labels: Some(root.join("t10k-labels-idx1-ubyte.gz")),
        binarization: Binarization::Threshold,
        train_limit,
        test_limit: None,
        name: None,
    }
}

fn mnist_runs() -> Result<Vec<[TrainedRun; 3]>, ocdgr::Error> {
    let mut runs = Vec::new();
    for seed in 0..5u64 {
        let mut config = ExperimentConfig::new(mnist_spec(None), Hyperparameters::new(0, 25));
        config.seed = seed;
        config.order = StreamOrder::SortedByClass;
        config.estimator = EstimatorSpec::Ais {
            n_betas: 1_000,
            n_chains: 50,
        };
        let data = config.dataset.load(seed)?;
        if data.train.len() != 5_000 || data.test.len() != 1_000 {
            return Err(ocdgr::Error::Config(format!(
                "expected 5,000/1,000 images, found {}/{}",
                data.train.len(),
                data.test.len()
            )));
        }
        config.resolve(&data)?;
        let run = |kind| {
            let config = ExperimentConfig {
                trainer: kind,
                ..config.clone()
            };
            train_and_evaluate(&config, &data, false)
        };
        runs.push([run(TrainerKind::Ocdgr)?, run(TrainerKind::ErMl)?, run(TrainerKind::ErIm)?]);
    }
    Ok(runs)
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    xs[xs.len() / 2]
}

fn directional(runs: &[[TrainedRun; 3]]) -> Outcome {
    let score = |r: &TrainedRun| r.final_report.as_ref().map_or(f64::NAN, |r| r.mean_log_prob);
    let ocd = median(runs.iter().map(|r| score(&r[0])).collect());
    let er_ml = median(runs.iter().map(|r| score(&r[1])).collect());
    let er_im = median(runs.iter().map(|r| score(&r[2])).collect());
    Ok((
        ocd >= er_ml - 1.0,
        format!("median test log-prob over 5 seeds: generative replay {ocd:.2}, ER-ML {er_ml:.2}, ER-IM {er_im:.2}"),
    ))
}

fn memory_accounting(runs: &[[TrainedRun; 3]]) -> Outcome {
    let n_b = Hyperparameters::default().batch_size;
    let capacity = er_ml_capacity(784, 25);
    let mut ok = capacity == 26;
    for [ocd, er_ml, er_im] in runs {
        let totals: Vec<usize> = ocd.outcome.checkpoints.iter().map(|c| c.footprint.total_scalars()).collect();
        ok &= !totals.is_empty() && totals.iter().all(|&t| t == totals[0]);
        ok &= ocd.outcome.procedure_footprints.iter().all(|f| f.replay_rows == 0);

        let rows: Vec<usize> = er_im.outcome.procedure_footprints.iter().map(|f| f.replay_rows).collect();
        ok &= rows.iter().enumerate().all(|(k, &r)| r == n_b * (k + 1));
        ok &= er_im.outcome.procedure_footprints.iter().all(|f| f.replay_scalars == f.replay_rows * 784);

        let rows: Vec<usize> = er_ml.outcome.procedure_footprints.iter().map(|f| f.replay_rows).collect();
        ok &= rows.iter().all(|&r| r == n_b.min(capacity)) && rows.iter().max() == Some(&capacity);
    }
    let first = &runs[0];
    Ok((
        ok,
        format!(
            "capacity {capacity}; peak scalars generative {} / ER-ML {} / ER-IM {}",
            first[0].peak_footprint().total_scalars(),
            first[1].peak_footprint().total_scalars(),
            first[2].peak_footprint().total_scalars()
        ),
    ))
}

fn generation_scaling() -> Outcome {
    let small = init_params(784, 250, 0.01, &mut seeded_rng(800))?;
    let large = init_params(784, 500, 0.01, &mut seeded_rng(801))?;
    let count = Hyperparameters::default().replay_size;
    let mut rng = seeded_rng(802);
    generate_replay(&small, count, 1, &mut rng)?;
    generate_replay(&large, count, 1, &mut rng)?;
    let (mut t_small, mut t_large) = (Duration::ZERO, Duration::ZERO);
    for _ in 0..20 {
        let start = Instant::now();
        generate_replay(&small, count, 1, &mut rng)?;
        t_small += start.elapsed();
        let start = Instant::now();
        generate_replay(&large, count, 1, &mut rng)?;
        t_large += start.elapsed();
    }
    let ratio = t_large.as_secs_f64() / t_small.as_secs_f64();
    Ok((
        (1.4..=3.0).contains(&ratio),
        format!(
            "mean {:.2} ms vs {:.2} ms per call, ratio {ratio:.2}",
            t_small.as_secs_f64() * 50.0,
            t_large.as_secs_f64() * 50.0
        ),
    ))
}

fn reference_schema() -> Outcome {
    let dir = std::env::temp_dir().join(format!("ocdgr-acceptance-{}", std::process::id()));
    let mut config = ExperimentConfig::new(mnist_spec(Some(200)), Hyperparameters::new(0, 5));
    config.estimator = EstimatorSpec::Skip;
    config.output_dir = dir.clone();
    run_compare(&config, &TrainerKind::ALL)?;
    let (header, rows) = read_csv_records(dir.join(ocdgr::experiment::COMPARE_CSV))?;
    let _ = std::fs::remove_dir_all(&dir);
    let reference = published("MNIST").expect("MNIST row is tabulated");
    let mut ok = header == COMPARE_HEADER && rows.len() == 3;
    for (row, kind) in rows.iter().zip(TrainerKind::ALL) {
        ok &= &row[0] == kind.name();
        ok &= &row[11] == reference.dataset;
        ok &= row[12].parse::<f64>().ok() == Some(reference.for_trainer(kind));
        ok &= &row[13] == REFERENCE_TAG;
    }
    Ok((
        ok,
        format!(
            "compare.csv carries reference values {:?} tagged \"{REFERENCE_TAG}\"",
            rows.iter().map(|r| r[12].to_owned()).collect::<Vec<_>>()
        ),
    ))
}

fn main() {
    let mut report = Report { passed: 0, total: 0 };
    let secs = Duration::from_secs;
    report.run(1, Some(secs(1)), normalization);
    report.run(2, Some(secs(30)), ais_accuracy);
    report.run(3, Some(secs(30)), gradient_agreement);
    report.run(4, Some(secs(5)), markov_property);
    report.run(5, Some(secs(300)), toy_retention);

    // Criterion 7 inspects the runs trained for criterion 6.
    let mut runs = None;
    report.run(6, Some(secs(1_200)), || {
        let trained = mnist_runs()?;
        let outcome = directional(&trained);
        runs = Some(trained);
        outcome
    });
    report.run(7, None, || match &runs {
        Some(runs) => memory_accounting(runs),
        None => Ok((false, "no MNIST runs to inspect".into())),
    });
    report.run(8, None, generation_scaling);
    report.run(9, None, reference_schema);

    println!("acceptance: {}/{} criteria pass", report.passed, report.total);
    if report.passed < report.total && std::env::var_os("ACCEPTANCE_STRICT").is_some() {
        std::process::exit(1);
    }
}
