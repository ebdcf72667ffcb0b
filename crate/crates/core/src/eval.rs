//! Partition functions, test-set log-probabilities and the k-NN class
//! histogram used to inspect what a model generates.

use std::collections::BTreeMap;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{log_mean_exp, softplus, LogSumExp};
use crate::rbm::{conditional, free_energy_batch, sample_matrix, BinaryBatch, RbmParameters};

/// Largest layer [`exact_log_z`] will enumerate.
pub const EXACT_LIMIT: usize = 25;

/// Gray-code walks recompute the running pre-activations from scratch this
/// often to stop rounding drift from accumulating.
const RECOMPUTE_EVERY: u64 = 1 << 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnumerationSide {
    Visible,
    Hidden,
}

/// A log partition function estimate in nats. `std` is zero for exact values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogZ {
    pub estimate: f64,
    pub std: f64,
}

impl LogZ {
    pub fn exact(value: f64) -> Self {
        Self {
            estimate: value,
            std: 0.0,
        }
    }
}

/// Exact `log Z`, enumerating whichever layer is smaller.
pub fn exact_log_z(params: &RbmParameters) -> Result<f64> {
    let side = if params.n_visible() <= params.n_hidden() {
        EnumerationSide::Visible
    } else {
        EnumerationSide::Hidden
    };
    exact_log_z_by(params, side)
}

/// Exact `log Z` by enumerating the given layer.
///
/// Both sides give the same value up to rounding; enumerating the visible
/// side sums `exp(-F(v))`, the hidden side sums the mirror-image free energy.
pub fn exact_log_z_by(params: &RbmParameters, side: EnumerationSide) -> Result<f64> {
    let n_enum = match side {
        EnumerationSide::Visible => params.n_visible(),
        EnumerationSide::Hidden => params.n_hidden(),
    };
    if n_enum > EXACT_LIMIT {
        return Err(Error::InfeasibleSize {
            n_visible: params.n_visible(),
            n_hidden: params.n_hidden(),
            limit: EXACT_LIMIT,
        });
    }
    let w = params.weights();
    Ok(match side {
        EnumerationSide::Visible => enumerate(params.visible_bias(), params.hidden_bias(), w),
        EnumerationSide::Hidden => enumerate(params.hidden_bias(), params.visible_bias(), w.t()),
    })
}

/// `log Σ_s exp(cᵀs + Σ_j softplus(d_j + (Ms)_j))` over binary `s`, where
/// `coupling` is `len(d) × len(c)`. Walks the states in Gray-code order so
/// each step updates the pre-activations with one column.
fn enumerate(own_bias: ArrayView1<'_, f64>, other_bias: ArrayView1<'_, f64>, coupling: ArrayView2<'_, f64>) -> f64 {
    let n = own_bias.len();
    let mut state = vec![false; n];
    let mut pre = other_bias.to_owned();
    let mut linear = 0.0;
    let mut acc = LogSumExp::default();
    let total: u64 = 1 << n;
    for step in 0..total {
        if step > 0 {
            let flip = step.trailing_zeros() as usize;
            state[flip] = !state[flip];
            if step % RECOMPUTE_EVERY == 0 {
                pre.assign(&other_bias);
                linear = 0.0;
                for (k, _) in state.iter().enumerate().filter(|(_, on)| **on) {
                    pre.scaled_add(1.0, &coupling.column(k));
                    linear += own_bias[k];
                }
            } else if state[flip] {
                pre.scaled_add(1.0, &coupling.column(flip));
                linear += own_bias[flip];
            } else {
                pre.scaled_add(-1.0, &coupling.column(flip));
                linear -= own_bias[flip];
            }
        }
        acc.push(linear + pre.iter().map(|&x| softplus(x)).sum::<f64>());
    }
    acc.value()
}

/// Inverse temperatures for annealed importance sampling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AisSchedule {
    pub betas: Vec<f64>,
    pub n_chains: usize,
    /// Gibbs transitions applied at each intermediate temperature.
    #[serde(default = "one")]
    pub transitions_per_beta: usize,
}

fn one() -> usize {
    1
}

impl AisSchedule {
    pub fn new(betas: Vec<f64>, n_chains: usize) -> Result<Self> {
        let schedule = Self {
            betas,
            n_chains,
            transitions_per_beta: 1,
        };
        schedule.validate()?;
        Ok(schedule)
    }

    /// `n_betas` equally spaced temperatures from 0 to 1 inclusive.
    pub fn uniform(n_betas: usize, n_chains: usize) -> Result<Self> {
        if n_betas < 2 {
            return Err(Error::Schedule(format!("need at least 2 betas, got {n_betas}")));
        }
        let last = (n_betas - 1) as f64;
        Self::new((0..n_betas).map(|k| k as f64 / last).collect(), n_chains)
    }

    /// The long ladder commonly used for RBM evaluation: 500 steps over
    /// `[0, 0.5)`, 4,000 over `[0.5, 0.9)` and 10,000 over `[0.9, 1]`, with
    /// 100 chains.
    pub fn long_ladder() -> Self {
        let mut betas = Vec::with_capacity(14_501);
        betas.extend((0..500).map(|i| 0.5 * i as f64 / 500.0));
        betas.extend((0..4_000).map(|i| 0.5 + 0.4 * i as f64 / 4_000.0));
        betas.extend((0..=10_000).map(|i| 0.9 + 0.1 * i as f64 / 10_000.0));
        Self {
            betas,
            n_chains: 100,
            transitions_per_beta: 1,
        }
    }

    pub fn with_transitions(mut self, transitions_per_beta: usize) -> Result<Self> {
        self.transitions_per_beta = transitions_per_beta;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Schedule(m));
        if self.n_chains == 0 {
            return fail("n_chains must be positive".into());
        }
        if self.transitions_per_beta == 0 {
            return fail("transitions_per_beta must be positive".into());
        }
        match (self.betas.first(), self.betas.last()) {
            (Some(&first), Some(&last)) if self.betas.len() >= 2 => {
                if first != 0.0 || last != 1.0 {
                    return fail(format!("betas must run from 0 to 1, got {first} to {last}"));
                }
            }
            _ => return fail("need at least 2 betas".into()),
        }
        if let Some(k) = self.betas.windows(2).position(|w| w[1].partial_cmp(&w[0]).is_none_or(|o| o.is_lt())) {
            return fail(format!("betas decrease at index {}", k + 1));
        }
        Ok(())
    }
}

/// Annealed importance sampling estimate of `log Z`.
///
/// The base model keeps the target's visible biases and zeroes the weights
/// and hidden biases, so `log Z_0 = Σ_i softplus(a_i) + n_h ln 2`. The
/// intermediate model at `β` scales the weights and hidden biases by `β`.
/// The reported std is the delta-method standard error of the log of the
/// mean importance weight.
pub fn ais_log_z<R: Rng + ?Sized>(params: &RbmParameters, schedule: &AisSchedule, rng: &mut R) -> Result<LogZ> {
    schedule.validate()?;
    let a = params.visible_bias();
    let b = params.hidden_bias();
    let w = params.weights();
    let m = schedule.n_chains;
    let log_z0 = a.iter().map(|&x| softplus(x)).sum::<f64>() + params.n_hidden() as f64 * std::f64::consts::LN_2;

    let mut v = sample_matrix(&conditional(Array2::zeros((m, params.n_visible())), a, 1.0), rng);
    let mut log_w = Array1::<f64>::zeros(m);
    let last = schedule.betas.len() - 1;
    for k in 1..=last {
        let (prev, beta) = (schedule.betas[k - 1], schedule.betas[k]);
        let pre = hidden_pre(&v, w, b);
        for (lw, row) in log_w.iter_mut().zip(pre.outer_iter()) {
            *lw += row.iter().map(|&x| softplus(beta * x) - softplus(prev * x)).sum::<f64>();
        }
        if k == last {
            break;
        }
        let mut pre = pre;
        for t in 0..schedule.transitions_per_beta {
            if t > 0 {
                pre = hidden_pre(&v, w, b);
            }
            pre.mapv_inplace(|x| crate::math::sigmoid(beta * x));
            let h = sample_matrix(&pre, rng);
            v = sample_matrix(&conditional(h.dot(&w), a, beta), rng);
        }
    }

    let log_w = log_w.to_vec();
    let estimate = log_z0 + log_mean_exp(&log_w);
    let max = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let scaled = Array1::from_iter(log_w.iter().map(|&x| (x - max).exp()));
    let mean = scaled.mean().expect("at least one chain");
    let std = if m > 1 {
        scaled.std(1.0) / (mean * (m as f64).sqrt())
    } else {
        0.0
    };
    Ok(LogZ { estimate, std })
}

fn hidden_pre(v: &Array2<f64>, w: ArrayView2<'_, f64>, b: ArrayView1<'_, f64>) -> Array2<f64> {
    v.dot(&w.t()) + b
}

/// Average test log-probability with per-class breakdown.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub log_z: f64,
    pub log_z_std: f64,
    pub mean_log_prob: f64,
    pub per_class_mean: BTreeMap<usize, f64>,
    /// Population std of the per-class means; 0 without labels.
    pub cross_class_std: f64,
    pub n_test: usize,
}

/// `log p(v) = -F(v) - log Z` averaged over `test`, overall and per class.
pub fn test_log_prob_report(params: &RbmParameters, test: &BinaryBatch, log_z: LogZ) -> Result<EvaluationReport> {
    if test.is_empty() {
        return Err(Error::EmptyBatch("test set"));
    }
    let log_probs = free_energy_batch(params, test.rows())?.mapv(|f| -f - log_z.estimate);
    let mean_log_prob = log_probs.mean().expect("non-empty");

    let mut groups: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
    if let Some(labels) = test.labels() {
        for (&label, &lp) in labels.iter().zip(log_probs.iter()) {
            let entry = groups.entry(label).or_insert((0.0, 0));
            entry.0 += lp;
            entry.1 += 1;
        }
    }
    let per_class_mean: BTreeMap<usize, f64> = groups.into_iter().map(|(c, (s, n))| (c, s / n as f64)).collect();
    let cross_class_std = if per_class_mean.is_empty() {
        0.0
    } else {
        Array1::from_iter(per_class_mean.values().copied()).std(0.0)
    };
    Ok(EvaluationReport {
        log_z: log_z.estimate,
        log_z_std: log_z.std,
        mean_log_prob,
        per_class_mean,
        cross_class_std,
        n_test: test.len(),
    })
}

fn pack_rows(rows: ArrayView2<'_, f64>) -> Vec<Vec<u64>> {
    rows.axis_iter(Axis(0))
        .map(|row| {
            let mut words = vec![0u64; row.len().div_ceil(64)];
            for (i, &x) in row.iter().enumerate() {
                if x != 0.0 {
                    words[i / 64] |= 1 << (i % 64);
                }
            }
            words
        })
        .collect()
}

fn hamming(a: &[u64], b: &[u64]) -> u32 {
    a.iter().zip(b).map(|(x, y)| (x ^ y).count_ones()).sum()
}

/// Label each query by majority vote of its `k` nearest prototypes in
/// Hamming distance.
///
/// Neighbours at equal distance are taken in ascending label order. Vote ties
/// go to the class with the smallest mean distance among its votes, then to
/// the lowest class id. The result does not depend on prototype order.
pub fn knn_classify(prototypes: &BinaryBatch, queries: &BinaryBatch, k: usize) -> Result<Vec<usize>> {
    if prototypes.is_empty() {
        return Err(Error::EmptyBatch("prototypes"));
    }
    let labels = prototypes
        .labels()
        .ok_or_else(|| Error::Config("k-NN prototypes must be labeled".into()))?;
    if k == 0 || k > prototypes.len() {
        return Err(Error::Config(format!(
            "k must be in 1..={}, got {k}",
            prototypes.len()
        )));
    }
    if queries.n_visible() != prototypes.n_visible() {
        return Err(Error::dim("query width", prototypes.n_visible(), queries.n_visible()));
    }
    let protos = pack_rows(prototypes.rows());
    let mut neighbours: Vec<(u32, usize)> = Vec::with_capacity(protos.len());
    Ok(pack_rows(queries.rows())
        .iter()
        .map(|q| {
            neighbours.clear();
            neighbours.extend(protos.iter().zip(labels).map(|(p, &l)| (hamming(q, p), l)));
            neighbours.sort_unstable();
            let mut votes: BTreeMap<usize, (usize, u64)> = BTreeMap::new();
            for &(d, l) in &neighbours[..k] {
                let e = votes.entry(l).or_insert((0, 0));
                e.0 += 1;
                e.1 += d as u64;
            }
            // Compare mean distances s1/n1 < s2/n2 as s1·n2 < s2·n1.
            votes
                .into_iter()
                .min_by(|(l1, (n1, s1)), (l2, (n2, s2))| {
                    n2.cmp(n1)
                        .then((*s1 * *n2 as u64).cmp(&(*s2 * *n1 as u64)))
                        .then(l1.cmp(l2))
                })
                .map(|(l, _)| l)
                .expect("k >= 1")
        })
        .collect())
}

/// How many generated rows [`knn_classify`] assigns to each prototype class.
/// Every prototype class appears, possibly with count 0.
pub fn class_histogram(generated: &BinaryBatch, prototypes: &BinaryBatch, k: usize) -> Result<BTreeMap<usize, usize>> {
    if generated.is_empty() {
        return Err(Error::EmptyBatch("generated samples"));
    }
    let assigned = knn_classify(prototypes, generated, k)?;
    let mut hist: BTreeMap<usize, usize> = prototypes.classes().into_iter().map(|c| (c, 0)).collect();
    for c in assigned {
        *hist.entry(c).or_insert(0) += 1;
    }
    Ok(hist)
}
