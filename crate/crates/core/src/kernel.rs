//! Contrastive divergence statistics and the momentum / weight-decay update
//! shared by offline training, generative replay and the experience-replay
//! baselines.

use ndarray::{Array1, Array2, ArrayView2, Axis, Zip};
use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::rbm::{
    hidden_probs_batch, sample_matrix, visible_probs_batch, BinaryBatch, Hyperparameters,
    RbmParameters, WarmupScope,
};

/// Summed (not averaged) sufficient statistics `Σ h vᵀ`, `Σ v`, `Σ h`.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientStatistics {
    pub weight_stat: Array2<f64>,
    pub visible_stat: Array1<f64>,
    pub hidden_stat: Array1<f64>,
}

impl GradientStatistics {
    /// Statistics of paired visible rows `v` (`rows × n_v`) and hidden rows `h` (`rows × n_h`).
    pub fn from_rows(v: ArrayView2<'_, f64>, h: ArrayView2<'_, f64>) -> Self {
        Self {
            weight_stat: h.t().dot(&v),
            visible_stat: v.sum_axis(Axis(0)),
            hidden_stat: h.sum_axis(Axis(0)),
        }
    }

    pub fn zeros(n_visible: usize, n_hidden: usize) -> Self {
        Self {
            weight_stat: Array2::zeros((n_hidden, n_visible)),
            visible_stat: Array1::zeros(n_visible),
            hidden_stat: Array1::zeros(n_hidden),
        }
    }
}

/// Momentum buffer carried between updates, plus the number of epochs run.
#[derive(Debug, Clone, PartialEq)]
pub struct UpdateState {
    pub delta: RbmParameters,
    pub epoch_index: usize,
}

impl UpdateState {
    pub fn new(n_visible: usize, n_hidden: usize) -> Self {
        Self {
            delta: RbmParameters::zeros(n_visible, n_hidden),
            epoch_index: 0,
        }
    }
}

/// Scalars of one parameter step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateRule {
    pub learning_rate: f64,
    pub momentum: f64,
    pub weight_decay: f64,
    pub decay_biases: bool,
}

impl UpdateRule {
    pub fn from_hyper(hyper: &Hyperparameters, momentum: f64) -> Self {
        Self {
            learning_rate: hyper.learning_rate,
            momentum,
            weight_decay: hyper.weight_decay,
            decay_biases: hyper.decay_biases,
        }
    }
}

/// Data-side statistics with hidden probabilities `H = P(h = 1 | V)`.
///
/// Returns the statistics and `H` itself, which seeds the negative chain.
pub fn positive_statistics(params: &RbmParameters, data: &BinaryBatch) -> Result<(GradientStatistics, Array2<f64>)> {
    if data.is_empty() {
        return Err(Error::EmptyBatch("positive phase needs at least one row"));
    }
    let h = hidden_probs_batch(params, data.rows())?;
    Ok((GradientStatistics::from_rows(data.rows(), h.view()), h))
}

/// Model-side statistics from an `n_cd`-step Gibbs chain started at the data.
///
/// The chain samples `h⁰ ~ H0_probs`, then alternates `v^k ~ P(v | h^{k-1})`,
/// `h^k ~ P(h | v^k)`. Statistics use the sampled `v^{n_cd}` and the hidden
/// probabilities `P(h = 1 | v^{n_cd})`; the final hidden layer is not sampled.
/// Random draws are consumed alternation by alternation, so a shorter chain
/// on the same generator state is a prefix of a longer one.
pub fn cd_negative_phase<R: Rng + ?Sized>(
    params: &RbmParameters,
    data: &BinaryBatch,
    h0_probs: &Array2<f64>,
    n_cd: usize,
    rng: &mut R,
) -> Result<(GradientStatistics, BinaryBatch)> {
    if n_cd == 0 {
        return Err(Error::Config("n_cd must be at least 1".into()));
    }
    if h0_probs.dim() != (data.len(), params.n_hidden()) {
        return Err(Error::dim("negative-phase hidden rows", data.len(), h0_probs.nrows()));
    }
    if data.n_visible() != params.n_visible() {
        return Err(Error::dim("negative-phase visible width", params.n_visible(), data.n_visible()));
    }
    let mut h = sample_matrix(h0_probs, rng);
    let mut v = Array2::zeros((data.len(), params.n_visible()));
    let mut h_probs = Array2::zeros((data.len(), params.n_hidden()));
    for step in 1..=n_cd {
        v = sample_matrix(&visible_probs_batch(params, h.view())?, rng);
        h_probs = hidden_probs_batch(params, v.view())?;
        if step < n_cd {
            h = sample_matrix(&h_probs, rng);
        }
    }
    let stats = GradientStatistics::from_rows(v.view(), h_probs.view());
    Ok((stats, BinaryBatch::new(v, None)?))
}

/// One momentum step: `Δ ← ρΔ + α[(Ψ⁺ − Ψ⁻)/denom − ξΘ]`, then `Θ ← Θ + Δ`.
///
/// `denom` is the number of rows behind the statistics. Weight decay applies
/// to the biases as well unless `rule.decay_biases` is false.
pub fn apply_update(
    params: &RbmParameters,
    state: &UpdateState,
    positive: &GradientStatistics,
    negative: &GradientStatistics,
    denom: usize,
    rule: &UpdateRule,
) -> Result<(RbmParameters, UpdateState)> {
    if denom == 0 {
        return Err(Error::EmptyBatch("update normalizer is zero"));
    }
    let (n_v, n_h) = (params.n_visible(), params.n_hidden());
    for stats in [positive, negative] {
        if stats.weight_stat.dim() != (n_h, n_v)
            || stats.visible_stat.len() != n_v
            || stats.hidden_stat.len() != n_h
        {
            return Err(Error::dim("gradient statistics", n_h * n_v, stats.weight_stat.len()));
        }
    }
    if state.delta.n_visible() != n_v || state.delta.n_hidden() != n_h {
        return Err(Error::dim("momentum buffer", params.scalar_count(), state.delta.scalar_count()));
    }

    let scale = 1.0 / denom as f64;
    let bias_decay = if rule.decay_biases { rule.weight_decay } else { 0.0 };
    let mut next = params.clone();
    let mut delta = state.delta.clone();
    {
        let (w, a, b) = next.parts_mut();
        let (dw, da, db) = delta.parts_mut();
        Zip::from(w)
            .and(dw)
            .and(&positive.weight_stat)
            .and(&negative.weight_stat)
            .for_each(|x, d, &p, &n| step(x, d, p, n, scale, rule, rule.weight_decay));
        Zip::from(a)
            .and(da)
            .and(&positive.visible_stat)
            .and(&negative.visible_stat)
            .for_each(|x, d, &p, &n| step(x, d, p, n, scale, rule, bias_decay));
        Zip::from(b)
            .and(db)
            .and(&positive.hidden_stat)
            .and(&negative.hidden_stat)
            .for_each(|x, d, &p, &n| step(x, d, p, n, scale, rule, bias_decay));
    }
    if !next.is_finite() || !delta.is_finite() {
        return Err(Error::Domain("parameter update produced non-finite values".into()));
    }
    Ok((
        next,
        UpdateState {
            delta,
            epoch_index: state.epoch_index,
        },
    ))
}

#[inline]
fn step(x: &mut f64, d: &mut f64, pos: f64, neg: f64, scale: f64, rule: &UpdateRule, decay: f64) {
    *d = rule.momentum * *d + rule.learning_rate * ((pos - neg) * scale - decay * *x);
    *x += *d;
}

/// Momentum in force at 1-based `epoch_index`: the warmup value for the first
/// `momentum_warmup_epochs` epochs, the main value afterwards.
pub fn effective_momentum(epoch_index: usize, hyper: &Hyperparameters) -> f64 {
    if epoch_index <= hyper.momentum_warmup_epochs {
        hyper.warmup_momentum
    } else {
        hyper.momentum
    }
}

/// `hyper.epochs` CD epochs over one fixed batch, as in a single online update
/// procedure. Every online trainer funnels through here.
pub(crate) fn cd_epochs<R: Rng + ?Sized>(
    mut params: RbmParameters,
    mut state: UpdateState,
    batch: &BinaryBatch,
    hyper: &Hyperparameters,
    rng: &mut R,
) -> Result<(RbmParameters, UpdateState)> {
    for epoch in 1..=hyper.epochs {
        state.epoch_index += 1;
        let counter = match hyper.warmup_scope {
            WarmupScope::PerProcedure => epoch,
            WarmupScope::Global => state.epoch_index,
        };
        let rule = UpdateRule::from_hyper(hyper, effective_momentum(counter, hyper));
        let (positive, h0) = positive_statistics(&params, batch)?;
        let (negative, _) = cd_negative_phase(&params, batch, &h0, hyper.cd_steps, rng)?;
        (params, state) = apply_update(&params, &state, &positive, &negative, batch.len(), &rule)?;
    }
    Ok((params, state))
}

/// Standard offline CD: `hyper.epochs` passes over a reshuffled dataset in
/// minibatches of `hyper.batch_size`, one update per minibatch.
pub fn train_offline<R: Rng + ?Sized>(
    params: &RbmParameters,
    dataset: &BinaryBatch,
    hyper: &Hyperparameters,
    rng: &mut R,
) -> Result<RbmParameters> {
    if dataset.is_empty() {
        return Err(Error::EmptyBatch("offline training needs data"));
    }
    if dataset.n_visible() != params.n_visible() {
        return Err(Error::dim("training data width", params.n_visible(), dataset.n_visible()));
    }
    if hyper.batch_size == 0 || hyper.cd_steps == 0 {
        return Err(Error::Config("batch_size and cd_steps must be at least 1".into()));
    }
    let mut params = params.clone();
    let mut state = UpdateState::new(params.n_visible(), params.n_hidden());
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    for epoch in 1..=hyper.epochs {
        order.shuffle(rng);
        let rule = UpdateRule::from_hyper(hyper, effective_momentum(epoch, hyper));
        for chunk in order.chunks(hyper.batch_size) {
            let batch = dataset.select(chunk);
            let (positive, h0) = positive_statistics(&params, &batch)?;
            let (negative, _) = cd_negative_phase(&params, &batch, &h0, hyper.cd_steps, rng)?;
            (params, state) = apply_update(&params, &state, &positive, &negative, batch.len(), &rule)?;
        }
        state.epoch_index += 1;
    }
    Ok(params)
}
