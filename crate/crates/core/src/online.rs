//! Streaming trainers: online CD with generative replay and the two
//! experience-replay baselines.
//!
//! All three share one loop: observed points accumulate into a pending batch
//! `B_t`; once it holds `batch_size` points an update procedure runs CD for
//! `epochs` epochs on `B_t ∪ B̂_t`. Only the origin of the replay rows `B̂_t`
//! differs:
//!
//! * [`TrainerKind::Ocdgr`] samples them from the current model with short
//!   Gibbs chains started at uniform random hidden states. Nothing observed is
//!   kept, so the live state is constant in size.
//! * [`TrainerKind::ErMl`] draws them from a FIFO memory sized to hold about as
//!   many scalars as the model parameters.
//! * [`TrainerKind::ErIm`] draws them from a memory holding every observation.

use std::collections::VecDeque;
use std::time::Instant;

use ndarray::{Array1, Array2, ArrayView1};
use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{cd_epochs, UpdateState};
use crate::rbm::{hidden_probs_batch, init_params, sample_matrix, visible_probs_batch, BinaryBatch, Hyperparameters, RbmParameters};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrainerKind {
    Ocdgr,
    ErMl,
    ErIm,
}

impl TrainerKind {
    pub const ALL: [TrainerKind; 3] = [TrainerKind::Ocdgr, TrainerKind::ErMl, TrainerKind::ErIm];

    pub fn name(self) -> &'static str {
        match self {
            TrainerKind::Ocdgr => "ocdgr",
            TrainerKind::ErMl => "er_ml",
            TrainerKind::ErIm => "er_im",
        }
    }
}

impl std::fmt::Display for TrainerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for TrainerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ocdgr" => Ok(TrainerKind::Ocdgr),
            "er_ml" | "er-ml" => Ok(TrainerKind::ErMl),
            "er_im" | "er-im" => Ok(TrainerKind::ErIm),
            other => Err(Error::Config(format!("unknown trainer {other:?} (ocdgr, er_ml, er_im)"))),
        }
    }
}

/// How a stored observation is charged against the ER-ML memory budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum MemoryAccounting {
    /// One scalar per visible unit, like one model parameter.
    #[default]
    Scalar,
    /// One bit per visible unit: 64 times as many rows fit.
    BitPacked,
}

/// Rows of memory an ER-ML learner may keep so that its buffer holds as many
/// scalars as an `n_v × n_h` model has parameters: `⌊(n_v·n_h + n_v + n_h) / n_v⌋`.
pub fn er_ml_capacity(n_visible: usize, n_hidden: usize) -> usize {
    (n_visible * n_hidden + n_visible + n_hidden) / n_visible
}

pub fn er_ml_capacity_with(n_visible: usize, n_hidden: usize, accounting: MemoryAccounting) -> usize {
    match accounting {
        MemoryAccounting::Scalar => er_ml_capacity(n_visible, n_hidden),
        MemoryAccounting::BitPacked => 64 * er_ml_capacity(n_visible, n_hidden),
    }
}

/// FIFO store of past observations, optionally bounded.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplayMemory {
    buffer: VecDeque<Array1<f64>>,
    capacity: Option<usize>,
}

impl ReplayMemory {
    pub fn bounded(capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::Config("replay memory capacity must be positive".into()));
        }
        Ok(Self {
            buffer: VecDeque::with_capacity(capacity),
            capacity: Some(capacity),
        })
    }

    pub fn unbounded() -> Self {
        Self {
            buffer: VecDeque::new(),
            capacity: None,
        }
    }

    pub fn capacity(&self) -> Option<usize> {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.buffer.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buffer.is_empty()
    }

    /// Store `row`, evicting the oldest entry when full.
    pub fn insert(&mut self, row: ArrayView1<'_, f64>) {
        if self.capacity == Some(self.buffer.len()) {
            self.buffer.pop_front();
        }
        self.buffer.push_back(row.to_owned());
    }

    /// Oldest first.
    pub fn iter(&self) -> impl Iterator<Item = &Array1<f64>> {
        self.buffer.iter()
    }

    /// `min(n, len)` stored rows chosen uniformly without replacement.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, n_visible: usize, rng: &mut R) -> BinaryBatch {
        let amount = n.min(self.buffer.len());
        if amount == 0 {
            return BinaryBatch::empty(n_visible);
        }
        let picks = index::sample(rng, self.buffer.len(), amount);
        let mut rows = Array2::zeros((amount, n_visible));
        for (mut dst, i) in rows.outer_iter_mut().zip(picks) {
            dst.assign(&self.buffer[i]);
        }
        BinaryBatch::new(rows, None).expect("memory holds binary rows")
    }

    pub fn scalar_count(&self) -> usize {
        self.buffer.iter().map(|r| r.len()).sum()
    }
}

/// Everything a trainer carries between observations.
#[derive(Debug, Clone, PartialEq)]
pub struct OnlineTrainerState {
    pub params: RbmParameters,
    pub update_state: UpdateState,
    /// Observations collected since the last update procedure (`B_t`).
    pub pending: BinaryBatch,
    /// Index of the next update procedure, starting at 1.
    pub t: usize,
    pub observed_count: usize,
}

impl OnlineTrainerState {
    pub fn new(params: RbmParameters) -> Self {
        let (n_v, n_h) = (params.n_visible(), params.n_hidden());
        Self {
            params,
            update_state: UpdateState::new(n_v, n_h),
            pending: BinaryBatch::empty(n_v),
            t: 1,
            observed_count: 0,
        }
    }
}

/// Scalars held by a trainer outside its transient batch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemoryFootprint {
    /// Parameters plus the momentum buffer.
    pub parameter_scalars: usize,
    pub replay_rows: usize,
    pub replay_scalars: usize,
}

impl MemoryFootprint {
    pub fn total_scalars(&self) -> usize {
        self.parameter_scalars + self.replay_scalars
    }
}

/// `count` visible samples, each from its own Gibbs chain of `gibbs_steps`
/// steps started at `h ~ U(0, 1)^{n_h}`.
///
/// The chains advance together as `count × n` matrices; every draw comes from
/// `rng` in row-major order, starting hidden states first. Each step draws
/// `v` and then `h`, as [`gibbs_from_hidden`](crate::rbm::gibbs_from_hidden) does.
pub fn generate_replay<R: Rng + ?Sized>(
    params: &RbmParameters,
    count: usize,
    gibbs_steps: usize,
    rng: &mut R,
) -> Result<BinaryBatch> {
    if gibbs_steps == 0 {
        return Err(Error::Config("Gibbs chain needs at least one step".into()));
    }
    let mut h = Array2::from_shape_simple_fn((count, params.n_hidden()), || rng.random::<f64>());
    let mut v = Array2::zeros((count, params.n_visible()));
    for _ in 0..gibbs_steps {
        v = sample_matrix(&visible_probs_batch(params, h.view())?, rng);
        h = sample_matrix(&hidden_probs_batch(params, v.view())?, rng);
    }
    BinaryBatch::new(v, None)
}

fn run_procedure<R: Rng + ?Sized>(
    mut state: OnlineTrainerState,
    replay: &BinaryBatch,
    hyper: &Hyperparameters,
    rng: &mut R,
) -> Result<OnlineTrainerState> {
    let batch = state.pending.concat(replay)?.without_labels();
    let (params, update_state) = cd_epochs(state.params, state.update_state, &batch, hyper, rng)?;
    state.params = params;
    state.update_state = update_state;
    state.pending.clear();
    state.t += 1;
    Ok(state)
}

/// One generative-replay update procedure on the pending batch.
///
/// From the second procedure on, `replay_size` rows are generated from the
/// current parameters and trained on together with the pending batch. The
/// result depends only on the parameters, momentum buffer, pending batch and
/// generator state. An empty pending batch leaves the state unchanged.
pub fn ocdgr_update_procedure<R: Rng + ?Sized>(
    state: OnlineTrainerState,
    hyper: &Hyperparameters,
    rng: &mut R,
) -> Result<OnlineTrainerState> {
    if state.pending.is_empty() {
        return Ok(state);
    }
    let replay = if state.t > 1 && hyper.replay_size > 0 {
        generate_replay(&state.params, hyper.replay_size, hyper.gibbs_steps, rng)?
    } else {
        BinaryBatch::empty(state.params.n_visible())
    };
    run_procedure(state, &replay, hyper, rng)
}

/// One experience-replay update procedure: replay rows come from `memory`,
/// and the pending observations are stored afterwards.
pub fn er_update_procedure<R: Rng + ?Sized>(
    state: OnlineTrainerState,
    mut memory: ReplayMemory,
    hyper: &Hyperparameters,
    rng: &mut R,
) -> Result<(OnlineTrainerState, ReplayMemory)> {
    if state.pending.is_empty() {
        return Ok((state, memory));
    }
    let replay = memory.sample(hyper.replay_size, state.params.n_visible(), rng);
    let observed = state.pending.clone();
    let state = run_procedure(state, &replay, hyper, rng)?;
    for row in observed.rows().outer_iter() {
        memory.insert(row);
    }
    Ok((state, memory))
}

/// Push-based driver that owns one trainer's state.
#[derive(Debug, Clone)]
pub struct OnlineTrainer {
    kind: TrainerKind,
    hyper: Hyperparameters,
    state: Option<OnlineTrainerState>,
    memory: Option<ReplayMemory>,
}

impl OnlineTrainer {
    pub fn new(
        kind: TrainerKind,
        params: RbmParameters,
        hyper: Hyperparameters,
        accounting: MemoryAccounting,
    ) -> Result<Self> {
        hyper.validate()?;
        if params.n_visible() != hyper.n_visible || params.n_hidden() != hyper.n_hidden {
            return Err(Error::Config(format!(
                "parameters are {}×{} but hyperparameters say {}×{}",
                params.n_visible(),
                params.n_hidden(),
                hyper.n_visible,
                hyper.n_hidden
            )));
        }
        let memory = match kind {
            TrainerKind::Ocdgr => None,
            TrainerKind::ErMl => Some(ReplayMemory::bounded(er_ml_capacity_with(
                hyper.n_visible,
                hyper.n_hidden,
                accounting,
            ))?),
            TrainerKind::ErIm => Some(ReplayMemory::unbounded()),
        };
        Ok(Self {
            kind,
            hyper,
            state: Some(OnlineTrainerState::new(params)),
            memory,
        })
    }

    pub fn kind(&self) -> TrainerKind {
        self.kind
    }

    pub fn hyper(&self) -> &Hyperparameters {
        &self.hyper
    }

    pub fn state(&self) -> &OnlineTrainerState {
        self.state.as_ref().expect("state present between calls")
    }

    pub fn params(&self) -> &RbmParameters {
        &self.state().params
    }

    pub fn memory(&self) -> Option<&ReplayMemory> {
        self.memory.as_ref()
    }

    /// Replace the trainer state, e.g. to resume from a snapshot.
    pub fn set_state(&mut self, state: OnlineTrainerState) {
        self.state = Some(state);
    }

    pub fn footprint(&self) -> MemoryFootprint {
        let state = self.state();
        MemoryFootprint {
            parameter_scalars: state.params.scalar_count() + state.update_state.delta.scalar_count(),
            replay_rows: self.memory.as_ref().map_or(0, ReplayMemory::len),
            replay_scalars: self.memory.as_ref().map_or(0, ReplayMemory::scalar_count),
        }
    }

    /// Record one observation; runs an update procedure once `batch_size`
    /// points are pending. Returns whether an update ran.
    pub fn observe<R: Rng + ?Sized>(&mut self, row: ArrayView1<'_, f64>, rng: &mut R) -> Result<bool> {
        let state = self.state.as_mut().expect("state present between calls");
        state.pending.push(row, None)?;
        state.observed_count += 1;
        if state.pending.len() >= self.hyper.batch_size {
            self.update(rng)?;
            Ok(true)
        } else {
            Ok(false)
        }
    }

    /// Run one last update on a partial pending batch, if any.
    pub fn flush<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<bool> {
        if self.state().pending.is_empty() {
            return Ok(false);
        }
        self.update(rng)?;
        Ok(true)
    }

    fn update<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<()> {
        let state = self.state.take().expect("state present between calls");
        let next = match self.kind {
            TrainerKind::Ocdgr => ocdgr_update_procedure(state, &self.hyper, rng)?,
            TrainerKind::ErMl | TrainerKind::ErIm => {
                let memory = self.memory.take().expect("ER trainers own a memory");
                let (next, memory) = er_update_procedure(state, memory, &self.hyper, rng)?;
                self.memory = Some(memory);
                next
            }
        };
        self.state = Some(next);
        Ok(())
    }
}

/// Parameters captured during a streaming run.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub observed_count: usize,
    pub procedures: usize,
    pub params: RbmParameters,
    pub footprint: MemoryFootprint,
    /// Training time from the start of the stream, in milliseconds.
    pub wall_ms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StreamOutcome {
    pub params: RbmParameters,
    pub checkpoints: Vec<Checkpoint>,
    /// Footprint after each update procedure, in order.
    pub procedure_footprints: Vec<MemoryFootprint>,
    pub observed_count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StreamOptions {
    pub checkpoint_every: usize,
    pub accounting: MemoryAccounting,
}

impl Default for StreamOptions {
    fn default() -> Self {
        Self {
            checkpoint_every: 1_000,
            accounting: MemoryAccounting::Scalar,
        }
    }
}

/// Initialize parameters from `hyper.init_std` and feed `stream` once, in
/// order. A snapshot is taken after every `checkpoint_every` observations; a
/// trailing partial batch gets one final update.
pub fn stream_train<R: Rng + ?Sized>(
    kind: TrainerKind,
    stream: &BinaryBatch,
    hyper: &Hyperparameters,
    options: &StreamOptions,
    rng: &mut R,
) -> Result<StreamOutcome> {
    let params = init_params(hyper.n_visible, hyper.n_hidden, hyper.init_std, rng)?;
    stream_train_from(kind, params, stream, hyper, options, rng)
}

/// [`stream_train`] from given initial parameters.
pub fn stream_train_from<R: Rng + ?Sized>(
    kind: TrainerKind,
    params: RbmParameters,
    stream: &BinaryBatch,
    hyper: &Hyperparameters,
    options: &StreamOptions,
    rng: &mut R,
) -> Result<StreamOutcome> {
    if options.checkpoint_every == 0 {
        return Err(Error::Config("checkpoint_every must be positive".into()));
    }
    if stream.n_visible() != hyper.n_visible {
        return Err(Error::dim("stream width", hyper.n_visible, stream.n_visible()));
    }
    let started = Instant::now();
    let mut trainer = OnlineTrainer::new(kind, params, hyper.clone(), options.accounting)?;
    let mut checkpoints = Vec::new();
    let mut procedure_footprints = Vec::new();
    for row in stream.rows().outer_iter() {
        if trainer.observe(row, rng)? {
            procedure_footprints.push(trainer.footprint());
        }
        let seen = trainer.state().observed_count;
        if seen % options.checkpoint_every == 0 {
            checkpoints.push(Checkpoint {
                observed_count: seen,
                procedures: trainer.state().t - 1,
                params: trainer.params().clone(),
                footprint: trainer.footprint(),
                wall_ms: started.elapsed().as_secs_f64() * 1e3,
            });
        }
    }
    if trainer.flush(rng)? {
        procedure_footprints.push(trainer.footprint());
    }
    Ok(StreamOutcome {
        params: trainer.params().clone(),
        checkpoints,
        procedure_footprints,
        observed_count: trainer.state().observed_count,
    })
}
