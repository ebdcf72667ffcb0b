use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which epoch counter drives the momentum warmup.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum WarmupScope {
    /// Epochs `1..=n_E` inside every update procedure.
    #[default]
    PerProcedure,
    /// Epochs counted over the whole training run.
    Global,
}

/// Training meta-parameters shared by offline CD and the online trainers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Hyperparameters {
    pub n_visible: usize,
    pub n_hidden: usize,
    /// Gibbs steps per generated replay sample (n_Gs).
    pub gibbs_steps: usize,
    /// Contrastive divergence steps (n_CD).
    pub cd_steps: usize,
    /// Epochs per update procedure (n_E); total epochs for offline training.
    pub epochs: usize,
    /// Observed points per update procedure (n_B); minibatch size offline.
    pub batch_size: usize,
    /// Replay points per update procedure (n_B̂).
    pub replay_size: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    pub weight_decay: f64,
    /// Standard deviation of the Gaussian parameter initialization.
    pub init_std: f64,
    pub momentum_warmup_epochs: usize,
    pub warmup_momentum: f64,
    pub warmup_scope: WarmupScope,
    /// When false, weight decay touches only the weight matrix.
    pub decay_biases: bool,
}

impl Default for Hyperparameters {
    fn default() -> Self {
        Self {
            n_visible: 0,
            n_hidden: 0,
            gibbs_steps: 1,
            cd_steps: 1,
            epochs: 10,
            batch_size: 100,
            replay_size: 300,
            learning_rate: 0.05,
            momentum: 0.9,
            weight_decay: 0.0002,
            init_std: 0.01,
            momentum_warmup_epochs: 5,
            warmup_momentum: 0.5,
            warmup_scope: WarmupScope::PerProcedure,
            decay_biases: true,
        }
    }
}

impl Hyperparameters {
    /// Default meta-parameters for an `n_visible × n_hidden` machine.
    pub fn new(n_visible: usize, n_hidden: usize) -> Self {
        Self {
            n_visible,
            n_hidden,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("n_visible", self.n_visible),
            ("n_hidden", self.n_hidden),
            ("gibbs_steps", self.gibbs_steps),
            ("cd_steps", self.cd_steps),
            ("epochs", self.epochs),
            ("batch_size", self.batch_size),
        ];
        for (name, value) in positive {
            if value == 0 {
                return Err(Error::Config(format!("{name} must be at least 1")));
            }
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config("learning_rate must be positive".into()));
        }
        for (name, rho) in [("momentum", self.momentum), ("warmup_momentum", self.warmup_momentum)] {
            if !(0.0..1.0).contains(&rho) {
                return Err(Error::Config(format!("{name} must lie in [0, 1)")));
            }
        }
        if !(self.weight_decay >= 0.0 && self.weight_decay.is_finite()) {
            return Err(Error::Config("weight_decay must be nonnegative".into()));
        }
        if !(self.init_std >= 0.0 && self.init_std.is_finite()) {
            return Err(Error::Config("init_std must be nonnegative".into()));
        }
        Ok(())
    }
}
