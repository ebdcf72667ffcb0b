//! Online training of binary restricted Boltzmann machines.
//!
//! A model sees a stream of binary vectors once, in batches of `n_B`. To
//! keep earlier parts of the stream, every update procedure after the first
//! mixes `n_B̂` replay rows into the batch. With generative replay the rows
//! come from short Gibbs chains of the model itself, so the learner keeps no
//! data. The two experience-replay baselines sample stored observations:
//! ER-ML from a FIFO buffer the size of the model, ER-IM from everything seen.
//!
//! - [`rbm`]: parameters, energies, conditionals, Gibbs chains, model files.
//! - [`kernel`]: CD-k statistics and the momentum/weight-decay update.
//! - [`online`]: the three stream trainers and their memory accounting.
//! - [`eval`]: exact and annealed-importance-sampling log Z, test
//!   log-probabilities and the k-NN class histogram.
//! - [`data`]: IDX, text and bit-packed cache I/O, the toy generator, stream orders.
//! - [`experiment`]: self-describing train/evaluate/generate/compare runs.
//!
//! Start with the examples, one per capability:
//!
//! ```text
//! cargo run --example gibbs_sampling
//! cargo run --release --example offline_cd
//! cargo run --release --example partition_function
//! cargo run --release --example replay_baselines
//! cargo run --release --example toy_generative_replay
//! cargo run --release --example mnist_stream
//! cargo run --example model_files
//! ```

pub mod data;
pub mod error;
pub mod eval;
pub mod experiment;
pub mod kernel;
pub mod math;
pub mod online;
pub mod rbm;
pub mod reference;
pub mod rng;

pub use error::{Error, Result};
pub use rbm::{BinaryBatch, Hyperparameters, RbmParameters, WarmupScope};
