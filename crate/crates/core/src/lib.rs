//! Private federated learning over a Gaussian multiple-access channel.
//!
//! Clients quantize their gradients with a stochastic multi-level quantizer and
//! add binomial noise before transmitting; the server aggregates and runs SGD.
//! [`allocator`] picks per-client levels and trial counts that meet a privacy
//! budget and the channel capacity region.

pub mod allocator;
pub mod channel;
pub mod config;
pub mod error;
pub mod privacy;
pub mod quantizer;
pub mod rng;
pub mod trainer;
pub mod types;

pub use allocator::{solve_exhaustive, solve_pruned, Allocation, AllocationProblem, SolveReport, Verdict};
pub use channel::{capacity, feasible, rate_of, ChannelConfig, ClientSet, RateVector};
pub use config::{Experiment, ExperimentConfig};
pub use error::{Error, Result};
pub use privacy::{perturb, Accountant, BinomialMechanism, MechanismConstants, PrivacyReport};
pub use quantizer::{quantize_vector, QuantizedVector, QuantizerConfig};
pub use rng::{derive_seed, Purpose, RngSeed};
pub use trainer::{RidgeTask, RoundPlan, RoundRecord, Trainer, TrainerConfig, TrainingRun};
pub use types::{ClientDataset, DataSample, GradientVector, ModelVector};
