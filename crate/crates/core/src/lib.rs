//! Topographic mixture network with partitioned-mixture posteriors and
//! leaky reconstruction, plus the data, training and analysis tools around it.
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! at the bottom fix the common choice.

pub mod analysis;
pub mod checkpoint;
pub mod config;
pub mod data;
pub mod error;
pub mod experiment;
pub mod network;
pub mod objective;
pub mod oracle;
pub mod posterior;
pub mod scalar;
pub mod topology;
pub mod trainer;

pub use config::{DataConfig, ExperimentConfig};
pub use error::{Error, Result};
pub use network::{raw_response, InitScheme, NetworkParams, Sample};
pub use objective::{
    batch_gradients, batch_objective, sample_gradients, sample_objective, GradientSet,
};
pub use posterior::{pmd_posterior, posterior_from_raw, PosteriorState};
pub use scalar::Scalar;
pub use topology::{Dims, Topology, TopologySpec};
pub use trainer::{train, train_step, Phase, Schedule, TraceEntry, TrainReport, TrainerState};

pub type Topology64 = Topology<f64>;
pub type Params64 = NetworkParams<f64>;
pub type Sample64 = Sample<f64>;
pub type Topology32 = Topology<f32>;
pub type Params32 = NetworkParams<f32>;
pub type Sample32 = Sample<f32>;
