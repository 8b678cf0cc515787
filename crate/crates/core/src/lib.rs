//! Density-matrix simulation of a noisy quantum neural network regressor,
//! where the strength of amplitude-damping, phase-damping or depolarizing
//! noise is tuned as a regularization hyperparameter.

pub mod channels;
pub mod data;
pub mod density;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod qnn;
pub mod report;
pub mod training;

pub use channels::{ChannelKind, HardwareCoherence, KrausSet, NoiseSpec, Pauli};
pub use density::DensityMatrix;
pub use error::{Error, Result};
pub use qnn::{build_ansatz, AnsatzConfig, GateSpec, QnnModel};
pub use data::{load_diabetes, prepare, PrepareOptions, PreparedDataset, RawDataset, Sample, ScalerParams};
pub use experiments::{
    find_optimum, naive_baseline_losses, run_depth_study, run_noise_map, run_noise_sweep, GammaGrid, NoiseMapResult,
    Optimum, SweepConfig, SweepResult,
};
pub use training::{train, AdamConfig, MetricMode, TrainConfig, TrainingRecord};
