//! Forecasting toolkit that tunes epsilon-SVR hyperparameters with the
//! Butterfly Optimization Algorithm (and a handful of baseline
//! metaheuristics) on delay-embedded univariate time series.
//!
//! The modules follow the data flow:
//!
//! - [`phase_space`]: scaling, delay/dimension estimation, embedding, split.
//! - [`svr`]: RBF epsilon-SVR trained by an SMO-type dual solver.
//! - [`optimizers`]: BOA, PSO, GA, ABC, FA and SCA behind [`optimizers::Optimizer`].
//! - [`metrics`]: MSE, MAPE and the Diebold-Mariano test.
//! - [`pipeline`]: calibration runs and multi-algorithm comparisons.

pub mod error;
pub mod metrics;
pub mod optimizers;
pub mod phase_space;
pub mod pipeline;
pub mod svr;

pub use error::{Error, Result};
pub use optimizers::{Algorithm, OptimizationResult, Optimizer, SearchSpace};
pub use phase_space::{EmbeddedDataset, EmbeddingSpec, NormalizationParams, TimeSeries};
pub use pipeline::{CalibrationOutcome, Comparison, ExperimentConfig};
pub use svr::{SvrHyperParams, SvrModel};
