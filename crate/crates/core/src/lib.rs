//! Soft-margin RBF support vector machines with a learned kernel width.
//!
//! [`solver`] maximises the SVM dual for a fixed `(C, gamma)`.
//! [`optimizer`] wraps it in an outer gradient-descent loop over `gamma`.
//! [`harness`] runs the synthetic and real-data experiments and writes CSV.

#![allow(clippy::needless_range_loop)]

pub mod dataset;
pub mod error;
pub mod harness;
pub mod kernel;
pub mod metrics;
pub mod model_io;
pub mod optimizer;
pub mod oracle;
pub mod rng;
pub mod solver;

pub use dataset::{Dataset, FoldAssignment, LoadOptions, SyntheticConfig};
pub use error::{Error, Result};
pub use kernel::{DistanceMatrix, KernelCache};
pub use metrics::MetricsRecord;
pub use optimizer::{OksvmConfig, OptimizerState, Termination, TraceEntry};
pub use solver::{SolverConfig, SvmModel};
