//! Seeded experiment runner: builds a problem and optimizer from a [`RunConfig`],
//! records a trace, and summarizes or compares runs.

mod compare;
mod config;
mod experiment;
mod summary;

use thiserror::Error;

use crate::error::OptimError;
use crate::trace::TraceError;

pub use compare::{compare_runs, CompareFile, ComparisonRow, ComparisonTable};
pub use config::{OptimizerKind, PolicyName, ProblemKind, RunConfig};
pub use experiment::{build_problem, run_experiment, ExperimentResult, Problem};
pub use summary::{summarize, RunSummary};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error("optimizer failed at step {step}: {source}")]
    Optimizer {
        step: usize,
        #[source]
        source: OptimError,
    },
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl HarnessError {
    /// Process exit code: 2 for configuration problems, 3 for optimizer failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 2,
            HarnessError::Optimizer { .. } => 3,
            HarnessError::Trace(_) | HarnessError::Io(_) => 1,
        }
    }
}
