use thiserror::Error;

use crate::job::JobId;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("job {0} never completes: its speed is zero from the given time onward")]
    NeverCompletes(JobId),
    #[error("work {work} does not fit in an interval of length {length}")]
    InfeasibleInInterval { length: String, work: String },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("trace is incomplete: job {0} never finished")]
    IncompleteTrace(JobId),
    #[error("simulation horizon exceeded: {0}")]
    Horizon(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("infeasible at resolution {0}")]
    InfeasibleAtResolution(usize),
    #[error("rejection budget exhausted after {attempts} attempts")]
    RejectionBudget { attempts: usize },
    #[error("target stretch {target} unreachable within search budget; best stretch found {best}")]
    SearchBudget { target: String, best: String },
    #[error("cannot parse number {0:?}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
