use thiserror::Error;

use crate::catalog::InstanceTypeId;
use crate::task::{JobId, TaskId};

#[derive(Debug, Error)]
pub enum Error {
    #[error("infeasible task {0}: no instance type in the catalog fits its demand")]
    InfeasibleTask(TaskId),

    #[error("tasks do not fit instance type {0}")]
    CapacityExceeded(InstanceTypeId),

    #[error("normalized throughput {0} outside (0, 1]")]
    ThroughputOutOfRange(f64),

    #[error("no throughput entry for task {0}")]
    MissingThroughput(TaskId),

    #[error("unknown job {0}")]
    UnknownJob(JobId),

    #[error("decision model is cold: no rate or trigger-probability estimate yet")]
    ColdModel,

    #[error("exact search refused: {tasks} tasks exceeds the cap of {cap}")]
    OracleCapExceeded { tasks: usize, cap: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("malformed {what} at line {line}: {reason}")]
    Parse {
        what: &'static str,
        line: usize,
        reason: String,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
