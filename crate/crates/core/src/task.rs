//! Tasks, jobs and the identifiers that name them.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::resources::ResourceVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TaskId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct JobId(pub u32);

/// Names a workload class. Co-location throughput is learned per workload, not per task.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WorkloadId(pub String);

impl WorkloadId {
    pub fn new(id: impl Into<String>) -> Self {
        WorkloadId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for TaskId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t{}", self.0)
    }
}

impl fmt::Display for JobId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "j{}", self.0)
    }
}

impl fmt::Display for WorkloadId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Task {
    pub id: TaskId,
    pub job_id: JobId,
    pub workload_id: WorkloadId,
    pub demand: ResourceVector,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Job {
    pub id: JobId,
    pub tasks: Vec<Task>,
    /// Seconds since the simulation epoch.
    pub arrival_time: f64,
    /// Standalone hours: running time at normalized throughput 1.0.
    pub work: f64,
}

impl Job {
    pub fn new(id: JobId, tasks: Vec<Task>, arrival_time: f64, work: f64) -> Result<Self> {
        if tasks.is_empty() {
            return Err(Error::InvalidInput(format!("job {id} has no tasks")));
        }
        if let Some(t) = tasks.iter().find(|t| t.job_id != id) {
            return Err(Error::InvalidInput(format!(
                "task {} carries job {} but belongs to {id}",
                t.id, t.job_id
            )));
        }
        if !(work > 0.0) || !work.is_finite() {
            return Err(Error::InvalidInput(format!(
                "job {id}: work must be positive, got {work}"
            )));
        }
        if !(arrival_time >= 0.0) || !arrival_time.is_finite() {
            return Err(Error::InvalidInput(format!(
                "job {id}: bad arrival time {arrival_time}"
            )));
        }
        Ok(Job {
            id,
            tasks,
            arrival_time,
            work,
        })
    }

    pub fn is_multi_task(&self) -> bool {
        self.tasks.len() > 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn task(id: u32, job: u32) -> Task {
        Task {
            id: TaskId(id),
            job_id: JobId(job),
            workload_id: WorkloadId::new("w"),
            demand: ResourceVector::whole(0, 1, 1),
        }
    }

    #[test]
    fn job_invariants() {
        assert!(Job::new(JobId(1), vec![], 0.0, 1.0).is_err());
        assert!(Job::new(JobId(1), vec![task(1, 2)], 0.0, 1.0).is_err());
        assert!(Job::new(JobId(1), vec![task(1, 1)], 0.0, 0.0).is_err());
        let j = Job::new(JobId(1), vec![task(1, 1), task(2, 1)], 5.0, 1.0).unwrap();
        assert!(j.is_multi_task());
    }
}
