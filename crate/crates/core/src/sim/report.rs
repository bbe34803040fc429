//! The machine-readable result of one simulation run.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Allocation {
    pub gpu: f64,
    pub cpu: f64,
    pub ram: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobRecord {
    pub job_id: u32,
    pub num_tasks: usize,
    pub workload_id: String,
    pub arrival_s: f64,
    pub completion_s: f64,
    pub work_hours: f64,
    pub jct_hours: f64,
    /// Hours between arrival and completion during which the job made no progress.
    pub idle_hours: f64,
    pub migrations: u32,
}

/// One instance's lifetime. Billing runs from `launch_s` to `end_s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceRecord {
    pub instance_id: u32,
    pub type_id: String,
    pub hourly_cost: f64,
    pub launch_s: f64,
    pub ready_s: f64,
    pub end_s: f64,
}

impl InstanceRecord {
    pub fn cost(&self) -> f64 {
        (self.end_s - self.launch_s) / 3600.0 * self.hourly_cost
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimReport {
    pub schema_version: u32,
    pub scheduler: String,
    pub seed: u64,
    pub period_s: f64,
    /// Dollars.
    pub total_cost: f64,
    /// Total cost over the No-Packing total cost on the same inputs, when that was run.
    pub normalized_cost: Option<f64>,
    pub makespan_hours: f64,
    pub jobs_completed: usize,
    /// Jobs dropped because no instance type fits their tasks.
    pub skipped_jobs: Vec<u32>,
    pub mean_jct_hours: f64,
    pub mean_idle_hours: f64,
    /// Time-integrated allocated demand over time-integrated capacity, per resource.
    pub avg_allocation: Allocation,
    /// Time-weighted mean of assigned tasks per running instance.
    pub tasks_per_instance: f64,
    pub migrations_per_task: f64,
    pub instances_launched: usize,
    /// Share of scheduling periods whose decision was a Full Reconfiguration; absent for
    /// schedulers that make no such choice.
    pub full_adoption_fraction: Option<f64>,
    pub jobs: Vec<JobRecord>,
    pub instances: Vec<InstanceRecord>,
}

impl SimReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let r: SimReport = serde_json::from_str(s)?;
        if r.schema_version != REPORT_SCHEMA_VERSION {
            return Err(Error::InvalidInput(format!(
                "unsupported report schema version {}",
                r.schema_version
            )));
        }
        Ok(r)
    }

    /// Cost recomputed from the instance log alone.
    pub fn cost_from_instance_log(&self) -> f64 {
        self.instances.iter().map(InstanceRecord::cost).sum()
    }
}
