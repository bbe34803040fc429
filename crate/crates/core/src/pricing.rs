//! Reservation prices and their throughput-normalized variants.
//!
//! The reservation price of a task is the hourly cost of the cheapest instance type that can host
//! it alone. A set of tasks is worth hosting on an instance when the sum of their (throughput
//! normalized) reservation prices covers the instance's hourly cost.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::catalog::{Catalog, InstanceType, InstanceTypeId};
use crate::error::{Error, Result};
use crate::task::{Job, JobId, Task, TaskId};

/// Absolute slack for cost comparisons so that sums like 12 + 0.8 compare equal to 12.8.
pub const COST_EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PricedTask {
    pub task: Task,
    pub reservation_price: f64,
    /// The type that sets the reservation price.
    pub rp_type: InstanceTypeId,
}

impl PricedTask {
    pub fn new(task: Task, catalog: &Catalog) -> Result<Self> {
        let ty = catalog
            .cheapest_fitting(&task.demand)
            .ok_or(Error::InfeasibleTask(task.id))?;
        Ok(PricedTask {
            rp_type: ty.id.clone(),
            reservation_price: ty.hourly_cost,
            task,
        })
    }

    pub fn id(&self) -> TaskId {
        self.task.id
    }
}

pub fn reservation_price(task: &Task, catalog: &Catalog) -> Result<f64> {
    catalog
        .cheapest_fitting(&task.demand)
        .map(|t| t.hourly_cost)
        .ok_or(Error::InfeasibleTask(task.id))
}

pub fn rp_sum<'a>(tasks: impl IntoIterator<Item = &'a PricedTask>) -> f64 {
    tasks.into_iter().map(|t| t.reservation_price).sum()
}

fn check_tput(tput: f64) -> Result<()> {
    if tput > 0.0 && tput <= 1.0 {
        Ok(())
    } else {
        Err(Error::ThroughputOutOfRange(tput))
    }
}

pub fn tnrp_single(task: &PricedTask, tput: f64) -> Result<f64> {
    check_tput(tput)?;
    Ok(tput * task.reservation_price)
}

/// Multi-task form: the task's reservation price minus the degradation its throughput inflicts on
/// every task of its job, itself included. Can be negative.
pub fn tnrp_multitask(
    task: &PricedTask,
    job: &Job,
    priced_job_tasks: &[PricedTask],
    tput: f64,
) -> Result<f64> {
    check_tput(tput)?;
    if task.task.job_id != job.id || !job.tasks.iter().any(|t| t.id == task.id()) {
        return Err(Error::InvalidInput(format!(
            "task {} is not part of job {}",
            task.id(),
            job.id
        )));
    }
    let job_rp: f64 = priced_job_tasks
        .iter()
        .filter(|p| p.task.job_id == job.id)
        .map(|p| p.reservation_price)
        .sum();
    Ok(multitask_value(task.reservation_price, job_rp, tput))
}

#[inline]
pub(crate) fn multitask_value(rp: f64, job_rp_sum: f64, tput: f64) -> f64 {
    rp - (1.0 - tput) * job_rp_sum
}

/// What a job contributes to the multi-task pricing formula.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JobPricing {
    pub num_tasks: usize,
    pub rp_sum: f64,
}

/// Per-job pricing summaries, keyed by job.
pub type JobIndex = HashMap<JobId, JobPricing>;

pub fn job_index<'a>(tasks: impl IntoIterator<Item = &'a PricedTask>) -> JobIndex {
    let mut idx = JobIndex::new();
    for p in tasks {
        let e = idx.entry(p.task.job_id).or_insert(JobPricing {
            num_tasks: 0,
            rp_sum: 0.0,
        });
        e.num_tasks += 1;
        e.rp_sum += p.reservation_price;
    }
    idx
}

/// How co-location throughput enters a task's price.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PricingMode {
    /// Plain reservation price; throughput ignored.
    Rp,
    /// Throughput-normalized, treating every task as its own job.
    TnrpSingle,
    /// Throughput-normalized with the whole-job charge for multi-task jobs.
    Tnrp,
}

impl PricingMode {
    /// Price of one task at throughput `tput`, given its job summary.
    #[inline]
    pub fn task_value(self, rp: f64, job: JobPricing, tput: f64) -> f64 {
        match self {
            PricingMode::Rp => rp,
            PricingMode::TnrpSingle => tput * rp,
            PricingMode::Tnrp if job.num_tasks > 1 => multitask_value(rp, job.rp_sum, tput),
            PricingMode::Tnrp => tput * rp,
        }
    }

    pub fn uses_throughput(self) -> bool {
        self != PricingMode::Rp
    }
}

/// Sum of per-task throughput-normalized prices. Multi-task jobs use the whole-job charge.
pub fn tnrp_set(
    tasks: &[&PricedTask],
    throughputs: &HashMap<TaskId, f64>,
    jobs: &JobIndex,
) -> Result<f64> {
    let mut total = 0.0;
    for p in tasks {
        let tput = *throughputs
            .get(&p.id())
            .ok_or(Error::MissingThroughput(p.id()))?;
        check_tput(tput)?;
        let job = *jobs
            .get(&p.task.job_id)
            .ok_or(Error::UnknownJob(p.task.job_id))?;
        total += PricingMode::Tnrp.task_value(p.reservation_price, job, tput);
    }
    Ok(total)
}

/// Whether hosting `tasks` on `instance_type` pays for the instance (ties accepted).
pub fn is_cost_efficient(
    tasks: &[&PricedTask],
    instance_type: &InstanceType,
    throughputs: &HashMap<TaskId, f64>,
    jobs: &JobIndex,
) -> Result<bool> {
    Ok(tnrp_set(tasks, throughputs, jobs)? >= instance_type.hourly_cost - COST_EPSILON)
}
