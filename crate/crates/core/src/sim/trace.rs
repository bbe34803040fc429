//! Job traces: synthetic generation and the one-row-per-job CSV format.

use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::resources::ResourceVector;
use crate::task::{Job, JobId, Task, TaskId, WorkloadId};
use crate::workloads::{workload, WORKLOADS};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    /// Sorted by arrival time.
    pub jobs: Vec<Job>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DurationModel {
    Uniform {
        min_hours: f64,
        max_hours: f64,
    },
    /// 10^x minutes, x uniform on [1.5, 3] with probability 0.8 and on [3, 4] otherwise.
    Gavel,
}

impl DurationModel {
    pub fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match *self {
            DurationModel::Uniform {
                min_hours,
                max_hours,
            } => {
                if min_hours == max_hours {
                    min_hours
                } else {
                    rng.random_range(min_hours..max_hours)
                }
            }
            DurationModel::Gavel => {
                let x = if rng.random_bool(0.8) {
                    rng.random_range(1.5..3.0)
                } else {
                    rng.random_range(3.0..4.0)
                };
                10f64.powf(x) / 60.0
            }
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            DurationModel::Uniform {
                min_hours,
                max_hours,
            } if !(min_hours > 0.0 && max_hours >= min_hours && max_hours.is_finite()) => Err(
                Error::InvalidInput(format!("bad duration range [{min_hours}, {max_hours}]")),
            ),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceParams {
    pub num_jobs: usize,
    pub mean_interarrival_s: f64,
    pub duration: DurationModel,
    /// Built-in workload names, sampled uniformly.
    pub workloads: Vec<String>,
    /// Share of jobs that duplicate their task.
    pub multi_task_fraction: f64,
    /// Task counts for multi-task jobs, sampled uniformly.
    pub task_counts: Vec<u32>,
    pub seed: u64,
}

impl Default for TraceParams {
    fn default() -> Self {
        TraceParams {
            num_jobs: 32,
            mean_interarrival_s: 1200.0,
            duration: DurationModel::Uniform {
                min_hours: 0.5,
                max_hours: 3.0,
            },
            workloads: WORKLOADS.iter().map(|w| w.id.to_string()).collect(),
            multi_task_fraction: 0.0,
            task_counts: vec![2, 4],
            seed: 0,
        }
    }
}

impl TraceParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidInput(m));
        if self.num_jobs == 0 {
            return bad("num_jobs must be positive".into());
        }
        if !(self.mean_interarrival_s > 0.0) || !self.mean_interarrival_s.is_finite() {
            return bad(format!(
                "mean inter-arrival must be positive, got {}",
                self.mean_interarrival_s
            ));
        }
        if !(0.0..=1.0).contains(&self.multi_task_fraction) {
            return bad(format!(
                "multi-task fraction must lie in [0, 1], got {}",
                self.multi_task_fraction
            ));
        }
        if self.multi_task_fraction > 0.0
            && (self.task_counts.is_empty() || self.task_counts.iter().any(|&c| c < 2))
        {
            return bad("multi-task jobs need task counts of at least 2".into());
        }
        if self.workloads.is_empty() {
            return bad("empty workload mix".into());
        }
        if let Some(w) = self.workloads.iter().find(|w| workload(w).is_none()) {
            return bad(format!("unknown workload {w:?}"));
        }
        self.duration.validate()
    }
}

/// Poisson arrivals starting after time zero; each job's tasks are identical copies.
pub fn generate_trace(params: &TraceParams) -> Result<Trace> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let gaps = Exp::new(1.0 / params.mean_interarrival_s)
        .map_err(|e| Error::InvalidInput(e.to_string()))?;
    let mut now = 0.0;
    let mut next_task = 0u32;
    let mut jobs = Vec::with_capacity(params.num_jobs);
    for j in 0..params.num_jobs {
        now += gaps.sample(&mut rng);
        let profile = workload(&params.workloads[rng.random_range(0..params.workloads.len())])
            .expect("validated");
        let work = params.duration.sample(&mut rng);
        let n = if params.multi_task_fraction > 0.0 && rng.random_bool(params.multi_task_fraction) {
            params.task_counts[rng.random_range(0..params.task_counts.len())]
        } else {
            1
        };
        let id = JobId(j as u32);
        let tasks = (0..n)
            .map(|k| Task {
                id: TaskId(next_task + k),
                job_id: id,
                workload_id: WorkloadId::new(profile.id),
                demand: profile.demand,
            })
            .collect();
        next_task += n;
        jobs.push(Job::new(id, tasks, now, work)?);
    }
    Ok(Trace { jobs })
}

#[derive(Debug, Serialize, Deserialize)]
struct TraceRow {
    job_id: u32,
    arrival_time_s: f64,
    num_tasks: u32,
    work_hours: f64,
    workload_id: String,
    gpu: u32,
    cpu: u32,
    ram_gb: f64,
}

impl Trace {
    pub fn num_tasks(&self) -> usize {
        self.jobs.iter().map(|j| j.tasks.len()).sum()
    }

    /// Reads one row per job. Task ids are assigned in file order.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut jobs: Vec<Job> = Vec::new();
        let mut next_task = 0u32;
        for (i, row) in rdr.deserialize::<TraceRow>().enumerate() {
            let line = i + 2;
            let bad = |reason: String| Error::Parse {
                what: "trace",
                line,
                reason,
            };
            let row = row.map_err(|e| bad(e.to_string()))?;
            if row.num_tasks == 0 {
                return Err(bad("num_tasks must be positive".into()));
            }
            if jobs.iter().any(|j| j.id.0 == row.job_id) {
                return Err(bad(format!("duplicate job id {}", row.job_id)));
            }
            if jobs
                .last()
                .is_some_and(|j| j.arrival_time > row.arrival_time_s)
            {
                return Err(bad("arrival times must be non-decreasing".into()));
            }
            let demand = ResourceVector::new(row.gpu, row.cpu, row.ram_gb)
                .map_err(|e| bad(e.to_string()))?;
            let id = JobId(row.job_id);
            let tasks = (0..row.num_tasks)
                .map(|k| Task {
                    id: TaskId(next_task + k),
                    job_id: id,
                    workload_id: WorkloadId::new(row.workload_id.clone()),
                    demand,
                })
                .collect();
            next_task += row.num_tasks;
            jobs.push(
                Job::new(id, tasks, row.arrival_time_s, row.work_hours)
                    .map_err(|e| bad(e.to_string()))?,
            );
        }
        Ok(Trace { jobs })
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for j in &self.jobs {
            let t = &j.tasks[0];
            w.serialize(TraceRow {
                job_id: j.id.0,
                arrival_time_s: j.arrival_time,
                num_tasks: j.tasks.len() as u32,
                work_hours: j.work,
                workload_id: t.workload_id.0.clone(),
                gpu: t.demand.gpu() as u32,
                cpu: t.demand.cpu() as u32,
                ram_gb: t.demand.ram_gb(),
            })?;
        }
        w.flush()?;
        Ok(())
    }
}
