//! The event loop.
//!
//! Rates are piecewise constant between events, so progress, idle time, billing and allocation
//! are integrated exactly over each interval. Job completions are not queued; the loop computes
//! the earliest one from the current rates before every step.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};

use serde::{Deserialize, Serialize};

use crate::catalog::{Catalog, InstanceType};
use crate::colocation::{CoLocationTable, Placement};
use crate::config::{ClusterConfiguration, ConfiguredInstance, InstanceId};
use crate::error::{Error, Result};
use crate::pricing::PricedTask;
use crate::resources::{Resource, ResourceVector, NUM_RESOURCES};
use crate::scheduler::{
    Choice, Destination, Scheduler, SchedulerKind, SchedulerParams, SchedulerState, TaskMap,
};
use crate::sim::delays::DelayModel;
use crate::sim::interference::GroundTruthInterference;
use crate::sim::report::{Allocation, InstanceRecord, JobRecord, SimReport, REPORT_SCHEMA_VERSION};
use crate::sim::trace::Trace;
use crate::task::{Job, JobId, Task, TaskId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    JobCompletion,
    InstanceReady,
    TaskRunning,
    JobArrival,
    SchedulingTick,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimEvent {
    pub time: f64,
    pub kind: EventKind,
    /// Job index for arrivals, instance or task id otherwise.
    pub id: u32,
}

impl Eq for SimEvent {}

impl Ord for SimEvent {
    /// Reversed so that `BinaryHeap` pops the earliest event first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then(other.kind.cmp(&self.kind))
            .then(other.id.cmp(&self.id))
    }
}

impl PartialOrd for SimEvent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub scheduler: SchedulerKind,
    pub params: SchedulerParams,
    pub delays: DelayModel,
    /// Recorded in the report. The simulation itself draws no random numbers.
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            scheduler: SchedulerKind::Eva,
            params: SchedulerParams::default(),
            delays: DelayModel::default(),
            seed: 0,
        }
    }
}

/// Per-resource allocated demand over capacity across `config`. `None` when it has no instances;
/// resources with no capacity report 0.
pub fn measure_allocation(config: &ClusterConfiguration, tasks: &TaskMap) -> Option<Allocation> {
    let live: Vec<&ConfiguredInstance> = config
        .instances
        .iter()
        .filter(|i| !i.instance_type.is_ghost())
        .collect();
    if live.is_empty() {
        return None;
    }
    let cap = ResourceVector::sum(live.iter().map(|i| &i.instance_type.capacity));
    let used = ResourceVector::sum(
        live.iter()
            .flat_map(|i| i.tasks.iter())
            .filter_map(|t| tasks.get(t))
            .map(|p| &p.task.demand),
    );
    let ratio = |r| {
        if cap.amount(r) > 0.0 {
            used.amount(r) / cap.amount(r)
        } else {
            0.0
        }
    };
    Some(Allocation {
        gpu: ratio(Resource::Gpu),
        cpu: ratio(Resource::Cpu),
        ram: ratio(Resource::Ram),
    })
}

struct InstanceState {
    ty: InstanceType,
    launch: f64,
    ready: f64,
    /// Set on termination; billing stops here.
    end: Option<f64>,
    tasks: BTreeSet<TaskId>,
}

struct Placed {
    instance: Option<InstanceId>,
    /// The task makes progress from this time on, once placed.
    running_from: f64,
}

struct JobState {
    job: Job,
    progress: f64,
    idle_s: f64,
    migrations: u32,
}

/// One simulation run. `run` consumes it; the learned co-location table stays readable.
pub struct Simulation<'a> {
    catalog: &'a Catalog,
    truth: &'a GroundTruthInterference,
    cfg: SimConfig,
    jobs_in: Vec<Job>,
    skipped: Vec<u32>,

    now: f64,
    heap: BinaryHeap<SimEvent>,
    scheduler: Scheduler,
    table: CoLocationTable,
    instances: BTreeMap<InstanceId, InstanceState>,
    finished_instances: Vec<InstanceRecord>,
    next_instance: u32,
    tasks: TaskMap,
    placed: BTreeMap<TaskId, Placed>,
    jobs: BTreeMap<JobId, JobState>,
    job_records: Vec<JobRecord>,
    recent_events: Vec<f64>,

    cost: f64,
    used_integral: [f64; NUM_RESOURCES],
    cap_integral: [f64; NUM_RESOURCES],
    tpi_integral: f64,
    tpi_time: f64,
    launched: usize,
    migrations: u64,
    rounds_with_events: u64,
    full_rounds: u64,
    observations: u64,
}

impl<'a> Simulation<'a> {
    pub fn new(
        trace: &Trace,
        catalog: &'a Catalog,
        truth: &'a GroundTruthInterference,
        cfg: SimConfig,
    ) -> Result<Self> {
        cfg.delays.validate()?;
        if !(cfg.params.period_s > 0.0) {
            return Err(Error::InvalidInput(format!(
                "period must be positive, got {}",
                cfg.params.period_s
            )));
        }
        if trace
            .jobs
            .windows(2)
            .any(|w| w[0].arrival_time > w[1].arrival_time)
        {
            return Err(Error::InvalidInput("trace is not sorted by arrival".into()));
        }
        let mut jobs_in = Vec::new();
        let mut skipped = Vec::new();
        for j in &trace.jobs {
            if j.tasks
                .iter()
                .all(|t| catalog.cheapest_fitting(&t.demand).is_some())
            {
                jobs_in.push(j.clone());
            } else {
                log::warn!("skipping job {}: no instance type fits its tasks", j.id);
                skipped.push(j.id.0);
            }
        }
        let num_tasks: usize = jobs_in.iter().map(|j| j.tasks.len()).sum();
        if cfg.scheduler == SchedulerKind::Oracle && num_tasks > cfg.params.oracle_cap {
            return Err(Error::OracleCapExceeded {
                tasks: num_tasks,
                cap: cfg.params.oracle_cap,
            });
        }
        let workloads: BTreeSet<_> = jobs_in
            .iter()
            .flat_map(|j| j.tasks.iter().map(|t| &t.workload_id))
            .collect();
        truth.check_covers(workloads)?;

        let table = CoLocationTable::new(cfg.params.default_pairwise)?;
        let scheduler = Scheduler::new(cfg.scheduler, cfg.params.clone());
        let mut heap = BinaryHeap::new();
        for (i, j) in jobs_in.iter().enumerate() {
            heap.push(SimEvent {
                time: j.arrival_time,
                kind: EventKind::JobArrival,
                id: i as u32,
            });
        }
        heap.push(SimEvent {
            time: 0.0,
            kind: EventKind::SchedulingTick,
            id: 0,
        });
        Ok(Simulation {
            catalog,
            truth,
            cfg,
            jobs_in,
            skipped,
            now: 0.0,
            heap,
            scheduler,
            table,
            instances: BTreeMap::new(),
            finished_instances: Vec::new(),
            next_instance: 0,
            tasks: TaskMap::new(),
            placed: BTreeMap::new(),
            jobs: BTreeMap::new(),
            job_records: Vec::new(),
            recent_events: Vec::new(),
            cost: 0.0,
            used_integral: [0.0; NUM_RESOURCES],
            cap_integral: [0.0; NUM_RESOURCES],
            tpi_integral: 0.0,
            tpi_time: 0.0,
            launched: 0,
            migrations: 0,
            rounds_with_events: 0,
            full_rounds: 0,
            observations: 0,
        })
    }

    pub fn table(&self) -> &CoLocationTable {
        &self.table
    }

    /// Table updates made so far.
    pub fn observations(&self) -> u64 {
        self.observations
    }

    pub fn run(&mut self) -> Result<SimReport> {
        self.run_with_observer(|_, _| {})
    }

    /// Runs to the end, calling `observer` after every scheduling period's table updates.
    pub fn run_with_observer(
        &mut self,
        mut observer: impl FnMut(f64, &CoLocationTable),
    ) -> Result<SimReport> {
        loop {
            let rates = self.job_rates();
            let completion = self.earliest_completion(&rates);
            let next_event = self.heap.peek().map(|e| e.time);
            let t = match (completion, next_event) {
                (Some(c), Some(e)) => c.min(e),
                (Some(c), None) => c,
                (None, Some(e)) => e,
                (None, None) => break,
            };
            self.advance(t, &rates);
            if completion.is_some_and(|c| c <= t) {
                self.complete_jobs(&rates);
                continue;
            }
            let ev = self.heap.pop().expect("peeked");
            match ev.kind {
                EventKind::JobArrival => self.arrive(ev.id as usize)?,
                EventKind::SchedulingTick => {
                    let pending_arrivals =
                        self.heap.iter().any(|e| e.kind == EventKind::JobArrival);
                    if self.jobs.is_empty() && !pending_arrivals {
                        break;
                    }
                    self.observe()?;
                    observer(self.now, &self.table);
                    self.tick()?;
                    self.heap.push(SimEvent {
                        time: self.now + self.cfg.params.period_s,
                        kind: EventKind::SchedulingTick,
                        id: 0,
                    });
                }
                // rates are recomputed from the state every step
                EventKind::InstanceReady | EventKind::TaskRunning | EventKind::JobCompletion => {}
            }
        }
        Ok(self.finish())
    }

    fn task(&self, id: TaskId) -> &Task {
        &self.tasks[&id].task
    }

    fn is_running(&self, id: TaskId) -> bool {
        let p = &self.placed[&id];
        p.instance.is_some() && p.running_from <= self.now
    }

    /// Running tasks per instance.
    fn running_sets(&self) -> Vec<Vec<TaskId>> {
        self.instances
            .values()
            .filter(|i| i.end.is_none() && i.ready <= self.now)
            .map(|i| {
                i.tasks
                    .iter()
                    .copied()
                    .filter(|t| self.is_running(*t))
                    .collect::<Vec<_>>()
            })
            .filter(|v| !v.is_empty())
            .collect()
    }

    fn true_throughput(&self, set: &[TaskId], k: usize) -> f64 {
        let others = set
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != k)
            .map(|(_, t)| &self.task(*t).workload_id);
        self.truth
            .throughput(&self.task(set[k]).workload_id, others)
    }

    /// Work hours per wall hour for every live job: the slowest task's throughput, or 0 while
    /// any task is not running.
    fn job_rates(&self) -> BTreeMap<JobId, f64> {
        let mut tput: BTreeMap<TaskId, f64> = BTreeMap::new();
        for set in self.running_sets() {
            for k in 0..set.len() {
                tput.insert(set[k], self.true_throughput(&set, k));
            }
        }
        self.jobs
            .iter()
            .map(|(id, js)| {
                let rate = js
                    .job
                    .tasks
                    .iter()
                    .map(|t| tput.get(&t.id).copied())
                    .try_fold(f64::INFINITY, |m, v| v.map(|v| m.min(v)));
                (*id, rate.unwrap_or(0.0))
            })
            .collect()
    }

    fn completion_time(&self, js: &JobState, rate: f64) -> Option<f64> {
        (rate > 0.0).then(|| self.now + (js.job.work - js.progress).max(0.0) / rate * 3600.0)
    }

    fn earliest_completion(&self, rates: &BTreeMap<JobId, f64>) -> Option<f64> {
        self.jobs
            .iter()
            .filter_map(|(id, js)| self.completion_time(js, rates[id]))
            .min_by(f64::total_cmp)
    }

    fn advance(&mut self, t: f64, rates: &BTreeMap<JobId, f64>) {
        let dt = t - self.now;
        if dt <= 0.0 {
            self.now = self.now.max(t);
            return;
        }
        let (t0, t1) = (self.now, t);
        for (id, js) in self.jobs.iter_mut() {
            let r = rates[id];
            if r > 0.0 {
                js.progress += r * dt / 3600.0;
            } else {
                js.idle_s += dt;
            }
        }
        let mut live = 0usize;
        let mut assigned = 0usize;
        for inst in self.instances.values() {
            let end = inst.end.unwrap_or(f64::INFINITY);
            let overlap = (end.min(t1) - inst.launch.max(t0)).max(0.0);
            self.cost += overlap / 3600.0 * inst.ty.hourly_cost;
            if inst.end.is_none() {
                live += 1;
                assigned += inst.tasks.len();
                let used =
                    ResourceVector::sum(inst.tasks.iter().map(|id| &self.tasks[id].task.demand));
                for r in Resource::ALL {
                    self.used_integral[r.index()] += used.amount(r) * dt;
                    self.cap_integral[r.index()] += inst.ty.capacity.amount(r) * dt;
                }
            }
        }
        if live > 0 {
            self.tpi_integral += assigned as f64 / live as f64 * dt;
            self.tpi_time += dt;
        }
        self.now = t;
        // instances whose billing has ended no longer need integrating
        let done: Vec<InstanceId> = self
            .instances
            .iter()
            .filter(|(_, i)| i.end.is_some_and(|e| e <= self.now) && i.tasks.is_empty())
            .map(|(id, _)| *id)
            .collect();
        for id in done {
            let i = self.instances.remove(&id).expect("listed");
            self.finished_instances.push(InstanceRecord {
                instance_id: id.0,
                type_id: i.ty.id.0.clone(),
                hourly_cost: i.ty.hourly_cost,
                launch_s: i.launch,
                ready_s: i.ready,
                end_s: i.end.expect("terminated"),
            });
        }
    }

    fn complete_jobs(&mut self, rates: &BTreeMap<JobId, f64>) {
        let tol = 1e-9;
        let done: Vec<JobId> = self
            .jobs
            .iter()
            .filter(|(id, js)| {
                self.completion_time(js, rates[*id])
                    .is_some_and(|c| c <= self.now + tol)
            })
            .map(|(id, _)| *id)
            .collect();
        for id in done {
            let js = self.jobs.remove(&id).expect("listed");
            self.recent_events.push(self.now);
            for t in &js.job.tasks {
                let p = self.placed.remove(&t.id).expect("live task");
                self.tasks.remove(&t.id);
                if let Some(iid) = p.instance {
                    let inst = self.instances.get_mut(&iid).expect("live instance");
                    inst.tasks.remove(&t.id);
                    // an instance left with nothing to run is released at once
                    if inst.tasks.is_empty() && inst.end.is_none() {
                        inst.end = Some(self.now);
                    }
                }
            }
            let j = &js.job;
            self.job_records.push(JobRecord {
                job_id: j.id.0,
                num_tasks: j.tasks.len(),
                workload_id: j.tasks[0].workload_id.0.clone(),
                arrival_s: j.arrival_time,
                completion_s: self.now,
                work_hours: j.work,
                jct_hours: (self.now - j.arrival_time) / 3600.0,
                idle_hours: js.idle_s / 3600.0,
                migrations: js.migrations,
            });
        }
    }

    fn arrive(&mut self, index: usize) -> Result<()> {
        let job = self.jobs_in[index].clone();
        self.recent_events.push(self.now);
        for t in &job.tasks {
            self.tasks
                .insert(t.id, PricedTask::new(t.clone(), self.catalog)?);
            self.placed.insert(
                t.id,
                Placed {
                    instance: None,
                    running_from: f64::INFINITY,
                },
            );
        }
        self.jobs.insert(
            job.id,
            JobState {
                job,
                progress: 0.0,
                idle_s: 0.0,
                migrations: 0,
            },
        );
        Ok(())
    }

    /// Feeds the throughput of every running co-located placement into the table.
    fn observe(&mut self) -> Result<()> {
        let sets = self.running_sets();
        let mut by_task: BTreeMap<TaskId, (usize, f64)> = BTreeMap::new();
        for (s, set) in sets.iter().enumerate() {
            for k in 0..set.len() {
                by_task.insert(set[k], (s, self.true_throughput(set, k)));
            }
        }
        let companions = |t: TaskId, s: usize| -> Vec<&Task> {
            sets[s]
                .iter()
                .filter(|&&o| o != t)
                .map(|o| &self.tasks[o].task)
                .collect()
        };
        let mut writes = 0u64;
        let mut table = std::mem::take(&mut self.table);
        for js in self.jobs.values() {
            let ids: Vec<TaskId> = js.job.tasks.iter().map(|t| t.id).collect();
            if !ids.iter().all(|t| by_task.contains_key(t)) {
                continue;
            }
            if ids.len() == 1 {
                let (s, v) = by_task[&ids[0]];
                let comp = companions(ids[0], s);
                if !comp.is_empty() {
                    table.record_single_task(self.task(ids[0]), &comp, v)?;
                    writes += 1;
                }
            } else {
                let observed = ids
                    .iter()
                    .map(|t| by_task[t].1)
                    .fold(f64::INFINITY, f64::min);
                let comps: Vec<Vec<&Task>> =
                    ids.iter().map(|t| companions(*t, by_task[t].0)).collect();
                let placements: Vec<Placement<'_>> = ids
                    .iter()
                    .zip(&comps)
                    .map(|(t, c)| Placement {
                        task: self.task(*t),
                        companions: c,
                    })
                    .collect();
                if table.record_multi_task(&placements, observed)?.is_some() {
                    writes += 1;
                }
            }
        }
        self.table = table;
        self.observations += writes;
        Ok(())
    }

    fn tick(&mut self) -> Result<()> {
        let current = ClusterConfiguration::new(
            self.instances
                .iter()
                .filter(|(_, i)| i.end.is_none())
                .map(|(id, i)| {
                    ConfiguredInstance::new(
                        Some(*id),
                        i.ty.clone(),
                        i.tasks.iter().copied().collect(),
                    )
                })
                .collect(),
        );
        let unassigned: Vec<TaskId> = self
            .placed
            .iter()
            .filter(|(_, p)| p.instance.is_none())
            .map(|(id, _)| *id)
            .collect();
        let events = std::mem::take(&mut self.recent_events);
        let state = SchedulerState {
            current: &current,
            unassigned: &unassigned,
            tasks: &self.tasks,
            table: &self.table,
        };
        let decision =
            self.scheduler
                .schedule(&state, self.catalog, &self.cfg.delays, self.now, &events)?;
        if !events.is_empty() && decision.choice.is_some() {
            self.rounds_with_events += 1;
            if decision.choice == Some(Choice::Full) {
                self.full_rounds += 1;
            }
        }
        let plan = decision.plan;
        plan.config
            .validate(self.tasks.values().map(|p| &p.task))
            .map_err(|e| {
                Error::InvalidConfiguration(format!("scheduler produced an invalid plan: {e}"))
            })?;

        // launches and matched instances
        let mut target: Vec<InstanceId> = Vec::with_capacity(plan.config.instances.len());
        for inst in &plan.config.instances {
            let id = match inst.instance {
                Some(id) => id,
                None => {
                    let id = InstanceId(self.next_instance);
                    self.next_instance += 1;
                    let ready = self.now + self.cfg.delays.boot();
                    self.instances.insert(
                        id,
                        InstanceState {
                            ty: inst.instance_type.clone(),
                            launch: self.now,
                            ready,
                            end: None,
                            tasks: BTreeSet::new(),
                        },
                    );
                    self.heap.push(SimEvent {
                        time: ready,
                        kind: EventKind::InstanceReady,
                        id: id.0,
                    });
                    self.launched += 1;
                    id
                }
            };
            target.push(id);
        }

        // terminated instances bill until their running tasks are checkpointed off
        for id in &plan.terminations {
            let tail = self.instances[id]
                .tasks
                .iter()
                .filter(|t| self.is_running(**t))
                .map(|t| self.cfg.delays.checkpoint(&self.task(*t).workload_id))
                .fold(0.0, f64::max);
            self.instances
                .get_mut(id)
                .expect("terminated instance exists")
                .end = Some(self.now + tail);
        }

        for (inst, &dest) in plan.config.instances.iter().zip(&target) {
            let ready = self.instances[&dest].ready;
            for &t in &inst.tasks {
                let from = self.placed[&t].instance;
                if from == Some(dest) {
                    continue;
                }
                let w = self.task(t).workload_id.clone();
                let running_from = match from {
                    None => ready.max(self.now) + self.cfg.delays.launch(&w),
                    Some(src) => {
                        self.instances
                            .get_mut(&src)
                            .expect("source exists")
                            .tasks
                            .remove(&t);
                        self.migrations += 1;
                        let job = self.tasks[&t].task.job_id;
                        self.jobs.get_mut(&job).expect("live job").migrations += 1;
                        self.now + (ready - self.now).max(0.0) + self.cfg.delays.migration(&w)
                    }
                };
                self.instances
                    .get_mut(&dest)
                    .expect("destination exists")
                    .tasks
                    .insert(t);
                self.placed.insert(
                    t,
                    Placed {
                        instance: Some(dest),
                        running_from,
                    },
                );
                self.heap.push(SimEvent {
                    time: running_from,
                    kind: EventKind::TaskRunning,
                    id: t.0,
                });
            }
        }
        debug_assert!(plan.migrations.iter().all(|m| match m.to {
            Destination::Existing(id) => self.instances.contains_key(&id),
            Destination::New(i) => i < target.len(),
        }));
        Ok(())
    }

    fn finish(&mut self) -> SimReport {
        let ids: Vec<InstanceId> = self.instances.keys().copied().collect();
        for id in ids {
            let i = self.instances.remove(&id).expect("listed");
            let end = i.end.unwrap_or(self.now);
            // tails that run past the last tick
            if end > self.now {
                self.cost += (end - i.launch.max(self.now)) / 3600.0 * i.ty.hourly_cost;
            }
            self.finished_instances.push(InstanceRecord {
                instance_id: id.0,
                type_id: i.ty.id.0.clone(),
                hourly_cost: i.ty.hourly_cost,
                launch_s: i.launch,
                ready_s: i.ready,
                end_s: end,
            });
        }
        self.finished_instances.sort_by_key(|r| r.instance_id);
        self.job_records.sort_by_key(|r| r.job_id);

        let n = self.job_records.len();
        let mean = |f: fn(&JobRecord) -> f64| {
            if n == 0 {
                0.0
            } else {
                self.job_records.iter().map(f).sum::<f64>() / n as f64
            }
        };
        let ratio = |r: Resource| {
            let c = self.cap_integral[r.index()];
            if c > 0.0 {
                self.used_integral[r.index()] / c
            } else {
                0.0
            }
        };
        let num_tasks: usize = self.job_records.iter().map(|j| j.num_tasks).sum();
        SimReport {
            schema_version: REPORT_SCHEMA_VERSION,
            scheduler: self.cfg.scheduler.name().to_string(),
            seed: self.cfg.seed,
            period_s: self.cfg.params.period_s,
            total_cost: self.cost,
            normalized_cost: None,
            makespan_hours: self
                .job_records
                .iter()
                .map(|j| j.completion_s)
                .fold(0.0, f64::max)
                / 3600.0,
            jobs_completed: n,
            skipped_jobs: self.skipped.clone(),
            mean_jct_hours: mean(|j| j.jct_hours),
            mean_idle_hours: mean(|j| j.idle_hours),
            avg_allocation: Allocation {
                gpu: ratio(Resource::Gpu),
                cpu: ratio(Resource::Cpu),
                ram: ratio(Resource::Ram),
            },
            tasks_per_instance: if self.tpi_time > 0.0 {
                self.tpi_integral / self.tpi_time
            } else {
                0.0
            },
            migrations_per_task: if num_tasks > 0 {
                self.migrations as f64 / num_tasks as f64
            } else {
                0.0
            },
            instances_launched: self.launched,
            full_adoption_fraction: match self.cfg.scheduler {
                SchedulerKind::NoPacking | SchedulerKind::Oracle => None,
                _ if self.rounds_with_events == 0 => Some(0.0),
                _ => Some(self.full_rounds as f64 / self.rounds_with_events as f64),
            },
            jobs: std::mem::take(&mut self.job_records),
            instances: std::mem::take(&mut self.finished_instances),
        }
    }
}

pub fn run_simulation(
    trace: &Trace,
    catalog: &Catalog,
    truth: &GroundTruthInterference,
    cfg: &SimConfig,
) -> Result<SimReport> {
    Simulation::new(trace, catalog, truth, cfg.clone())?.run()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::InstanceTypeId;
    use crate::task::WorkloadId;
    use crate::workloads::{worked_example_catalog, worked_example_tasks};

    fn single_job_trace(work: f64, w: &str, demand: ResourceVector) -> Trace {
        let t = Task {
            id: TaskId(0),
            job_id: JobId(0),
            workload_id: WorkloadId::new(w),
            demand,
        };
        Trace {
            jobs: vec![Job::new(JobId(0), vec![t], 0.0, work).unwrap()],
        }
    }

    #[test]
    fn event_order() {
        let mut h = BinaryHeap::new();
        h.push(SimEvent {
            time: 5.0,
            kind: EventKind::SchedulingTick,
            id: 0,
        });
        h.push(SimEvent {
            time: 5.0,
            kind: EventKind::JobArrival,
            id: 2,
        });
        h.push(SimEvent {
            time: 5.0,
            kind: EventKind::JobArrival,
            id: 1,
        });
        h.push(SimEvent {
            time: 1.0,
            kind: EventKind::SchedulingTick,
            id: 0,
        });
        h.push(SimEvent {
            time: 5.0,
            kind: EventKind::InstanceReady,
            id: 9,
        });
        let order: Vec<(f64, EventKind, u32)> = std::iter::from_fn(|| h.pop())
            .map(|e| (e.time, e.kind, e.id))
            .collect();
        assert_eq!(
            order,
            vec![
                (1.0, EventKind::SchedulingTick, 0),
                (5.0, EventKind::InstanceReady, 9),
                (5.0, EventKind::JobArrival, 1),
                (5.0, EventKind::JobArrival, 2),
                (5.0, EventKind::SchedulingTick, 0)
            ]
        );
    }

    #[test]
    fn single_job_no_packing_hand_computed() {
        let trace = single_job_trace(1.0, "generic", ResourceVector::whole(0, 6, 20));
        let cfg = SimConfig {
            scheduler: SchedulerKind::NoPacking,
            delays: DelayModel::averages(),
            ..SimConfig::default()
        };
        let cat = worked_example_catalog();
        let r = run_simulation(
            &trace,
            &cat,
            &GroundTruthInterference::uniform(1.0).unwrap(),
            &cfg,
        )
        .unwrap();
        let expected_jct = 1.0 + (19.0 + 190.0 + 47.0) / 3600.0;
        assert!(
            (r.jobs[0].jct_hours - expected_jct).abs() < 1e-9,
            "{}",
            r.jobs[0].jct_hours
        );
        assert!((r.total_cost - 0.8 * expected_jct).abs() < 1e-9);
        assert!((r.jobs[0].idle_hours - 256.0 / 3600.0).abs() < 1e-9);
        assert_eq!(r.instances_launched, 1);
        assert_eq!(r.instances[0].type_id, "it3");
        assert!((r.cost_from_instance_log() - r.total_cost).abs() < 1e-9);
        assert_eq!(r.full_adoption_fraction, None);
    }

    #[test]
    fn arrival_waits_for_next_tick() {
        let mut trace = single_job_trace(0.5, "generic", ResourceVector::whole(0, 2, 2));
        trace.jobs[0].arrival_time = 100.0;
        let cfg = SimConfig {
            scheduler: SchedulerKind::Eva,
            delays: DelayModel::zero(),
            ..SimConfig::default()
        };
        let r = run_simulation(
            &trace,
            &worked_example_catalog(),
            &GroundTruthInterference::uniform(1.0).unwrap(),
            &cfg,
        )
        .unwrap();
        assert!((r.jobs[0].completion_s - (300.0 + 1800.0)).abs() < 1e-6);
        assert!((r.jobs[0].idle_hours - 200.0 / 3600.0).abs() < 1e-9);
        assert!((r.total_cost - 0.4 * 0.5).abs() < 1e-9);
    }

    #[test]
    fn worked_example_packs_and_interference_slows() {
        let jobs: Vec<Job> = worked_example_tasks()
            .into_iter()
            .map(|t| Job::new(t.job_id, vec![t], 0.0, 2.0).unwrap())
            .collect();
        let trace = Trace { jobs };
        let cat = worked_example_catalog();
        let cfg = SimConfig {
            scheduler: SchedulerKind::EvaRp,
            delays: DelayModel::zero(),
            ..SimConfig::default()
        };
        let r = run_simulation(
            &trace,
            &cat,
            &GroundTruthInterference::uniform(1.0).unwrap(),
            &cfg,
        )
        .unwrap();
        assert!((r.total_cost - 12.8 * 2.0).abs() < 1e-9, "{}", r.total_cost);
        assert!(r.jobs.iter().all(|j| (j.jct_hours - 2.0).abs() < 1e-9));
        assert!((r.avg_allocation.gpu - 0.75).abs() < 1e-12);
        assert!((r.tasks_per_instance - 2.0).abs() < 1e-12);

        let slow = run_simulation(
            &trace,
            &cat,
            &GroundTruthInterference::uniform(0.8).unwrap(),
            &cfg,
        )
        .unwrap();
        // three tasks share the it1: each runs at 0.8^2
        let packed = slow
            .jobs
            .iter()
            .filter(|j| j.job_id != 3)
            .map(|j| j.jct_hours)
            .fold(0.0, f64::max);
        assert!(packed > 2.0 / 0.64 - 1e-6, "{packed}");
        assert!(slow
            .jobs
            .iter()
            .all(|j| j.jct_hours >= j.work_hours - 1e-12));
    }

    #[test]
    fn migration_pauses_the_task() {
        // tau4 arrives first and gets an it4; tau1 and tau2 arrive later and Full packs all three
        let mut tasks = worked_example_tasks();
        tasks.remove(2);
        let arrivals = [0.0, 3600.0, 3600.0];
        let jobs: Vec<Job> = tasks
            .into_iter()
            .rev()
            .zip(arrivals)
            .map(|(t, a)| Job::new(t.job_id, vec![t], a, 3.0).unwrap())
            .collect::<Vec<_>>();
        let mut jobs = jobs;
        jobs.sort_by(|a, b| a.arrival_time.total_cmp(&b.arrival_time));
        let trace = Trace { jobs };
        let params = SchedulerParams {
            default_pairwise: 1.0,
            ..SchedulerParams::default()
        };
        let cfg = SimConfig {
            scheduler: SchedulerKind::EvaFullOnly,
            params,
            delays: DelayModel::averages(),
            ..SimConfig::default()
        };
        let r = run_simulation(
            &trace,
            &worked_example_catalog(),
            &GroundTruthInterference::uniform(1.0).unwrap(),
            &cfg,
        )
        .unwrap();
        let t4 = r.jobs.iter().find(|j| j.job_id == 4).unwrap();
        assert_eq!(t4.migrations, 1);
        // launch 209 + 47 at first, later an it1 boot plus checkpoint and launch
        assert!(
            t4.idle_hours * 3600.0 >= 256.0 + 209.0 + 55.0 - 1e-6,
            "{}",
            t4.idle_hours * 3600.0
        );
        assert!((r.cost_from_instance_log() - r.total_cost).abs() < 1e-9);
        let it4 = r.instances.iter().find(|i| i.type_id == "it4").unwrap();
        // the it4 bills until tau4 is checkpointed off
        assert!((it4.end_s - (3600.0 + 8.0)).abs() < 1e-9, "{}", it4.end_s);
    }

    #[test]
    fn deterministic_reports() {
        let jobs: Vec<Job> = worked_example_tasks()
            .into_iter()
            .enumerate()
            .map(|(i, t)| Job::new(t.job_id, vec![t], i as f64 * 500.0, 1.0 + i as f64).unwrap())
            .collect();
        let trace = Trace { jobs };
        let cfg = SimConfig::default();
        let g = GroundTruthInterference::uniform(0.9).unwrap();
        let a = run_simulation(&trace, &worked_example_catalog(), &g, &cfg)
            .unwrap()
            .to_json()
            .unwrap();
        let b = run_simulation(&trace, &worked_example_catalog(), &g, &cfg)
            .unwrap()
            .to_json()
            .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn skips_infeasible_and_guards_oracle() {
        let mut trace = single_job_trace(1.0, "generic", ResourceVector::whole(9, 1, 1));
        let cat = worked_example_catalog();
        let g = GroundTruthInterference::uniform(1.0).unwrap();
        let r = run_simulation(&trace, &cat, &g, &SimConfig::default()).unwrap();
        assert_eq!(r.skipped_jobs, vec![0]);
        assert_eq!(r.total_cost, 0.0);

        trace.jobs[0].tasks = (0..20)
            .map(|i| Task {
                id: TaskId(i),
                job_id: JobId(0),
                workload_id: WorkloadId::new("g"),
                demand: ResourceVector::whole(0, 1, 1),
            })
            .collect();
        let cfg = SimConfig {
            scheduler: SchedulerKind::Oracle,
            ..SimConfig::default()
        };
        assert!(matches!(
            run_simulation(&trace, &cat, &g, &cfg),
            Err(Error::OracleCapExceeded { .. })
        ));
    }

    #[test]
    fn allocation_examples() {
        let cat = worked_example_catalog();
        let tasks: TaskMap = worked_example_tasks()
            .into_iter()
            .map(|t| (t.id, PricedTask::new(t, &cat).unwrap()))
            .collect();
        let ty = |s: &str| cat.get(&InstanceTypeId::new(s)).unwrap().clone();
        let cfg = ClusterConfiguration::new(vec![ConfiguredInstance::new(
            None,
            ty("it1"),
            vec![TaskId(1), TaskId(2), TaskId(4)],
        )]);
        assert_eq!(measure_allocation(&cfg, &tasks).unwrap().gpu, 0.75);
        let cfg = ClusterConfiguration::new(vec![ConfiguredInstance::new(
            None,
            ty("it3"),
            vec![TaskId(3)],
        )]);
        assert_eq!(measure_allocation(&cfg, &tasks).unwrap().cpu, 0.75);
        let cfg = ClusterConfiguration::new(vec![ConfiguredInstance::new(None, ty("it3"), vec![])]);
        assert_eq!(
            measure_allocation(&cfg, &tasks).unwrap(),
            Allocation::default()
        );
        assert!(measure_allocation(&ClusterConfiguration::default(), &tasks).is_none());
    }
}
