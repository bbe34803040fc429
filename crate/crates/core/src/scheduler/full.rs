//! Full Reconfiguration: greedy reservation-price packing over every task in the system.

use crate::catalog::{Catalog, InstanceType};
use crate::colocation::CoLocationTable;
use crate::config::{ClusterConfiguration, ConfiguredInstance};
use crate::pricing::{JobIndex, JobPricing, PricedTask, PricingMode, COST_EPSILON};
use crate::resources::ResourceVector;
use crate::task::{TaskId, WorkloadId};

/// Everything needed to price a hypothetical set of co-located tasks.
#[derive(Clone, Copy)]
pub struct PackingContext<'a> {
    pub catalog: &'a Catalog,
    pub table: &'a CoLocationTable,
    pub jobs: &'a JobIndex,
    pub mode: PricingMode,
}

impl<'a> PackingContext<'a> {
    fn job(&self, p: &PricedTask) -> JobPricing {
        self.jobs
            .get(&p.task.job_id)
            .copied()
            .unwrap_or(JobPricing {
                num_tasks: 1,
                rp_sum: p.reservation_price,
            })
    }

    /// Estimated normalized throughput of `tasks[i]` when co-located with the rest of `tasks`.
    pub fn throughput_of(&self, tasks: &[&PricedTask], i: usize) -> f64 {
        if tasks.len() < 2 {
            return 1.0;
        }
        let companions: Vec<&WorkloadId> = tasks
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, p)| &p.task.workload_id)
            .collect();
        self.table.lookup(&tasks[i].task.workload_id, &companions)
    }

    /// (Throughput-normalized) reservation price of a set hosted on one instance.
    pub fn set_value(&self, tasks: &[&PricedTask]) -> f64 {
        if !self.mode.uses_throughput() {
            return tasks.iter().map(|p| p.reservation_price).sum();
        }
        (0..tasks.len())
            .map(|i| {
                let tput = self.throughput_of(tasks, i);
                self.mode
                    .task_value(tasks[i].reservation_price, self.job(tasks[i]), tput)
            })
            .sum()
    }

    pub fn is_cost_efficient(&self, tasks: &[&PricedTask], ty: &InstanceType) -> bool {
        !tasks.is_empty() && self.set_value(tasks) >= ty.hourly_cost - COST_EPSILON
    }
}

/// Tasks that price identically in every co-location set: same workload, demand, price and job
/// summary. Packing only has to evaluate one representative per class.
#[derive(PartialEq)]
struct ClassKey<'a> {
    workload: &'a WorkloadId,
    demand: ResourceVector,
    rp: u64,
    job_tasks: usize,
    job_rp: u64,
}

impl<'a> ClassKey<'a> {
    fn of(p: &'a PricedTask, ctx: &PackingContext<'_>) -> Self {
        let job = ctx.job(p);
        let multi = ctx.mode == PricingMode::Tnrp && job.num_tasks > 1;
        ClassKey {
            workload: &p.task.workload_id,
            demand: p.task.demand,
            rp: p.reservation_price.to_bits(),
            job_tasks: if multi { job.num_tasks } else { 1 },
            job_rp: if multi { job.rp_sum.to_bits() } else { 0 },
        }
    }
}

/// Packs `tasks` onto new instances. Instance types are tried from most to least expensive; each
/// new instance greedily takes the fitting task that maximizes the set's price, stops when the
/// price would drop, and is kept only if the set pays for the instance. A type is abandoned at
/// the first instance that does not pay for itself.
pub fn full_reconfiguration(
    tasks: &[&PricedTask],
    ctx: &PackingContext<'_>,
) -> ClusterConfiguration {
    let mut pending: Vec<&PricedTask> = tasks.to_vec();
    pending.sort_by_key(|p| p.id());
    let mut instances = Vec::new();

    for ty in ctx.catalog.by_cost_descending() {
        while !pending.is_empty() {
            let Some(chosen) = pack_one(ty, &pending, ctx) else {
                break;
            };
            if !ctx.is_cost_efficient(&chosen.iter().map(|&i| pending[i]).collect::<Vec<_>>(), ty) {
                break;
            }
            let ids: Vec<TaskId> = chosen.iter().map(|&i| pending[i].id()).collect();
            let mut taken = vec![false; pending.len()];
            for &i in &chosen {
                taken[i] = true;
            }
            let mut k = 0;
            pending.retain(|_| {
                let keep = !taken[k];
                k += 1;
                keep
            });
            instances.push(ConfiguredInstance::new(None, ty.clone(), ids));
        }
        if pending.is_empty() {
            break;
        }
    }
    debug_assert!(
        pending.is_empty(),
        "cheapest fitting type always accepts its tasks"
    );
    ClusterConfiguration::new(instances)
}

/// Fills one fresh instance of `ty`; returns indices into `pending`, or `None` if nothing fits.
fn pack_one(
    ty: &InstanceType,
    pending: &[&PricedTask],
    ctx: &PackingContext<'_>,
) -> Option<Vec<usize>> {
    let mut chosen: Vec<usize> = Vec::new();
    let mut members: Vec<&PricedTask> = Vec::new();
    let mut in_set = vec![false; pending.len()];
    let mut remaining = ty.capacity;
    let mut current = 0.0;

    loop {
        let mut reps: Vec<(ClassKey<'_>, usize)> = Vec::new();
        for (i, p) in pending.iter().enumerate() {
            if in_set[i] || !p.task.demand.fits(&remaining) {
                continue;
            }
            let key = ClassKey::of(p, ctx);
            if !reps.iter().any(|(k, _)| *k == key) {
                reps.push((key, i));
            }
        }
        if reps.is_empty() {
            break;
        }
        // argmax over class representatives; representatives carry their class's lowest task id
        let mut best: Option<(f64, usize)> = None;
        for &(_, i) in &reps {
            members.push(pending[i]);
            let v = ctx.set_value(&members);
            members.pop();
            let better = match best {
                None => true,
                Some((bv, bi)) => v > bv || (v == bv && pending[i].id() < pending[bi].id()),
            };
            if better {
                best = Some((v, i));
            }
        }
        let (value, idx) = best.expect("reps is non-empty");
        if !chosen.is_empty() && value < current - COST_EPSILON {
            break;
        }
        chosen.push(idx);
        members.push(pending[idx]);
        in_set[idx] = true;
        remaining = remaining
            .checked_sub(&pending[idx].task.demand)
            .expect("candidate fits");
        current = value;
    }
    if chosen.is_empty() {
        None
    } else {
        Some(chosen)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pricing::job_index;
    use crate::task::{JobId, Task};
    use crate::workloads::{worked_example_catalog, worked_example_tasks};

    fn priced(tasks: Vec<Task>, cat: &Catalog) -> Vec<PricedTask> {
        tasks
            .into_iter()
            .map(|t| PricedTask::new(t, cat).unwrap())
            .collect()
    }

    #[test]
    fn worked_example() {
        let cat = worked_example_catalog();
        let p = priced(worked_example_tasks(), &cat);
        let jobs = job_index(&p);
        let table = CoLocationTable::new(1.0).unwrap();
        let ctx = PackingContext {
            catalog: &cat,
            table: &table,
            jobs: &jobs,
            mode: PricingMode::Rp,
        };
        let refs: Vec<&PricedTask> = p.iter().collect();
        let cfg = full_reconfiguration(&refs, &ctx);
        assert_eq!(
            cfg.canonical(),
            vec![
                ("it1".to_string(), vec![TaskId(1), TaskId(2), TaskId(4)]),
                ("it3".to_string(), vec![TaskId(3)])
            ]
        );
        assert!((cfg.hourly_cost() - 12.8).abs() < 1e-9);

        let only3 = full_reconfiguration(&refs[2..3], &ctx);
        assert_eq!(
            only3.canonical(),
            vec![("it3".to_string(), vec![TaskId(3)])]
        );
        assert!(full_reconfiguration(&[], &ctx).is_empty());
    }

    #[test]
    fn default_throughput_discourages_small_additions() {
        // with unknown pairs at 0.95, adding the 0.4 task to the 12 task lowers the set price
        let cat = worked_example_catalog();
        let p = priced(worked_example_tasks(), &cat);
        let jobs = job_index(&p);
        let table = CoLocationTable::default();
        let ctx = PackingContext {
            catalog: &cat,
            table: &table,
            jobs: &jobs,
            mode: PricingMode::Tnrp,
        };
        let cfg = full_reconfiguration(&[&p[0], &p[3]], &ctx);
        assert_eq!(cfg.instances.len(), 2);
        assert!((cfg.hourly_cost() - 12.4).abs() < 1e-9);
    }

    #[test]
    fn severe_interference_blocks_packing() {
        let cat = worked_example_catalog();
        let p = priced(worked_example_tasks(), &cat);
        let jobs = job_index(&p);
        let mut table = CoLocationTable::new(0.5).unwrap();
        let t = |i: usize| &p[i].task;
        table.record_single_task(t(0), &[t(1)], 0.5).unwrap();
        let ctx = PackingContext {
            catalog: &cat,
            table: &table,
            jobs: &jobs,
            mode: PricingMode::Tnrp,
        };
        let cfg = full_reconfiguration(&[&p[0], &p[1]], &ctx);
        assert!(cfg.instances.iter().all(|i| i.tasks.len() == 1));
    }

    #[test]
    fn ties_break_on_lowest_task_id() {
        let cat = worked_example_catalog();
        let mk = |id: u32| Task {
            id: TaskId(id),
            job_id: JobId(id),
            workload_id: WorkloadId::new("same"),
            demand: ResourceVector::whole(0, 4, 12),
        };
        let p = priced(vec![mk(7), mk(3), mk(5)], &cat);
        let jobs = job_index(&p);
        let table = CoLocationTable::new(1.0).unwrap();
        let ctx = PackingContext {
            catalog: &cat,
            table: &table,
            jobs: &jobs,
            mode: PricingMode::Rp,
        };
        let refs: Vec<&PricedTask> = p.iter().collect();
        let cfg = full_reconfiguration(&refs, &ctx);
        // three 0.4 tasks: a pair exactly pays for an it3, the third lands on it4
        assert_eq!(cfg.instances[0].tasks, vec![TaskId(3), TaskId(5)]);
    }
}
