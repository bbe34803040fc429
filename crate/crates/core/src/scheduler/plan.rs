//! Turning a target configuration into concrete actions, and pricing those actions.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::catalog::InstanceType;
use crate::config::{ClusterConfiguration, InstanceId};
use crate::pricing::PricedTask;
use crate::scheduler::full::PackingContext;
use crate::scheduler::TaskMap;
use crate::sim::DelayModel;
use crate::task::TaskId;

/// Where a task goes: an existing instance, or the planned instance at an index of the plan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Destination {
    Existing(InstanceId),
    New(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Migration {
    pub task: TaskId,
    pub from: InstanceId,
    pub to: Destination,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconfigurationPlan {
    /// Matched instances carry their running instance id; the rest are launches.
    pub config: ClusterConfiguration,
    /// Dollars per hour: sum over instances of set price minus instance cost.
    pub saving: f64,
    /// Dollars spent on instances that sit idle while tasks migrate or instances boot.
    pub migration_cost: f64,
    pub migrations: Vec<Migration>,
    /// Indices into `config.instances` of the instances to launch.
    pub launches: Vec<usize>,
    pub terminations: Vec<InstanceId>,
}

impl ReconfigurationPlan {
    pub fn launch_types(&self) -> impl Iterator<Item = &InstanceType> {
        self.launches
            .iter()
            .map(|&i| &self.config.instances[i].instance_type)
    }
}

/// Matches planned instances to running instances of the same type, preferring the pairs that
/// share the most tasks, and derives the migrations, launches, terminations, saving and migration
/// cost of moving from `current` to `new_config`.
///
/// Planned instances that already name a running instance keep it. Remaining planned instances
/// take running instances of their type greedily by task overlap, then any leftover running
/// instance of their type.
pub fn plan_from_config(
    new_config: &ClusterConfiguration,
    current: &ClusterConfiguration,
    tasks: &TaskMap,
    delays: &DelayModel,
    ctx: &PackingContext<'_>,
) -> ReconfigurationPlan {
    let mut config = new_config.clone();
    let existing: BTreeMap<InstanceId, &crate::config::ConfiguredInstance> = current
        .instances
        .iter()
        .filter_map(|i| i.instance.map(|id| (id, i)))
        .collect();
    let mut location: HashMap<TaskId, InstanceId> = HashMap::new();
    for (id, inst) in &existing {
        for t in &inst.tasks {
            location.insert(*t, *id);
        }
    }

    let mut taken: BTreeSet<InstanceId> = BTreeSet::new();
    for inst in &mut config.instances {
        match inst.instance {
            Some(id) if existing.contains_key(&id) && !taken.contains(&id) => {
                taken.insert(id);
            }
            _ => inst.instance = None,
        }
    }

    // (overlap, planned index, running id), best overlap first, then lowest indices
    let mut pairs: Vec<(usize, usize, InstanceId)> = Vec::new();
    for (pi, inst) in config.instances.iter().enumerate() {
        if inst.instance.is_some() {
            continue;
        }
        for (id, run) in &existing {
            if taken.contains(id) || run.instance_type.id != inst.instance_type.id {
                continue;
            }
            let overlap = inst
                .tasks
                .iter()
                .filter(|t| location.get(t) == Some(id))
                .count();
            pairs.push((overlap, pi, *id));
        }
    }
    pairs.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    for (_, pi, id) in pairs {
        if config.instances[pi].instance.is_none() && !taken.contains(&id) {
            config.instances[pi].instance = Some(id);
            taken.insert(id);
        }
    }

    let terminations: Vec<InstanceId> = existing
        .keys()
        .filter(|id| !taken.contains(id))
        .copied()
        .collect();
    let launches: Vec<usize> = config
        .instances
        .iter()
        .enumerate()
        .filter(|(_, i)| i.instance.is_none())
        .map(|(i, _)| i)
        .collect();

    let mut migrations = Vec::new();
    let mut migration_cost = 0.0;
    let mut saving = 0.0;
    for (pi, inst) in config.instances.iter().enumerate() {
        let members: Vec<&PricedTask> = inst.tasks.iter().filter_map(|id| tasks.get(id)).collect();
        saving += ctx.set_value(&members) - inst.instance_type.hourly_cost;
        let dest = match inst.instance {
            Some(id) => Destination::Existing(id),
            None => Destination::New(pi),
        };
        if inst.instance.is_none() {
            migration_cost += delays.boot() / 3600.0 * inst.instance_type.hourly_cost;
        }
        for t in &inst.tasks {
            let Some(&from) = location.get(t) else {
                continue;
            };
            if Destination::Existing(from) == dest {
                continue;
            }
            migrations.push(Migration {
                task: *t,
                from,
                to: dest,
            });
            let w = tasks.get(t).map(|p| &p.task.workload_id);
            let secs = w
                .map(|w| delays.migration(w))
                .unwrap_or(delays.default_checkpoint + delays.default_launch);
            migration_cost += secs / 3600.0 * inst.instance_type.hourly_cost;
        }
    }

    ReconfigurationPlan {
        config,
        saving,
        migration_cost,
        migrations,
        launches,
        terminations,
    }
}
