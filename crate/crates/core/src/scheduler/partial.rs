//! Partial Reconfiguration: repack only new tasks and tasks stranded on instances that no longer
//! pay for themselves.

use crate::config::ClusterConfiguration;
use crate::pricing::PricedTask;
use crate::scheduler::full::{full_reconfiguration, PackingContext};
use crate::scheduler::TaskMap;
use crate::task::TaskId;

/// Keeps every cost-efficient instance of `current` untouched and runs Full Reconfiguration on
/// `unassigned` plus the tasks of the instances that are not. Dropped instances are terminated.
pub fn partial_reconfiguration(
    current: &ClusterConfiguration,
    unassigned: &[TaskId],
    tasks: &TaskMap,
    ctx: &PackingContext<'_>,
) -> ClusterConfiguration {
    let mut kept = Vec::new();
    let mut subset: Vec<&PricedTask> = unassigned.iter().filter_map(|id| tasks.get(id)).collect();
    for inst in &current.instances {
        let members: Vec<&PricedTask> = inst.tasks.iter().filter_map(|id| tasks.get(id)).collect();
        if ctx.is_cost_efficient(&members, &inst.instance_type) {
            kept.push(inst.clone());
        } else {
            subset.extend(members);
        }
    }
    if subset.is_empty() && kept.len() == current.instances.len() {
        return current.clone();
    }
    let mut out = ClusterConfiguration::new(kept);
    out.instances
        .extend(full_reconfiguration(&subset, ctx).instances);
    out
}
