//! Cluster configurations: which instances exist and which tasks each one hosts.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::catalog::InstanceType;
use crate::error::{Error, Result};
use crate::resources::ResourceVector;
use crate::task::{Task, TaskId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct InstanceId(pub u32);

impl fmt::Display for InstanceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "i{}", self.0)
    }
}

/// One instance of a configuration. `instance` is `None` for a planned instance that has not been
/// matched to a running one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfiguredInstance {
    pub instance: Option<InstanceId>,
    pub instance_type: InstanceType,
    /// Sorted, without duplicates.
    pub tasks: Vec<TaskId>,
}

impl ConfiguredInstance {
    pub fn new(
        instance: Option<InstanceId>,
        instance_type: InstanceType,
        mut tasks: Vec<TaskId>,
    ) -> Self {
        tasks.sort_unstable();
        ConfiguredInstance {
            instance,
            instance_type,
            tasks,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ClusterConfiguration {
    pub instances: Vec<ConfiguredInstance>,
}

impl ClusterConfiguration {
    pub fn new(instances: Vec<ConfiguredInstance>) -> Self {
        ClusterConfiguration { instances }
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn task_ids(&self) -> impl Iterator<Item = TaskId> + '_ {
        self.instances.iter().flat_map(|i| i.tasks.iter().copied())
    }

    /// Sum of hourly costs of the non-ghost instances.
    pub fn hourly_cost(&self) -> f64 {
        configuration_hourly_cost(self)
    }

    /// Order-independent view used to compare configurations: per instance, its type id and tasks.
    pub fn canonical(&self) -> Vec<(String, Vec<TaskId>)> {
        let mut v: Vec<_> = self
            .instances
            .iter()
            .filter(|i| !i.instance_type.is_ghost())
            .map(|i| (i.instance_type.id.0.clone(), i.tasks.clone()))
            .collect();
        v.sort();
        v
    }

    /// Checks that every task of `tasks` is hosted exactly once, no unknown task is hosted, ghost
    /// instances are empty and every instance's summed demand fits its capacity.
    pub fn validate<'a>(&self, tasks: impl IntoIterator<Item = &'a Task>) -> Result<()> {
        let demands: BTreeMap<TaskId, &ResourceVector> =
            tasks.into_iter().map(|t| (t.id, &t.demand)).collect();
        let mut seen = BTreeSet::new();
        for inst in &self.instances {
            if inst.instance_type.is_ghost() && !inst.tasks.is_empty() {
                return Err(Error::InvalidConfiguration(
                    "ghost instance hosts tasks".into(),
                ));
            }
            let mut load = ResourceVector::ZERO;
            for id in &inst.tasks {
                let demand = demands
                    .get(id)
                    .ok_or_else(|| Error::InvalidConfiguration(format!("unknown task {id}")))?;
                if !seen.insert(*id) {
                    return Err(Error::InvalidConfiguration(format!(
                        "task {id} assigned more than once"
                    )));
                }
                load += **demand;
            }
            if !load.fits(&inst.instance_type.capacity) {
                return Err(Error::InvalidConfiguration(format!(
                    "load {load} exceeds capacity {} of {}",
                    inst.instance_type.capacity, inst.instance_type.id
                )));
            }
        }
        if let Some(missing) = demands.keys().find(|id| !seen.contains(id)) {
            return Err(Error::InvalidConfiguration(format!(
                "task {missing} is not assigned"
            )));
        }
        Ok(())
    }
}

/// Capacity of `instance_type` left after hosting `tasks`.
pub fn remaining_capacity<'a>(
    instance_type: &InstanceType,
    tasks: impl IntoIterator<Item = &'a Task>,
) -> Result<ResourceVector> {
    let load = ResourceVector::sum(tasks.into_iter().map(|t| &t.demand));
    instance_type
        .capacity
        .checked_sub(&load)
        .ok_or_else(|| Error::CapacityExceeded(instance_type.id.clone()))
}

pub fn configuration_hourly_cost(config: &ClusterConfiguration) -> f64 {
    config
        .instances
        .iter()
        .filter(|i| !i.instance_type.is_ghost())
        .map(|i| i.instance_type.hourly_cost)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::InstanceTypeId;
    use crate::workloads::{worked_example_catalog, worked_example_tasks};
    use proptest::prelude::*;

    fn ty(id: &str) -> InstanceType {
        worked_example_catalog()
            .get(&InstanceTypeId::new(id))
            .unwrap()
            .clone()
    }

    fn inst(t: &str, tasks: &[u32]) -> ConfiguredInstance {
        ConfiguredInstance::new(None, ty(t), tasks.iter().map(|&i| TaskId(i)).collect())
    }

    #[test]
    fn remaining_capacity_examples() {
        let tasks = worked_example_tasks();
        assert_eq!(
            remaining_capacity(&ty("it1"), &tasks[0..2]).unwrap(),
            ResourceVector::whole(1, 4, 210)
        );
        assert_eq!(
            remaining_capacity(&ty("it1"), &[]).unwrap(),
            ResourceVector::whole(4, 16, 244)
        );
        assert_eq!(
            remaining_capacity(&ty("it4"), &tasks[3..4]).unwrap(),
            ResourceVector::whole(0, 0, 4)
        );
        assert!(matches!(
            remaining_capacity(&ty("it4"), &tasks[2..3]),
            Err(Error::CapacityExceeded(_))
        ));
    }

    #[test]
    fn hourly_cost_examples() {
        let packed = ClusterConfiguration::new(vec![inst("it1", &[1, 2, 4]), inst("it3", &[3])]);
        assert!((packed.hourly_cost() - 12.8).abs() < 1e-12);
        assert_eq!(ClusterConfiguration::default().hourly_cost(), 0.0);
        let unpacked = ClusterConfiguration::new(vec![
            inst("it1", &[1]),
            inst("it2", &[2]),
            inst("it3", &[3]),
            inst("it4", &[4]),
        ]);
        assert!((unpacked.hourly_cost() - 16.2).abs() < 1e-12);
    }

    #[test]
    fn validator() {
        let tasks = worked_example_tasks();
        let ok = ClusterConfiguration::new(vec![inst("it1", &[1, 2, 4]), inst("it3", &[3])]);
        assert!(ok.validate(&tasks).is_ok());
        let twice = ClusterConfiguration::new(vec![
            inst("it1", &[1, 2, 4]),
            inst("it3", &[3]),
            inst("it4", &[4]),
        ]);
        assert!(twice.validate(&tasks).is_err());
        let over = ClusterConfiguration::new(vec![
            inst("it1", &[1, 2]),
            inst("it4", &[3]),
            inst("it4", &[4]),
        ]);
        assert!(over.validate(&tasks).is_err());
        let missing = ClusterConfiguration::new(vec![inst("it1", &[1, 2, 4])]);
        assert!(missing.validate(&tasks).is_err());
        let mut ghost = ok.clone();
        ghost.instances.push(ConfiguredInstance::new(
            None,
            InstanceType::ghost(),
            vec![TaskId(9)],
        ));
        assert!(ghost.validate(&tasks).is_err());
    }

    proptest! {
        #[test]
        fn cost_is_additive(split in 0usize..5, picks in proptest::collection::vec(0usize..4, 0..5)) {
            let names = ["it1", "it2", "it3", "it4"];
            let all: Vec<_> = picks.iter().map(|&p| inst(names[p], &[])).collect();
            let split = split.min(all.len());
            let a = ClusterConfiguration::new(all[..split].to_vec());
            let b = ClusterConfiguration::new(all[split..].to_vec());
            let whole = ClusterConfiguration::new(all);
            prop_assert!((whole.hourly_cost() - a.hourly_cost() - b.hourly_cost()).abs() < 1e-9);
        }
    }
}
