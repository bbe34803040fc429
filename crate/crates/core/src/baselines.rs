//! The No-Packing baseline and an exact minimum-cost packer for small inputs.
//!
//! The exact packer solves the provisioning integer program: one candidate instance slot per
//! task, each slot of exactly one type (the zero-cost, zero-capacity ghost type meaning "not
//! provisioned"), each task in exactly one slot, and no slot over capacity. For a fixed set of
//! tasks the best type of a slot is the cheapest one that holds their summed demand, so the search
//! runs over set partitions of the tasks. Slots are opened in order of their first task, which
//! removes the symmetry between interchangeable slots.

use std::time::{Duration, Instant};

use crate::catalog::{Catalog, InstanceType};
use crate::config::{ClusterConfiguration, ConfiguredInstance};
use crate::error::{Error, Result};
use crate::pricing::COST_EPSILON;
use crate::resources::{Resource, ResourceVector};
use crate::task::Task;

pub const DEFAULT_ORACLE_CAP: usize = 16;

/// One instance per task, each on the task's reservation-price type.
pub fn no_packing_schedule(tasks: &[Task], catalog: &Catalog) -> Result<ClusterConfiguration> {
    let mut instances = Vec::with_capacity(tasks.len());
    for t in tasks {
        let ty = catalog
            .cheapest_fitting(&t.demand)
            .ok_or(Error::InfeasibleTask(t.id))?;
        instances.push(ConfiguredInstance::new(None, ty.clone(), vec![t.id]));
    }
    Ok(ClusterConfiguration::new(instances))
}

#[derive(Debug, Clone)]
pub struct IlpInstance {
    pub tasks: Vec<Task>,
    pub catalog: Catalog,
}

impl IlpInstance {
    pub fn new(tasks: Vec<Task>, catalog: Catalog) -> Self {
        IlpInstance { tasks, catalog }
    }

    /// Upper bound on provisioned instances: one per task.
    pub fn instance_slots(&self) -> usize {
        self.tasks.len()
    }

    /// The catalog with the ghost type appended.
    pub fn types_with_ghost(&self) -> Vec<InstanceType> {
        let mut v = self.catalog.types().to_vec();
        v.push(InstanceType::ghost());
        v
    }
}

#[derive(Debug, Clone)]
pub struct OracleOptions {
    pub budget: Duration,
    pub cap: usize,
    /// Allow more than `cap` tasks.
    pub override_cap: bool,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            budget: Duration::from_secs(60),
            cap: DEFAULT_ORACLE_CAP,
            override_cap: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct OracleResult {
    pub config: ClusterConfiguration,
    pub cost: f64,
    /// True when the search finished, so `cost` is the proven minimum.
    pub optimal: bool,
    pub nodes: u64,
}

struct Slot {
    load: ResourceVector,
    cost: f64,
    ty: usize,
    members: Vec<usize>,
}

struct Search<'a> {
    demands: Vec<ResourceVector>,
    /// Types sorted by ascending cost.
    types: Vec<&'a InstanceType>,
    slots: Vec<Slot>,
    committed: f64,
    best_cost: f64,
    best: Option<Vec<(usize, Vec<usize>)>>,
    nodes: u64,
    deadline: Instant,
    timed_out: bool,
    floor: f64,
}

impl<'a> Search<'a> {
    fn cheapest(&self, load: &ResourceVector) -> Option<(usize, f64)> {
        self.types
            .iter()
            .position(|t| load.fits(&t.capacity))
            .map(|i| (i, self.types[i].hourly_cost))
    }

    /// Valid lower bound on the final cost: committed slot costs can only grow, and each remaining
    /// task forces at least its cheapest individual increase.
    fn bound(&self, next: usize) -> f64 {
        let mut worst_extra: f64 = 0.0;
        for d in &self.demands[next..] {
            let mut extra = self.cheapest(d).map(|(_, c)| c).unwrap_or(f64::INFINITY);
            for s in &self.slots {
                if let Some((_, c)) = self.cheapest(&(s.load + *d)) {
                    extra = extra.min(c - s.cost);
                }
                if extra <= 0.0 {
                    break;
                }
            }
            worst_extra = worst_extra.max(extra);
        }
        (self.committed + worst_extra).max(self.floor)
    }

    fn dfs(&mut self, i: usize) {
        self.nodes += 1;
        if self.nodes.is_multiple_of(4096) && Instant::now() > self.deadline {
            self.timed_out = true;
        }
        if self.timed_out {
            return;
        }
        if i == self.demands.len() {
            if self.committed < self.best_cost - COST_EPSILON {
                self.best_cost = self.committed;
                self.best = Some(
                    self.slots
                        .iter()
                        .map(|s| (s.ty, s.members.clone()))
                        .collect(),
                );
            }
            return;
        }
        if self.bound(i) >= self.best_cost - COST_EPSILON {
            return;
        }
        let d = self.demands[i];
        // existing slots; slots with identical load are interchangeable, so try only the first
        let mut tried: Vec<ResourceVector> = Vec::new();
        for s in 0..self.slots.len() {
            let load = self.slots[s].load + d;
            if tried.contains(&self.slots[s].load) {
                continue;
            }
            tried.push(self.slots[s].load);
            let Some((ty, cost)) = self.cheapest(&load) else {
                continue;
            };
            let delta = cost - self.slots[s].cost;
            if self.committed + delta >= self.best_cost - COST_EPSILON {
                continue;
            }
            let prev = (self.slots[s].load, self.slots[s].cost, self.slots[s].ty);
            {
                let slot = &mut self.slots[s];
                slot.load = load;
                slot.cost = cost;
                slot.ty = ty;
                slot.members.push(i);
            }
            self.committed += delta;
            self.dfs(i + 1);
            self.committed -= delta;
            let slot = &mut self.slots[s];
            slot.members.pop();
            (slot.load, slot.cost, slot.ty) = prev;
            if self.timed_out {
                return;
            }
        }
        // a new slot
        let (ty, cost) = self.cheapest(&d).expect("feasibility checked up front");
        if self.committed + cost < self.best_cost - COST_EPSILON {
            self.slots.push(Slot {
                load: d,
                cost,
                ty,
                members: vec![i],
            });
            self.committed += cost;
            self.dfs(i + 1);
            self.committed -= cost;
            self.slots.pop();
        }
    }
}

/// Fractional relaxation per resource: total demand priced at the best cost per unit of capacity.
pub fn fractional_lower_bound(tasks: &[Task], catalog: &Catalog) -> f64 {
    let total = ResourceVector::sum(tasks.iter().map(|t| &t.demand));
    Resource::ALL
        .iter()
        .map(|&r| {
            let need = total.amount(r);
            if need == 0.0 {
                return 0.0;
            }
            let rate = catalog
                .types()
                .iter()
                .filter(|t| t.capacity.amount(r) > 0.0)
                .map(|t| t.hourly_cost / t.capacity.amount(r))
                .fold(f64::INFINITY, f64::min);
            need * rate
        })
        .fold(0.0, f64::max)
}

/// Minimum-cost configuration by branch and bound, within `opts.budget`. If the budget runs out
/// the best configuration found so far is returned with `optimal == false`.
pub fn exact_min_cost(instance: &IlpInstance, opts: &OracleOptions) -> Result<OracleResult> {
    let n = instance.tasks.len();
    if n > opts.cap && !opts.override_cap {
        return Err(Error::OracleCapExceeded {
            tasks: n,
            cap: opts.cap,
        });
    }
    let catalog = &instance.catalog;
    for t in &instance.tasks {
        if catalog.cheapest_fitting(&t.demand).is_none() {
            return Err(Error::InfeasibleTask(t.id));
        }
    }
    if n == 0 {
        return Ok(OracleResult {
            config: ClusterConfiguration::default(),
            cost: 0.0,
            optimal: true,
            nodes: 0,
        });
    }

    // big, expensive tasks first: early slots fill up and the bound bites sooner
    let mut order: Vec<usize> = (0..n).collect();
    let rp = |i: usize| {
        catalog
            .cheapest_fitting(&instance.tasks[i].demand)
            .map(|t| t.hourly_cost)
            .unwrap_or(0.0)
    };
    order.sort_by(|&a, &b| {
        rp(b)
            .total_cmp(&rp(a))
            .then(instance.tasks[a].id.cmp(&instance.tasks[b].id))
    });

    let mut types: Vec<&InstanceType> = catalog.types().iter().collect();
    types.sort_by(|a, b| {
        a.hourly_cost
            .total_cmp(&b.hourly_cost)
            .then_with(|| a.id.cmp(&b.id))
    });

    // incumbent: one slot per task
    let incumbent = no_packing_schedule(&instance.tasks, catalog)?;
    let mut search = Search {
        demands: order.iter().map(|&i| instance.tasks[i].demand).collect(),
        types,
        slots: Vec::new(),
        committed: 0.0,
        best_cost: incumbent.hourly_cost() + COST_EPSILON * 2.0,
        best: None,
        nodes: 0,
        deadline: Instant::now() + opts.budget,
        timed_out: false,
        floor: fractional_lower_bound(&instance.tasks, catalog),
    };
    search.dfs(0);

    let config = match &search.best {
        Some(slots) => {
            let mut instances: Vec<ConfiguredInstance> = slots
                .iter()
                .map(|(ty, members)| {
                    ConfiguredInstance::new(
                        None,
                        search.types[*ty].clone(),
                        members
                            .iter()
                            .map(|&m| instance.tasks[order[m]].id)
                            .collect(),
                    )
                })
                .collect();
            instances.sort_by(|a, b| a.tasks.cmp(&b.tasks));
            ClusterConfiguration::new(instances)
        }
        None => incumbent,
    };
    let mut costs: Vec<f64> = config
        .instances
        .iter()
        .map(|i| i.instance_type.hourly_cost)
        .collect();
    costs.sort_by(f64::total_cmp);
    let cost = costs.iter().sum();
    Ok(OracleResult {
        config,
        cost,
        optimal: !search.timed_out,
        nodes: search.nodes,
    })
}

/// Checks a configuration against the integer program: every task in exactly one slot, at most
/// one slot per task, every slot of one known type (ghost slots empty) and within capacity.
pub fn validate_ilp_solution(config: &ClusterConfiguration, instance: &IlpInstance) -> bool {
    if config.instances.len() > instance.instance_slots() {
        return false;
    }
    let types = instance.types_with_ghost();
    let known = config
        .instances
        .iter()
        .all(|i| types.contains(&i.instance_type));
    known && config.validate(&instance.tasks).is_ok()
}
