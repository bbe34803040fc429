//! Scheduling policies and the per-period driver that runs them.

pub mod decision;
pub mod full;
pub mod partial;
pub mod plan;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::baselines::{exact_min_cost, no_packing_schedule, IlpInstance, OracleOptions};
use crate::catalog::Catalog;
use crate::colocation::CoLocationTable;
use crate::config::ClusterConfiguration;
use crate::error::{Error, Result};
use crate::pricing::{job_index, PricedTask, PricingMode};
use crate::sim::DelayModel;
use crate::task::TaskId;

pub use decision::{choose_configuration, mean_time_to_full, Choice, ReconfigurationDecisionModel};
pub use full::{full_reconfiguration, PackingContext};
pub use partial::partial_reconfiguration;
pub use plan::{plan_from_config, Destination, Migration, ReconfigurationPlan};

/// Live tasks by id.
pub type TaskMap = BTreeMap<TaskId, PricedTask>;

pub const DEFAULT_PERIOD_S: f64 = 300.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchedulerKind {
    /// Full/Partial ensemble with multi-task throughput-normalized pricing.
    Eva,
    /// Ensemble priced by plain reservation price.
    EvaRp,
    /// Ensemble treating every task as a single-task job.
    EvaSingle,
    EvaFullOnly,
    EvaPartialOnly,
    NoPacking,
    /// Exact minimum-cost packing every period; small inputs only.
    Oracle,
}

impl SchedulerKind {
    pub const ALL: [SchedulerKind; 7] = [
        SchedulerKind::Eva,
        SchedulerKind::EvaRp,
        SchedulerKind::EvaSingle,
        SchedulerKind::EvaFullOnly,
        SchedulerKind::EvaPartialOnly,
        SchedulerKind::NoPacking,
        SchedulerKind::Oracle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SchedulerKind::Eva => "eva",
            SchedulerKind::EvaRp => "eva-rp",
            SchedulerKind::EvaSingle => "eva-single",
            SchedulerKind::EvaFullOnly => "eva-full-only",
            SchedulerKind::EvaPartialOnly => "eva-partial-only",
            SchedulerKind::NoPacking => "no-packing",
            SchedulerKind::Oracle => "oracle",
        }
    }

    pub fn pricing_mode(self) -> PricingMode {
        match self {
            SchedulerKind::EvaRp | SchedulerKind::NoPacking | SchedulerKind::Oracle => {
                PricingMode::Rp
            }
            SchedulerKind::EvaSingle => PricingMode::TnrpSingle,
            _ => PricingMode::Tnrp,
        }
    }
}

impl fmt::Display for SchedulerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchedulerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SchedulerKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown scheduler {s:?}")))
    }
}

/// What the ensemble does before its decision model has warmed up.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColdStartPolicy {
    Partial,
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchedulerParams {
    pub period_s: f64,
    /// Throughput assumed for co-located pairs that have never been observed.
    pub default_pairwise: f64,
    pub window_hours: f64,
    pub cold_start: ColdStartPolicy,
    pub oracle_cap: usize,
    pub oracle_budget_ms: u64,
}

impl Default for SchedulerParams {
    fn default() -> Self {
        SchedulerParams {
            period_s: DEFAULT_PERIOD_S,
            default_pairwise: crate::colocation::DEFAULT_PAIRWISE_THROUGHPUT,
            window_hours: decision::DEFAULT_WINDOW_HOURS,
            cold_start: ColdStartPolicy::Partial,
            oracle_cap: crate::baselines::DEFAULT_ORACLE_CAP,
            oracle_budget_ms: 10_000,
        }
    }
}

/// A read-only snapshot handed to the scheduler at the end of a period.
pub struct SchedulerState<'a> {
    pub current: &'a ClusterConfiguration,
    pub unassigned: &'a [TaskId],
    /// Every live task, assigned or not.
    pub tasks: &'a TaskMap,
    pub table: &'a CoLocationTable,
}

#[derive(Debug, Clone)]
pub struct Decision {
    pub plan: ReconfigurationPlan,
    /// Set for the ensemble and the single-algorithm variants.
    pub choice: Option<Choice>,
}

pub struct Scheduler {
    kind: SchedulerKind,
    params: SchedulerParams,
    model: ReconfigurationDecisionModel,
}

impl Scheduler {
    pub fn new(kind: SchedulerKind, params: SchedulerParams) -> Self {
        let model = ReconfigurationDecisionModel::new(0.0, params.window_hours);
        Scheduler {
            kind,
            params,
            model,
        }
    }

    pub fn kind(&self) -> SchedulerKind {
        self.kind
    }

    pub fn params(&self) -> &SchedulerParams {
        &self.params
    }

    pub fn model(&self) -> &ReconfigurationDecisionModel {
        &self.model
    }

    /// Runs one scheduling period. `event_times` are the arrivals and completions since the
    /// previous period.
    pub fn schedule(
        &mut self,
        state: &SchedulerState<'_>,
        catalog: &Catalog,
        delays: &DelayModel,
        now: f64,
        event_times: &[f64],
    ) -> Result<Decision> {
        let jobs = job_index(state.tasks.values());
        let ctx = PackingContext {
            catalog,
            table: state.table,
            jobs: &jobs,
            mode: self.kind.pricing_mode(),
        };
        let plan_of = |cfg: &ClusterConfiguration| {
            plan_from_config(cfg, state.current, state.tasks, delays, &ctx)
        };
        let all: Vec<&PricedTask> = state.tasks.values().collect();

        let decision = match self.kind {
            SchedulerKind::NoPacking => {
                let mut cfg = ClusterConfiguration::new(
                    state
                        .current
                        .instances
                        .iter()
                        .filter(|i| !i.tasks.is_empty())
                        .cloned()
                        .collect(),
                );
                let fresh: Vec<_> = state
                    .unassigned
                    .iter()
                    .filter_map(|id| state.tasks.get(id))
                    .map(|p| p.task.clone())
                    .collect();
                cfg.instances
                    .extend(no_packing_schedule(&fresh, catalog)?.instances);
                Decision {
                    plan: plan_of(&cfg),
                    choice: None,
                }
            }
            SchedulerKind::Oracle => {
                let tasks: Vec<_> = all.iter().map(|p| p.task.clone()).collect();
                let opts = OracleOptions {
                    budget: Duration::from_millis(self.params.oracle_budget_ms),
                    cap: self.params.oracle_cap,
                    override_cap: false,
                };
                let res = exact_min_cost(&IlpInstance::new(tasks, catalog.clone()), &opts)?;
                Decision {
                    plan: plan_of(&res.config),
                    choice: None,
                }
            }
            SchedulerKind::EvaFullOnly => Decision {
                plan: plan_of(&full_reconfiguration(&all, &ctx)),
                choice: Some(Choice::Full),
            },
            SchedulerKind::EvaPartialOnly => {
                let cfg =
                    partial_reconfiguration(state.current, state.unassigned, state.tasks, &ctx);
                Decision {
                    plan: plan_of(&cfg),
                    choice: Some(Choice::Partial),
                }
            }
            SchedulerKind::Eva | SchedulerKind::EvaRp | SchedulerKind::EvaSingle => {
                let full = plan_of(&full_reconfiguration(&all, &ctx));
                let partial = plan_of(&partial_reconfiguration(
                    state.current,
                    state.unassigned,
                    state.tasks,
                    &ctx,
                ));
                let choice = match self.model.estimate_mean_duration() {
                    Err(_) if self.params.cold_start == ColdStartPolicy::Full => Choice::Full,
                    _ => choose_configuration(&full, &partial, &self.model).1,
                };
                let plan = if choice == Choice::Full {
                    full
                } else {
                    partial
                };
                Decision {
                    plan,
                    choice: Some(choice),
                }
            }
        };
        self.model
            .update(now, event_times, decision.choice == Some(Choice::Full));
        Ok(decision)
    }
}
