//! Experiment drivers shared by the command line and the acceptance suite.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::baselines::{exact_min_cost, no_packing_schedule, IlpInstance, OracleOptions};
use crate::catalog::Catalog;
use crate::colocation::CoLocationTable;
use crate::error::{Error, Result};
use crate::pricing::{job_index, PricedTask, PricingMode};
use crate::resources::ResourceVector;
use crate::scheduler::{full_reconfiguration, PackingContext, SchedulerKind};
use crate::sim::{run_simulation, GroundTruthInterference, SimConfig, SimReport, Trace};
use crate::task::{JobId, Task, TaskId, WorkloadId};
use crate::workloads::WORKLOADS;

/// `n` single-task jobs whose tasks copy uniformly sampled built-in workloads.
pub fn sample_workload_tasks(n: usize, rng: &mut impl Rng) -> Vec<Task> {
    (0..n)
        .map(|i| {
            let w = &WORKLOADS[rng.random_range(0..WORKLOADS.len())];
            Task {
                id: TaskId(i as u32),
                job_id: JobId(i as u32),
                workload_id: WorkloadId::new(w.id),
                demand: w.demand,
            }
        })
        .collect()
}

/// `n` tasks with independently drawn demands, each fitting the largest catalog types.
pub fn synthetic_tasks(n: usize, seed: u64) -> Vec<Task> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let gpu = if rng.random_bool(0.5) {
                rng.random_range(0..=4)
            } else {
                0
            };
            let cpu = rng.random_range(1..=16);
            let ram = rng.random_range(1..=64) as f64;
            Task {
                id: TaskId(i as u32),
                job_id: JobId(i as u32),
                workload_id: WorkloadId::new(format!("w{}", rng.random_range(0..10))),
                demand: ResourceVector::new(gpu, cpu, ram).expect("valid demand"),
            }
        })
        .collect()
}

/// Full Reconfiguration with plain reservation prices, as used for pure provisioning.
pub fn full_reconfiguration_rp(
    tasks: &[Task],
    catalog: &Catalog,
) -> Result<crate::config::ClusterConfiguration> {
    let priced: Vec<PricedTask> = tasks
        .iter()
        .map(|t| PricedTask::new(t.clone(), catalog))
        .collect::<Result<_>>()?;
    let refs: Vec<&PricedTask> = priced.iter().collect();
    let jobs = job_index(priced.iter());
    let table = CoLocationTable::new(1.0)?;
    let ctx = PackingContext {
        catalog,
        table: &table,
        jobs: &jobs,
        mode: PricingMode::Rp,
    };
    Ok(full_reconfiguration(&refs, &ctx))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProvisionTrial {
    pub trial: usize,
    pub no_packing_cost: f64,
    pub full_reconfig_cost: f64,
    pub oracle_cost: Option<f64>,
    pub oracle_optimal: Option<bool>,
    pub no_packing_s: f64,
    pub full_reconfig_s: f64,
    pub oracle_s: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnSummary {
    pub mean: f64,
    pub std: f64,
}

impl ColumnSummary {
    fn of(xs: &[f64]) -> Self {
        let n = xs.len().max(1) as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        ColumnSummary {
            mean,
            std: var.sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProvisionBenchReport {
    pub trials: Vec<ProvisionTrial>,
    /// Costs over the oracle cost of the same trial; absent without the oracle.
    pub no_packing_normalized: Option<ColumnSummary>,
    pub full_reconfig_normalized: Option<ColumnSummary>,
    pub no_packing_runtime_s: ColumnSummary,
    pub full_reconfig_runtime_s: ColumnSummary,
    pub oracle_runtime_s: Option<ColumnSummary>,
    pub all_optimal: bool,
}

#[derive(Debug, Clone)]
pub struct ProvisionBenchParams {
    pub trials: usize,
    pub tasks_per_trial: usize,
    pub seed: u64,
    pub include_oracle: bool,
    pub oracle: OracleOptions,
}

impl Default for ProvisionBenchParams {
    fn default() -> Self {
        ProvisionBenchParams {
            trials: 30,
            tasks_per_trial: 12,
            seed: 0,
            include_oracle: true,
            oracle: OracleOptions::default(),
        }
    }
}

/// Instantaneous provisioning cost of No-Packing, Full Reconfiguration and the exact oracle on
/// random task sets drawn from the built-in workloads.
pub fn provision_bench(
    params: &ProvisionBenchParams,
    catalog: &Catalog,
) -> Result<ProvisionBenchReport> {
    if params.trials == 0 || params.tasks_per_trial == 0 {
        return Err(Error::InvalidInput(
            "trials and tasks per trial must be positive".into(),
        ));
    }
    if params.include_oracle
        && params.tasks_per_trial > params.oracle.cap
        && !params.oracle.override_cap
    {
        return Err(Error::OracleCapExceeded {
            tasks: params.tasks_per_trial,
            cap: params.oracle.cap,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut trials = Vec::with_capacity(params.trials);
    for trial in 0..params.trials {
        let tasks = sample_workload_tasks(params.tasks_per_trial, &mut rng);
        let t0 = Instant::now();
        let np = no_packing_schedule(&tasks, catalog)?;
        let no_packing_s = t0.elapsed().as_secs_f64();
        let t0 = Instant::now();
        let full = full_reconfiguration_rp(&tasks, catalog)?;
        let full_reconfig_s = t0.elapsed().as_secs_f64();
        let (oracle_cost, oracle_optimal, oracle_s) = if params.include_oracle {
            let t0 = Instant::now();
            let res = exact_min_cost(
                &IlpInstance::new(tasks.clone(), catalog.clone()),
                &params.oracle,
            )?;
            (
                Some(res.cost),
                Some(res.optimal),
                Some(t0.elapsed().as_secs_f64()),
            )
        } else {
            (None, None, None)
        };
        trials.push(ProvisionTrial {
            trial,
            no_packing_cost: np.hourly_cost(),
            full_reconfig_cost: full.hourly_cost(),
            oracle_cost,
            oracle_optimal,
            no_packing_s,
            full_reconfig_s,
            oracle_s,
        });
    }
    let col = |f: &dyn Fn(&ProvisionTrial) -> f64| {
        ColumnSummary::of(&trials.iter().map(f).collect::<Vec<_>>())
    };
    let norm = |f: fn(&ProvisionTrial) -> f64| {
        params
            .include_oracle
            .then(|| col(&|t: &ProvisionTrial| f(t) / t.oracle_cost.expect("oracle ran")))
    };
    Ok(ProvisionBenchReport {
        no_packing_normalized: norm(|t| t.no_packing_cost),
        full_reconfig_normalized: norm(|t| t.full_reconfig_cost),
        no_packing_runtime_s: col(&|t| t.no_packing_s),
        full_reconfig_runtime_s: col(&|t| t.full_reconfig_s),
        oracle_runtime_s: params
            .include_oracle
            .then(|| col(&|t| t.oracle_s.expect("oracle ran"))),
        all_optimal: trials.iter().all(|t| t.oracle_optimal != Some(false)),
        trials,
    })
}

/// Runs every scheduler in `kinds` on the same inputs. Reports carry their cost normalized to
/// No-Packing, which is run as well if it is not among `kinds`.
pub fn compare_schedulers(
    trace: &Trace,
    catalog: &Catalog,
    truth: &GroundTruthInterference,
    kinds: &[SchedulerKind],
    base: &SimConfig,
) -> Result<Vec<SimReport>> {
    let run = |k: SchedulerKind| {
        run_simulation(
            trace,
            catalog,
            truth,
            &SimConfig {
                scheduler: k,
                ..base.clone()
            },
        )
    };
    let mut reports: Vec<SimReport> = kinds.iter().map(|&k| run(k)).collect::<Result<_>>()?;
    let baseline = match kinds.iter().position(|&k| k == SchedulerKind::NoPacking) {
        Some(i) => reports[i].total_cost,
        None => run(SchedulerKind::NoPacking)?.total_cost,
    };
    for r in &mut reports {
        r.normalized_cost = (baseline > 0.0).then(|| r.total_cost / baseline);
    }
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::workloads::cloud_catalog;

    #[test]
    fn bench_shape() {
        let p = ProvisionBenchParams {
            trials: 3,
            tasks_per_trial: 6,
            ..ProvisionBenchParams::default()
        };
        let r = provision_bench(&p, &cloud_catalog()).unwrap();
        assert_eq!(r.trials.len(), 3);
        assert!(r.all_optimal);
        for t in &r.trials {
            let o = t.oracle_cost.unwrap();
            assert!(
                o <= t.full_reconfig_cost + 1e-9
                    && t.full_reconfig_cost <= t.no_packing_cost + 1e-9
            );
        }
        assert!(r.no_packing_normalized.unwrap().mean >= 1.0);
        let too_big = ProvisionBenchParams {
            tasks_per_trial: 40,
            ..p
        };
        assert!(provision_bench(&too_big, &cloud_catalog()).is_err());
    }

    #[test]
    fn synthetic_tasks_fit() {
        let cat = cloud_catalog();
        assert!(synthetic_tasks(200, 1)
            .iter()
            .all(|t| cat.cheapest_fitting(&t.demand).is_some()));
        assert_eq!(synthetic_tasks(5, 9), synthetic_tasks(5, 9));
    }
}
