//! End-to-end properties of simulated runs.

use eva_core::scheduler::{SchedulerKind, SchedulerParams};
use eva_core::sim::{
    generate_trace, run_simulation, DelayModel, DurationModel, GroundTruthInterference, SimConfig,
    SimReport, Trace, TraceParams,
};
use eva_core::workloads::cloud_catalog;
use eva_core::WorkloadId;

fn trace(seed: u64, multi: f64) -> Trace {
    generate_trace(&TraceParams {
        num_jobs: 30,
        multi_task_fraction: multi,
        seed,
        ..TraceParams::default()
    })
    .unwrap()
}

fn run(
    t: &Trace,
    g: &GroundTruthInterference,
    kind: SchedulerKind,
    delays: DelayModel,
    params: SchedulerParams,
) -> SimReport {
    run_simulation(
        t,
        &cloud_catalog(),
        g,
        &SimConfig {
            scheduler: kind,
            params,
            delays,
            seed: 0,
        },
    )
    .unwrap()
}

#[test]
fn every_job_finishes_no_sooner_than_its_work() {
    let g = GroundTruthInterference::uniform(0.9).unwrap();
    for kind in [
        SchedulerKind::Eva,
        SchedulerKind::EvaRp,
        SchedulerKind::EvaSingle,
        SchedulerKind::NoPacking,
    ] {
        let t = trace(3, 0.5);
        let r = run(
            &t,
            &g,
            kind,
            DelayModel::default(),
            SchedulerParams::default(),
        );
        assert_eq!(r.jobs_completed, t.jobs.len());
        for j in &r.jobs {
            assert!(
                j.jct_hours + 1e-9 >= j.work_hours,
                "{kind}: job {} ran faster than alone",
                j.job_id
            );
            assert!(j.idle_hours >= 0.0 && j.idle_hours <= j.jct_hours + 1e-9);
            assert!(j.completion_s >= j.arrival_s);
        }
        assert!((r.total_cost - r.cost_from_instance_log()).abs() < 1e-6 * r.total_cost.max(1.0));
        for i in &r.instances {
            assert!(i.launch_s <= i.ready_s && i.ready_s <= i.end_s);
        }
    }
}

#[test]
fn packing_is_never_costlier_without_interference_or_delays() {
    let g = GroundTruthInterference::uniform(1.0).unwrap();
    let params = SchedulerParams {
        default_pairwise: 1.0,
        ..SchedulerParams::default()
    };
    for seed in 0..3 {
        let t = trace(seed, 0.0);
        let np = run(
            &t,
            &g,
            SchedulerKind::NoPacking,
            DelayModel::zero(),
            params.clone(),
        );
        let eva = run(
            &t,
            &g,
            SchedulerKind::Eva,
            DelayModel::zero(),
            params.clone(),
        );
        assert!(
            eva.total_cost <= np.total_cost + 1e-6,
            "seed {seed}: {} > {}",
            eva.total_cost,
            np.total_cost
        );
        // no slowdown means identical completion times
        for (a, b) in eva.jobs.iter().zip(&np.jobs) {
            assert!((a.jct_hours - b.jct_hours).abs() < 1e-6);
        }
    }
}

#[test]
fn no_packing_keeps_one_task_per_instance() {
    let g = GroundTruthInterference::uniform(0.8).unwrap();
    let r = run(
        &trace(5, 0.3),
        &g,
        SchedulerKind::NoPacking,
        DelayModel::default(),
        SchedulerParams::default(),
    );
    assert!((r.tasks_per_instance - 1.0).abs() < 1e-9);
    assert_eq!(r.migrations_per_task, 0.0);
    assert!(r.full_adoption_fraction.is_none());
}

#[test]
fn reports_round_trip_and_repeat() {
    let ws: Vec<WorkloadId> = eva_core::workloads::WORKLOADS
        .iter()
        .map(|w| WorkloadId::new(w.id))
        .collect();
    let g = GroundTruthInterference::synthetic(&ws, 0.64, 2).unwrap();
    let t = trace(9, 0.5);
    let a = run(
        &t,
        &g,
        SchedulerKind::Eva,
        DelayModel::default(),
        SchedulerParams::default(),
    );
    let b = run(
        &t,
        &g,
        SchedulerKind::Eva,
        DelayModel::default(),
        SchedulerParams::default(),
    );
    assert_eq!(a, b);
    assert_eq!(SimReport::from_json(&a.to_json().unwrap()).unwrap(), a);
    let f = a.full_adoption_fraction.unwrap();
    assert!((0.0..=1.0).contains(&f));
}

#[test]
fn longer_delays_never_speed_jobs_up() {
    let g = GroundTruthInterference::uniform(1.0).unwrap();
    let t = generate_trace(&TraceParams {
        num_jobs: 20,
        duration: DurationModel::Gavel,
        seed: 1,
        ..TraceParams::default()
    })
    .unwrap();
    let fast = run(
        &t,
        &g,
        SchedulerKind::NoPacking,
        DelayModel::zero(),
        SchedulerParams::default(),
    );
    let slow = run(
        &t,
        &g,
        SchedulerKind::NoPacking,
        DelayModel::default(),
        SchedulerParams::default(),
    );
    for (a, b) in fast.jobs.iter().zip(&slow.jobs) {
        assert!(a.jct_hours <= b.jct_hours + 1e-9);
    }
    assert!(fast.total_cost <= slow.total_cost);
}
