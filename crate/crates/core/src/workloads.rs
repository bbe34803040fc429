//! Built-in reference data: the four-type worked example, the ten benchmark workloads and a
//! cloud catalog shaped after GPU, compute-optimized and memory-optimized instance families.

use crate::catalog::{Catalog, InstanceType};
use crate::resources::ResourceVector;
use crate::task::{JobId, Task, TaskId, WorkloadId};

/// A benchmark workload: its per-task demand and its job migration delays in seconds.
#[derive(Debug, Clone, PartialEq)]
pub struct WorkloadProfile {
    pub id: &'static str,
    pub demand: ResourceVector,
    pub checkpoint_s: f64,
    pub launch_s: f64,
}

pub const WORKLOADS: [WorkloadProfile; 10] = [
    WorkloadProfile {
        id: "resnet18-2",
        demand: ResourceVector::whole(1, 4, 24),
        checkpoint_s: 2.0,
        launch_s: 80.0,
    },
    WorkloadProfile {
        id: "resnet18-4",
        demand: ResourceVector::whole(1, 4, 24),
        checkpoint_s: 2.0,
        launch_s: 80.0,
    },
    WorkloadProfile {
        id: "vit",
        demand: ResourceVector::whole(2, 8, 60),
        checkpoint_s: 3.0,
        launch_s: 143.0,
    },
    WorkloadProfile {
        id: "cyclegan",
        demand: ResourceVector::whole(1, 4, 10),
        checkpoint_s: 7.0,
        launch_s: 2.0,
    },
    WorkloadProfile {
        id: "gpt2",
        demand: ResourceVector::whole(4, 4, 10),
        checkpoint_s: 30.0,
        launch_s: 15.0,
    },
    WorkloadProfile {
        id: "graphsage",
        demand: ResourceVector::whole(1, 8, 50),
        checkpoint_s: 2.0,
        launch_s: 160.0,
    },
    WorkloadProfile {
        id: "gcn",
        demand: ResourceVector::whole(0, 12, 40),
        checkpoint_s: 2.0,
        launch_s: 28.0,
    },
    WorkloadProfile {
        id: "a3c",
        demand: ResourceVector::whole(0, 10, 8),
        checkpoint_s: 2.0,
        launch_s: 10.0,
    },
    WorkloadProfile {
        id: "diamond",
        demand: ResourceVector::whole(0, 14, 16),
        checkpoint_s: 8.0,
        launch_s: 12.0,
    },
    WorkloadProfile {
        id: "openfoam",
        demand: ResourceVector::whole(0, 8, 8),
        checkpoint_s: 21.0,
        launch_s: 1.0,
    },
];

pub fn workload(id: &str) -> Option<&'static WorkloadProfile> {
    WORKLOADS.iter().find(|w| w.id == id)
}

fn ty(id: &str, gpu: u32, cpu: u32, ram: u32, cost: f64) -> InstanceType {
    InstanceType::new(id, ResourceVector::whole(gpu, cpu, ram), cost)
        .expect("built-in type is valid")
}

/// The four instance types of the reservation-price worked example.
pub fn worked_example_catalog() -> Catalog {
    Catalog::new(vec![
        ty("it1", 4, 16, 244, 12.0),
        ty("it2", 1, 4, 61, 3.0),
        ty("it3", 0, 8, 32, 0.8),
        ty("it4", 0, 4, 16, 0.4),
    ])
    .expect("built-in catalog is valid")
}

/// The four single-task jobs of the worked example, as tasks 1..=4 of jobs 1..=4.
pub fn worked_example_tasks() -> Vec<Task> {
    [(2, 8, 24), (1, 4, 10), (0, 6, 20), (0, 4, 12)]
        .iter()
        .enumerate()
        .map(|(i, &(g, c, r))| Task {
            id: TaskId(i as u32 + 1),
            job_id: JobId(i as u32 + 1),
            workload_id: WorkloadId::new(format!("tau{}", i + 1)),
            demand: ResourceVector::whole(g, c, r),
        })
        .collect()
}

/// Twenty-one on-demand types from a GPU, a compute-optimized and a memory-optimized family,
/// at list prices.
pub fn cloud_catalog() -> Catalog {
    let mut types = vec![
        ty("p3.2xlarge", 1, 8, 61, 3.06),
        ty("p3.8xlarge", 4, 32, 244, 12.24),
        ty("p3.16xlarge", 8, 64, 488, 24.48),
    ];
    // (suffix, vCPUs); both families price linearly in size
    let sizes = [
        ("large", 2),
        ("xlarge", 4),
        ("2xlarge", 8),
        ("4xlarge", 16),
        ("8xlarge", 32),
        ("12xlarge", 48),
        ("16xlarge", 64),
        ("24xlarge", 96),
        ("48xlarge", 192),
    ];
    for (suffix, cpu) in sizes {
        types.push(ty(
            &format!("c7i.{suffix}"),
            0,
            cpu,
            cpu * 2,
            0.044625 * cpu as f64,
        ));
    }
    for (suffix, cpu) in sizes {
        types.push(ty(
            &format!("r7i.{suffix}"),
            0,
            cpu,
            cpu * 8,
            0.06615 * cpu as f64,
        ));
    }
    Catalog::new(types).expect("built-in catalog is valid")
}
