//! Cost-aware provisioning and placement for cloud batch clusters, plus a discrete-event cloud
//! simulator to evaluate it.
// Negated float comparisons are deliberate: they reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod catalog;
pub mod colocation;
pub mod config;
pub mod error;
pub mod experiments;
pub mod pricing;
pub mod resources;
pub mod scheduler;
pub mod sim;
pub mod task;
pub mod workloads;

pub use catalog::{Catalog, InstanceType, InstanceTypeId};
pub use colocation::CoLocationTable;
pub use config::{ClusterConfiguration, ConfiguredInstance, InstanceId};
pub use error::{Error, Result};
pub use resources::{Resource, ResourceVector};
pub use task::{Job, JobId, Task, TaskId, WorkloadId};
