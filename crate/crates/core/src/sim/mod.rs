//! The simulated cloud: traces, ground-truth interference, reconfiguration delays and the event
//! loop that ties them to a scheduler.

pub mod delays;
pub mod engine;
pub mod interference;
pub mod report;
pub mod trace;

pub use delays::DelayModel;
pub use engine::{measure_allocation, run_simulation, EventKind, SimConfig, SimEvent, Simulation};
pub use interference::GroundTruthInterference;
pub use report::{Allocation, InstanceRecord, JobRecord, SimReport, REPORT_SCHEMA_VERSION};
pub use trace::{generate_trace, DurationModel, Trace, TraceParams};
