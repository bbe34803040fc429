use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::task::WorkloadId;
use crate::workloads::WORKLOADS;

pub const AVG_ACQUISITION_S: f64 = 19.0;
pub const AVG_SETUP_S: f64 = 190.0;
pub const AVG_CHECKPOINT_S: f64 = 8.0;
pub const AVG_LAUNCH_S: f64 = 47.0;

/// Reconfiguration delays in seconds. Workloads without their own checkpoint or launch entry use
/// the fleet averages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DelayModel {
    pub acquisition: f64,
    pub setup: f64,
    pub checkpoint: BTreeMap<WorkloadId, f64>,
    pub launch: BTreeMap<WorkloadId, f64>,
    pub default_checkpoint: f64,
    pub default_launch: f64,
    /// Multiplies every job checkpoint and launch delay.
    pub job_delay_scale: f64,
}

impl Default for DelayModel {
    /// Averaged instance delays plus the per-workload job delays of the built-in workloads.
    fn default() -> Self {
        DelayModel {
            acquisition: AVG_ACQUISITION_S,
            setup: AVG_SETUP_S,
            checkpoint: WORKLOADS
                .iter()
                .map(|w| (WorkloadId::new(w.id), w.checkpoint_s))
                .collect(),
            launch: WORKLOADS
                .iter()
                .map(|w| (WorkloadId::new(w.id), w.launch_s))
                .collect(),
            default_checkpoint: AVG_CHECKPOINT_S,
            default_launch: AVG_LAUNCH_S,
            job_delay_scale: 1.0,
        }
    }
}

impl DelayModel {
    /// Fleet averages for every workload.
    pub fn averages() -> Self {
        DelayModel {
            checkpoint: BTreeMap::new(),
            launch: BTreeMap::new(),
            ..DelayModel::default()
        }
    }

    pub fn zero() -> Self {
        DelayModel {
            acquisition: 0.0,
            setup: 0.0,
            checkpoint: BTreeMap::new(),
            launch: BTreeMap::new(),
            default_checkpoint: 0.0,
            default_launch: 0.0,
            job_delay_scale: 1.0,
        }
    }

    pub fn with_job_delay_scale(mut self, scale: f64) -> Result<Self> {
        if !(scale >= 0.0) || !scale.is_finite() {
            return Err(Error::InvalidInput(format!(
                "delay scale must be >= 0, got {scale}"
            )));
        }
        self.job_delay_scale = scale;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            self.acquisition,
            self.setup,
            self.default_checkpoint,
            self.default_launch,
            self.job_delay_scale,
        ];
        let ok = all
            .iter()
            .chain(self.checkpoint.values())
            .chain(self.launch.values())
            .all(|v| v.is_finite() && *v >= 0.0);
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput("delays must be non-negative".into()))
        }
    }

    /// Seconds from launch request until an instance can run tasks.
    pub fn boot(&self) -> f64 {
        self.acquisition + self.setup
    }

    pub fn checkpoint(&self, w: &WorkloadId) -> f64 {
        self.checkpoint
            .get(w)
            .copied()
            .unwrap_or(self.default_checkpoint)
            * self.job_delay_scale
    }

    pub fn launch(&self, w: &WorkloadId) -> f64 {
        self.launch.get(w).copied().unwrap_or(self.default_launch) * self.job_delay_scale
    }

    /// Checkpoint plus relaunch, in seconds.
    pub fn migration(&self, w: &WorkloadId) -> f64 {
        self.checkpoint(w) + self.launch(w)
    }
}
