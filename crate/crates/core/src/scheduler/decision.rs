//! Choosing between the Full and Partial plans.
//!
//! Arrivals and completions ("events") are modeled as a Poisson process of rate λ, each of which
//! triggers a Full Reconfiguration with probability p. The expected lifetime of a new
//! configuration is then −1 / (λ ln(1 − p)) hours, which weighs hourly savings against one-off
//! migration cost.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scheduler::plan::ReconfigurationPlan;

pub const DEFAULT_WINDOW_HOURS: f64 = 24.0;
/// The model stays cold until this much simulated time has been observed.
pub const WARMUP_HOURS: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconfigurationDecisionModel {
    /// Timestamps (seconds) of the events inside the sliding window.
    events: VecDeque<f64>,
    pub event_count: u64,
    pub full_adoption_count: u64,
    /// Seconds; when observation started.
    pub window_start: f64,
    pub window_hours: f64,
    now: f64,
}

impl ReconfigurationDecisionModel {
    pub fn new(window_start: f64, window_hours: f64) -> Self {
        ReconfigurationDecisionModel {
            events: VecDeque::new(),
            event_count: 0,
            full_adoption_count: 0,
            window_start,
            window_hours,
            now: window_start,
        }
    }

    fn elapsed_hours(&self) -> f64 {
        (self.now - self.window_start) / 3600.0
    }

    /// Events per hour over the sliding window, once warm.
    pub fn lambda_hat(&self) -> Option<f64> {
        let elapsed = self.elapsed_hours();
        if elapsed < WARMUP_HOURS || self.events.is_empty() {
            return None;
        }
        Some(self.events.len() as f64 / elapsed.min(self.window_hours))
    }

    /// Add-one smoothed share of events that ended in a Full adoption.
    pub fn p_hat(&self) -> f64 {
        (self.full_adoption_count as f64 + 1.0) / (self.event_count as f64 + 2.0)
    }

    /// Folds one scheduling period into the estimates. `adopted_full` only counts when the period
    /// saw at least one event, so the trigger probability stays below one.
    pub fn update(&mut self, now: f64, event_times: &[f64], adopted_full: bool) {
        self.now = self.now.max(now);
        self.events.extend(event_times.iter().copied());
        self.event_count += event_times.len() as u64;
        if adopted_full && !event_times.is_empty() {
            self.full_adoption_count += 1;
        }
        let horizon = self.now - self.window_hours * 3600.0;
        while self.events.front().is_some_and(|&t| t < horizon) {
            self.events.pop_front();
        }
    }

    /// Mean hours until the next Full Reconfiguration.
    pub fn estimate_mean_duration(&self) -> Result<f64> {
        let lambda = self.lambda_hat().ok_or(Error::ColdModel)?;
        mean_time_to_full(lambda, self.p_hat())
    }
}

/// −1 / (λ ln(1 − p)), in hours for λ in events per hour.
pub fn mean_time_to_full(lambda: f64, p: f64) -> Result<f64> {
    if !(lambda > 0.0) || !(p > 0.0 && p < 1.0) {
        return Err(Error::ColdModel);
    }
    Ok(-1.0 / (lambda * (1.0 - p).ln()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Choice {
    Full,
    Partial,
}

/// Full wins only if S_F·D − M_F > S_P·D − M_P strictly. A cold model picks Partial.
pub fn choose_by_duration(
    full: &ReconfigurationPlan,
    partial: &ReconfigurationPlan,
    duration_hours: Result<f64>,
) -> Choice {
    match duration_hours {
        Ok(d)
            if full.saving * d - full.migration_cost
                > partial.saving * d - partial.migration_cost =>
        {
            Choice::Full
        }
        _ => Choice::Partial,
    }
}

pub fn choose_configuration<'p>(
    full: &'p ReconfigurationPlan,
    partial: &'p ReconfigurationPlan,
    model: &ReconfigurationDecisionModel,
) -> (&'p ReconfigurationPlan, Choice) {
    match choose_by_duration(full, partial, model.estimate_mean_duration()) {
        Choice::Full => (full, Choice::Full),
        Choice::Partial => (partial, Choice::Partial),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ClusterConfiguration;

    fn plan(saving: f64, migration_cost: f64) -> ReconfigurationPlan {
        ReconfigurationPlan {
            config: ClusterConfiguration::default(),
            saving,
            migration_cost,
            migrations: vec![],
            launches: vec![],
            terminations: vec![],
        }
    }

    #[test]
    fn closed_form_examples() {
        assert!((mean_time_to_full(2.0, 0.5).unwrap() - 0.721_347_520_444_481_7).abs() < 1e-12);
        assert!((mean_time_to_full(1.0, 1.0 - (-1.0f64).exp()).unwrap() - 1.0).abs() < 1e-12);
        assert!(mean_time_to_full(1.0, 1.0 - 1e-15).unwrap() < 0.03);
        assert!(mean_time_to_full(0.0, 0.5).is_err());
        assert!(mean_time_to_full(1.0, 1.0).is_err());
    }

    #[test]
    fn full_needs_a_strict_win() {
        assert_eq!(
            choose_by_duration(&plan(1.0, 2.0), &plan(1.0, 1.0), Ok(0.7213)),
            Choice::Partial
        );
        assert_eq!(
            choose_by_duration(&plan(2.0, 1.0), &plan(1.0, 1.0), Ok(0.7213)),
            Choice::Full
        );
        assert_eq!(
            choose_by_duration(&plan(2.0, 2.0), &plan(1.0, 1.0), Ok(0.7213)),
            Choice::Partial
        );
        // equality goes to Partial
        assert_eq!(
            choose_by_duration(&plan(2.0, 2.0), &plan(1.0, 1.0), Ok(1.0)),
            Choice::Partial
        );
        assert_eq!(
            choose_by_duration(&plan(9.0, 0.0), &plan(0.0, 0.0), Err(Error::ColdModel)),
            Choice::Partial
        );
    }

    #[test]
    fn estimates() {
        let mut m = ReconfigurationDecisionModel::new(0.0, DEFAULT_WINDOW_HOURS);
        assert!(m.estimate_mean_duration().is_err());
        let times: Vec<f64> = (0..10).map(|i| i as f64 * 700.0).collect();
        m.update(7200.0, &times, false);
        assert_eq!(m.lambda_hat(), Some(5.0));
        let mut m = ReconfigurationDecisionModel::new(0.0, DEFAULT_WINDOW_HOURS);
        m.update(3600.0 * 3.0, &[1.0; 8], false);
        assert!((m.p_hat() - 0.1).abs() < 1e-12);
        let mut cold = ReconfigurationDecisionModel::new(0.0, DEFAULT_WINDOW_HOURS);
        cold.update(3.0 * 3600.0, &[], true);
        assert_eq!(cold.lambda_hat(), None);
        assert_eq!(
            choose_configuration(&plan(100.0, 0.0), &plan(0.0, 0.0), &cold).1,
            Choice::Partial
        );
    }

    #[test]
    fn window_slides() {
        let mut m = ReconfigurationDecisionModel::new(0.0, 2.0);
        m.update(3600.0, &[10.0, 20.0], false);
        m.update(4.0 * 3600.0, &[4.0 * 3600.0], false);
        assert_eq!(m.lambda_hat(), Some(0.5));
        assert_eq!(m.event_count, 3);
    }
}
