//! What a solve tells its caller besides the solution vector.

use std::time::Duration;

use crate::config::Method;

/// One restart cycle. `delta` is the time the cycle advanced the solution;
/// the cycle that completes the solve has `finished == true`.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleRecord {
    pub index: usize,
    pub restart_length: usize,
    pub steps: usize,
    pub delta: f64,
    /// Remaining horizon after this cycle.
    pub t_remaining: f64,
    /// Largest residual norm seen on the monitor grid at the last step.
    pub residual_max_monitor: f64,
    pub cost: f64,
    /// Shift-and-invert only: the residual injected at the restart when it
    /// exceeds the tolerance.
    pub accuracy_floor: Option<f64>,
    pub orthogonality_loss: Option<f64>,
    pub finished: bool,
}

/// One candidate restart length evaluated by the adaptive driver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LengthEstimate {
    pub k: usize,
    pub delta: f64,
    pub cost: f64,
    /// `(t / δ_k) * cost_k`
    pub estimate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdaptationReason {
    /// A cheaper candidate beat the current length by more than the threshold.
    Switched,
    /// The current length was best and was below the cap, so it grew.
    Grew,
    /// No candidate improved enough.
    Kept,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdaptationRecord {
    pub after_cycle: usize,
    pub previous_length: usize,
    pub next_length: usize,
    pub reason: AdaptationReason,
    pub candidates: Vec<LengthEstimate>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccuracyFloorWarning {
    pub cycle: usize,
    pub floor: f64,
    pub tol: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub method: Method,
    pub cycles: Vec<CycleRecord>,
    pub adaptations: Vec<AdaptationRecord>,
    pub warnings: Vec<AccuracyFloorWarning>,
    pub elapsed: Duration,
}

impl SolveReport {
    pub fn new(method: Method) -> Self {
        Self {
            method,
            cycles: Vec::new(),
            adaptations: Vec::new(),
            warnings: Vec::new(),
            elapsed: Duration::ZERO,
        }
    }

    pub fn total_steps(&self) -> usize {
        self.cycles.iter().map(|c| c.steps).sum()
    }

    /// Number of cycles that ended in a restart.
    pub fn restarts(&self) -> usize {
        self.cycles.iter().filter(|c| !c.finished).count()
    }

    pub fn total_cost(&self) -> f64 {
        self.cycles.iter().map(|c| c.cost).sum()
    }

    pub fn final_residual(&self) -> f64 {
        self.cycles.last().map_or(0.0, |c| c.residual_max_monitor)
    }

    /// Deltas of the cycles that ended in a restart, in order.
    pub fn restart_deltas(&self) -> Vec<f64> {
        self.cycles.iter().filter(|c| !c.finished).map(|c| c.delta).collect()
    }
}

/// Solution vector together with the solve history.
#[derive(Debug, Clone)]
pub struct Solution {
    pub y: Vec<f64>,
    pub report: SolveReport,
}
