//! Versioned run summary written to `metrics.json`. Wall-clock timings live in a separate
//! file so that repeated runs produce identical metrics.

use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub schema_version: u32,
    pub seed: u64,
    /// `gp` or `exact`.
    pub model: String,
    pub tracking: TrackingMetrics,
    pub hamiltonian: HamiltonianMetrics,
    pub energy_balance: EnergyMetrics,
    pub conditions: ConditionMetrics,
    pub hd_minimum: HdMinimumMetrics,
    pub plan: PlanMetrics,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub learned: Option<LearnedMetrics>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackingMetrics {
    /// `max_t |x_i(t) - x_d,i(t)|` per state.
    pub max_abs_error: Vec<f64>,
    pub mean_abs_error: Vec<f64>,
    pub initial_error: Vec<f64>,
    pub final_error: Vec<f64>,
    pub horizon: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianMetrics {
    pub initial: f64,
    #[serde(rename = "final")]
    pub final_value: f64,
    pub max: f64,
    /// Steps on which `H_d` grew by more than `tolerance`.
    pub increase_events: usize,
    pub max_increase: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyMetrics {
    /// Largest power-balance residual of the open-loop dataset simulation.
    pub open_loop_max_residual: f64,
    /// Same along the closed-loop run.
    pub closed_loop_max_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionMetrics {
    /// `null` when negative margins reach the edge of the sampled region.
    pub epsilon: Option<f64>,
    pub satisfied: bool,
    pub worst_margin: f64,
    /// Fraction of sampled states with a negative worst-case margin.
    pub violation_fraction: f64,
    /// Radius bound on the tracking error implied by `epsilon`.
    pub ultimate_bound: Option<f64>,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HdMinimumMetrics {
    pub passed: bool,
    pub argmin: Vec<f64>,
    pub gap: f64,
    /// Minimizer of the learned Hamiltonian, removed from `H_d`.
    pub shift: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanMetrics {
    pub points: usize,
    pub t_end: f64,
    /// Largest matching residual re-evaluated on the plan grid.
    pub max_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnedMetrics {
    pub signal_std: f64,
    pub lengthscales: Vec<f64>,
    pub noise_variance: Vec<f64>,
    pub damping: f64,
    pub resistance: f64,
    pub nlml: f64,
    pub jitter: f64,
}

impl MetricsReport {
    /// Checks that every number in the report is finite.
    pub fn all_finite(&self) -> bool {
        let t = &self.tracking;
        let h = &self.hamiltonian;
        let mut v: Vec<f64> = Vec::new();
        v.extend(&t.max_abs_error);
        v.extend(&t.mean_abs_error);
        v.extend(&t.initial_error);
        v.extend(&t.final_error);
        v.extend([t.horizon, h.initial, h.final_value, h.max, h.max_increase, h.tolerance]);
        v.extend([self.energy_balance.open_loop_max_residual, self.energy_balance.closed_loop_max_residual]);
        v.push(self.conditions.worst_margin);
        v.push(self.conditions.violation_fraction);
        v.extend(self.conditions.epsilon);
        v.extend(self.conditions.ultimate_bound);
        v.extend(&self.hd_minimum.argmin);
        v.extend(&self.hd_minimum.shift);
        v.push(self.hd_minimum.gap);
        v.extend([self.plan.t_end, self.plan.max_residual]);
        if let Some(l) = &self.learned {
            v.extend(&l.lengthscales);
            v.extend(&l.noise_variance);
            v.extend([l.signal_std, l.damping, l.resistance, l.nlml, l.jitter]);
        }
        v.iter().all(|x| x.is_finite())
    }
}
