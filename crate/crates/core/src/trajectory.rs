use alloc::vec::Vec;
use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::phs::PhsModel;

/// Time-stamped states with the inputs applied (and optionally the port outputs observed).
///
/// Times are in milliseconds.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    times: Vec<f64>,
    states: Vec<DVector<f64>>,
    inputs: Vec<DVector<f64>>,
    outputs: Option<Vec<DVector<f64>>>,
}

impl Trajectory {
    pub fn new(
        times: Vec<f64>,
        states: Vec<DVector<f64>>,
        inputs: Vec<DVector<f64>>,
        outputs: Option<Vec<DVector<f64>>>,
    ) -> Result<Self> {
        let len = times.len();
        if states.len() != len || inputs.len() != len || outputs.as_ref().is_some_and(|o| o.len() != len) {
            return Err(Error::invalid("trajectory columns differ in length"));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("trajectory times must be strictly increasing"));
        }
        if let Some(x) = states.first() {
            if states.iter().any(|s| s.len() != x.len()) {
                return Err(Error::invalid("states differ in dimension"));
            }
        }
        if let Some(u) = inputs.first() {
            if inputs.iter().any(|s| s.len() != u.len()) {
                return Err(Error::invalid("inputs differ in dimension"));
            }
            if let Some(outputs) = &outputs {
                if outputs.iter().any(|y| y.len() != u.len()) {
                    return Err(Error::invalid("outputs must have the input dimension"));
                }
            }
        }
        Ok(Self {
            times,
            states,
            inputs,
            outputs,
        })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn dim_state(&self) -> usize {
        self.states.first().map_or(0, |x| x.len())
    }

    pub fn dim_input(&self) -> usize {
        self.inputs.first().map_or(0, |u| u.len())
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[DVector<f64>] {
        &self.states
    }

    pub fn inputs(&self) -> &[DVector<f64>] {
        &self.inputs
    }

    pub fn outputs(&self) -> Option<&[DVector<f64>]> {
        self.outputs.as_deref()
    }

    /// Same samples with every timestamp moved by `dt`.
    pub fn shifted(&self, dt: f64) -> Self {
        Self {
            times: self.times.iter().map(|t| t + dt).collect(),
            ..self.clone()
        }
    }

    /// Replaces the states, keeping times and inputs; outputs are dropped.
    pub fn with_states(&self, states: Vec<DVector<f64>>) -> Result<Self> {
        Self::new(self.times.clone(), states, self.inputs.clone(), None)
    }

    pub fn into_parts(self) -> (Vec<f64>, Vec<DVector<f64>>, Vec<DVector<f64>>, Option<Vec<DVector<f64>>>) {
        (self.times, self.states, self.inputs, self.outputs)
    }
}

/// Per-interval comparison of the stored energy change with the power balance
/// `dH/dt = -grad H^T R grad H + y^T u`.
///
/// Powers are integrated over each interval with the cubic through the four nearest samples
/// (trapezoidal rule when fewer than four samples exist).
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyBalance {
    /// `|dH/dt - (-dissipated + supplied)|` on each sample interval.
    pub residuals: Vec<f64>,
    /// `H(x(t_k))`
    pub energy: Vec<f64>,
    /// `∫ y^T u dt` over each interval.
    pub supplied: Vec<f64>,
    /// `∫ grad H^T R grad H dt` over each interval.
    pub dissipated: Vec<f64>,
    pub max_residual: f64,
}

impl EnergyBalance {
    /// `H(T) - H(0)`
    pub fn energy_change(&self) -> f64 {
        match (self.energy.first(), self.energy.last()) {
            (Some(a), Some(b)) => b - a,
            _ => 0.0,
        }
    }

    pub fn total_supplied(&self) -> f64 {
        self.supplied.iter().sum()
    }

    /// Residual rates accumulated into an energy error bound `Σ residual_k Δt_k`.
    pub fn accumulated_residual(&self, times: &[f64]) -> f64 {
        self.residuals
            .iter()
            .zip(times.windows(2))
            .map(|(r, w)| r * (w[1] - w[0]))
            .sum()
    }
}

/// `∫_{t_k}^{t_{k+1}} f dt` for sampled `f`.
pub(crate) fn interval_integral(times: &[f64], f: &[f64], k: usize) -> f64 {
    let (a, b) = (times[k], times[k + 1]);
    let h = b - a;
    if times.len() < 4 {
        return 0.5 * h * (f[k] + f[k + 1]);
    }
    let s = k.saturating_sub(1).min(times.len() - 4);
    let nodes = &times[s..s + 4];
    let values = &f[s..s + 4];
    // two-point Gauss-Legendre is exact for the cubic interpolant
    let g = 0.5 / crate::math::sqrt(3.0);
    [0.5 - g, 0.5 + g]
        .iter()
        .map(|c| {
            let t = a + c * h;
            let mut acc = 0.0;
            for i in 0..4 {
                let mut w = values[i];
                for j in 0..4 {
                    if j != i {
                        w *= (t - nodes[j]) / (nodes[i] - nodes[j]);
                    }
                }
                acc += w;
            }
            0.5 * h * acc
        })
        .sum()
}

/// Evaluates the power balance along `traj` (outputs are recomputed from the model).
pub fn energy_balance_residual<M: PhsModel + ?Sized>(model: &M, traj: &Trajectory) -> EnergyBalance {
    let energy: Vec<f64> = traj.states().iter().map(|x| model.hamiltonian(x)).collect();
    let dissipation: Vec<f64> = traj.states().iter().map(|x| model.dissipated_power(x)).collect();
    let supply: Vec<f64> = traj
        .states()
        .iter()
        .zip(traj.inputs())
        .map(|(x, u)| model.output(x).dot(u))
        .collect();
    let times = traj.times();
    let mut residuals = Vec::with_capacity(traj.len().saturating_sub(1));
    let mut supplied = Vec::with_capacity(residuals.capacity());
    let mut dissipated = Vec::with_capacity(residuals.capacity());
    for k in 0..traj.len().saturating_sub(1) {
        let dt = times[k + 1] - times[k];
        let s = interval_integral(times, &supply, k);
        let d = interval_integral(times, &dissipation, k);
        residuals.push(((energy[k + 1] - energy[k]) - (s - d)).abs() / dt);
        supplied.push(s);
        dissipated.push(d);
    }
    let max_residual = residuals.iter().cloned().fold(0.0, f64::max);
    EnergyBalance {
        residuals,
        energy,
        supplied,
        dissipated,
        max_residual,
    }
}
