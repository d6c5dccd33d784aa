//! Numerical verification of the dissipation inequality under bounded model error.

use alloc::vec::Vec;
use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::desired::{DesiredDynamics, DesiredHamiltonian};
use super::plan::ReferencePlan;
use super::ErrorEnvelope;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SamplingSpec {
    /// Random unit directions per checked time.
    pub directions: usize,
    pub max_radius: f64,
    /// Equally spaced radii per direction in `(0, max_radius]`.
    pub radial_steps: usize,
    /// Bisection steps refining the outermost sign change along a direction.
    pub bisection_steps: usize,
    /// Number of plan times checked, spread evenly over the plan samples.
    pub times: usize,
    pub seed: u64,
}

impl Default for SamplingSpec {
    fn default() -> Self {
        Self {
            directions: 100,
            max_radius: 2.0,
            radial_steps: 40,
            bisection_steps: 16,
            times: 3,
            seed: 0,
        }
    }
}

impl SamplingSpec {
    pub fn radius_step(&self) -> f64 {
        self.max_radius / self.radial_steps as f64
    }

    fn validate(&self) -> Result<()> {
        if self.directions == 0 || self.radial_steps == 0 || self.times == 0 || !(self.max_radius > 0.0) {
            return Err(Error::invalid("sampling counts and radius must be positive"));
        }
        Ok(())
    }

    pub(crate) fn unit_directions(&self, n: usize) -> Vec<DVector<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut out = Vec::with_capacity(self.directions);
        while out.len() < self.directions {
            let d = DVector::<f64>::from_fn(n, |_, _| StandardNormal.sample(&mut rng));
            let norm = d.norm();
            if norm > 1e-12 {
                out.push(d / norm);
            }
        }
        out
    }

    fn time_indices(&self, len: usize) -> Vec<usize> {
        let k = self.times.min(len);
        if k == 1 {
            return alloc::vec![0];
        }
        let mut idx: Vec<usize> = (0..k).map(|i| i * (len - 1) / (k - 1)).collect();
        idx.dedup();
        idx
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarginSample {
    pub time: f64,
    pub xbar: DVector<f64>,
    pub radius: f64,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport {
    pub samples: Vec<MarginSample>,
    /// Radius beyond which every sampled margin is nonnegative; `None` when negative margins
    /// reach the edge of the sampled region.
    pub epsilon: Option<f64>,
    /// Whether every sampled margin is nonnegative.
    pub satisfied: bool,
    pub worst_margin: f64,
    pub max_radius: f64,
    pub radius_step: f64,
}

/// `grad^T R_d grad - sum_i |grad_i| envelope_i`, the margin under the worst error in the box.
pub fn worst_case_margin(grad: &DVector<f64>, damping: &DVector<f64>, envelope: &DVector<f64>) -> f64 {
    let mut m = 0.0;
    for i in 0..grad.len() {
        m += damping[i] * grad[i] * grad[i] - grad[i].abs() * envelope[i];
    }
    m
}

/// Samples the worst-case margin around the reference and estimates the radius `epsilon`
/// outside of which it is nonnegative.
pub fn verify_dissipation_condition<E, H>(
    model: &E,
    desired: &DesiredDynamics<H>,
    plan: &ReferencePlan,
    spec: &SamplingSpec,
) -> Result<ConditionReport>
where
    E: ErrorEnvelope + ?Sized,
    H: DesiredHamiltonian,
{
    spec.validate()?;
    let n = desired.dim_state();
    if plan.dim_state() != n {
        return Err(Error::invalid("plan and desired dynamics differ in dimension"));
    }
    let directions = spec.unit_directions(n);
    let step = spec.radius_step();
    let margin_at = |xd: &DVector<f64>, xbar: &DVector<f64>| {
        let grad = desired.hamiltonian().gradient(xbar);
        let env = model.error_envelope(&(xd + xbar));
        worst_case_margin(&grad, desired.damping(), &env)
    };
    let mut samples = Vec::new();
    let mut epsilon = Some(0.0f64);
    let mut worst = f64::INFINITY;
    for k in spec.time_indices(plan.times().len()) {
        let t = plan.times()[k];
        let xd = &plan.states()[k];
        for d in &directions {
            let mut last_fail = None;
            for j in 1..=spec.radial_steps {
                let r = step * j as f64;
                let xbar = d * r;
                let m = margin_at(xd, &xbar);
                worst = worst.min(m);
                if m < 0.0 {
                    last_fail = Some(j);
                }
                samples.push(MarginSample {
                    time: t,
                    xbar,
                    radius: r,
                    margin: m,
                });
            }
            let boundary = match last_fail {
                None => 0.0,
                Some(j) if j == spec.radial_steps => {
                    epsilon = None;
                    continue;
                }
                Some(j) => {
                    let (mut lo, mut hi) = (step * j as f64, step * (j + 1) as f64);
                    for _ in 0..spec.bisection_steps {
                        let mid = 0.5 * (lo + hi);
                        if margin_at(xd, &(d * mid)) < 0.0 {
                            lo = mid;
                        } else {
                            hi = mid;
                        }
                    }
                    hi
                }
            };
            epsilon = epsilon.map(|e| e.max(boundary));
        }
    }
    let satisfied = worst >= 0.0;
    Ok(ConditionReport {
        samples,
        epsilon: if satisfied { Some(0.0) } else { epsilon },
        satisfied,
        worst_margin: worst,
        max_radius: spec.max_radius,
        radius_step: step,
    })
}

/// Radius of the smallest ball around the reference containing the sampled sublevel set of
/// `H_d` at its largest value on the `epsilon`-sphere; `None` when `epsilon` is unbounded or
/// the level set leaves the sampled region.
pub fn ultimate_bound<H: DesiredHamiltonian>(hamiltonian: &H, epsilon: Option<f64>, n: usize, spec: &SamplingSpec) -> Option<f64> {
    let eps = epsilon?;
    if eps == 0.0 {
        return Some(0.0);
    }
    let directions = spec.unit_directions(n);
    let level = directions
        .iter()
        .map(|d| hamiltonian.value(&(d * eps)))
        .fold(f64::NEG_INFINITY, f64::max);
    let fine = spec.radius_step() / 4.0;
    let limit = 4.0 * spec.max_radius;
    let mut bound = eps;
    for d in &directions {
        let mut r = eps;
        while hamiltonian.value(&(d * r)) < level {
            r += fine;
            if r > limit {
                return None;
            }
        }
        bound = bound.max(r);
    }
    Some(bound)
}
