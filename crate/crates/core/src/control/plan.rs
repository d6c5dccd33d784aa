//! Full-state reference plans from a prescribed subset of reference components.

use alloc::vec;
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

use super::annihilator::left_annihilator;
use super::desired::{DesiredDynamics, DesiredHamiltonian};
use crate::error::{Error, Result};
use crate::integrate::grid_with_max_step;
use crate::math::{cos, sin};
use crate::phs::PhsModel;
use crate::spline::{derivative_matrix, Hermite};

/// Sampled `x_d(t)`, `x_d'(t)` with cubic Hermite interpolation between samples.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferencePlan {
    times: Vec<f64>,
    states: Vec<DVector<f64>>,
    derivatives: Vec<DVector<f64>>,
    interpolants: Vec<Hermite>,
}

impl ReferencePlan {
    pub fn from_samples(times: Vec<f64>, states: Vec<DVector<f64>>, derivatives: Vec<DVector<f64>>) -> Result<Self> {
        if times.len() < 2 || states.len() != times.len() || derivatives.len() != times.len() {
            return Err(Error::invalid("plan needs at least two aligned samples"));
        }
        let n = states[0].len();
        if states.iter().chain(&derivatives).any(|v| v.len() != n || v.iter().any(|x| !x.is_finite())) {
            return Err(Error::invalid("plan samples must be finite and of equal dimension"));
        }
        let interpolants = (0..n)
            .map(|i| {
                Hermite::new(
                    times.clone(),
                    states.iter().map(|x| x[i]).collect(),
                    derivatives.iter().map(|x| x[i]).collect(),
                )
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            times,
            states,
            derivatives,
            interpolants,
        })
    }

    /// Constant reference `x_d = x` with `x_d' = 0` on `[t0, t1]`.
    pub fn constant(x: DVector<f64>, t0: f64, t1: f64) -> Result<Self> {
        let n = x.len();
        Self::from_samples(vec![t0, t1], vec![x.clone(), x], vec![DVector::zeros(n); 2])
    }

    pub fn dim_state(&self) -> usize {
        self.states[0].len()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[DVector<f64>] {
        &self.states
    }

    pub fn derivatives(&self) -> &[DVector<f64>] {
        &self.derivatives
    }

    pub fn start(&self) -> f64 {
        self.times[0]
    }

    pub fn end(&self) -> f64 {
        self.times[self.times.len() - 1]
    }

    /// `(x_d(t), x_d'(t))`; times may exceed the plan by a relative `1e-9` of its length.
    pub fn eval(&self, t: f64) -> Result<(DVector<f64>, DVector<f64>)> {
        let slack = 1e-9 * (self.end() - self.start()).max(1.0);
        if !(t >= self.start() - slack && t <= self.end() + slack) {
            return Err(Error::OutsidePlan {
                time: t,
                start: self.start(),
                end: self.end(),
            });
        }
        let n = self.dim_state();
        let mut x = DVector::zeros(n);
        let mut dx = DVector::zeros(n);
        for (i, h) in self.interpolants.iter().enumerate() {
            let (v, d, _) = h.eval_all(t);
            x[i] = v;
            dx[i] = d;
        }
        Ok((x, dx))
    }

    /// Largest `|a - b|` between the interpolants of two plans at `points` times on the common span.
    pub fn sup_distance(&self, other: &Self, points: usize) -> Result<f64> {
        let t0 = self.start().max(other.start());
        let t1 = self.end().min(other.end());
        let mut worst: f64 = 0.0;
        for k in 0..points.max(2) {
            let t = t0 + (t1 - t0) * k as f64 / (points.max(2) - 1) as f64;
            let (a, _) = self.eval(t)?;
            let (b, _) = other.eval(t)?;
            worst = worst.max((a - b).amax());
        }
        Ok(worst)
    }
}

/// Prescribed reference components (as many as there are inputs).
pub trait PrimaryReference {
    /// State indices fixed by this reference.
    fn indices(&self) -> &[usize];
    /// Values and time derivatives of the prescribed components.
    fn eval(&self, t: f64) -> (DVector<f64>, DVector<f64>);
}

/// `x_d1(t) = x1s - slope t - amplitude sin(frequency t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AirGapReference {
    pub rest_gap: f64,
    pub slope: f64,
    pub amplitude: f64,
    pub frequency: f64,
}

impl Default for AirGapReference {
    fn default() -> Self {
        Self {
            rest_gap: 1.0,
            slope: 0.01,
            amplitude: 0.01,
            frequency: 0.8,
        }
    }
}

impl PrimaryReference for AirGapReference {
    fn indices(&self) -> &[usize] {
        &[0]
    }

    fn eval(&self, t: f64) -> (DVector<f64>, DVector<f64>) {
        let x = self.rest_gap - self.slope * t - self.amplitude * sin(self.frequency * t);
        let dx = -self.slope - self.amplitude * self.frequency * cos(self.frequency * t);
        (DVector::from_element(1, x), DVector::from_element(1, dx))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstantReference {
    pub indices: Vec<usize>,
    pub values: DVector<f64>,
}

impl PrimaryReference for ConstantReference {
    fn indices(&self) -> &[usize] {
        &self.indices
    }

    fn eval(&self, _t: f64) -> (DVector<f64>, DVector<f64>) {
        (self.values.clone(), DVector::zeros(self.values.len()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanOptions {
    pub t_start: f64,
    pub t_end: f64,
    /// Largest allowed grid spacing; the grid covers the span exactly.
    pub grid_step: f64,
    /// Starting guess for the solved components at the first grid time.
    pub seed: DVector<f64>,
    /// Residual at which Newton stops early.
    pub target_residual: f64,
    /// Largest residual accepted for the final plan.
    pub max_residual: f64,
    pub max_iterations: usize,
    /// Largest change of any solved component in one Newton step of the per-time solves.
    pub max_step: f64,
}

impl PlanOptions {
    pub fn new(t_start: f64, t_end: f64, grid_step: f64, seed: DVector<f64>) -> Self {
        Self {
            t_start,
            t_end,
            grid_step,
            seed,
            target_residual: 1e-11,
            max_residual: 1e-6,
            max_iterations: 60,
            max_step: 0.1,
        }
    }
}

struct PlanProblem<'a, E: ?Sized> {
    model: &'a E,
    primary: Vec<(DVector<f64>, DVector<f64>)>,
    fixed: Vec<usize>,
    free: Vec<usize>,
    offset: DVector<f64>,
    n: usize,
}

impl<E: PhsModel + ?Sized> PlanProblem<'_, E> {
    fn state(&self, k: usize, z: &[f64]) -> DVector<f64> {
        let mut x = DVector::zeros(self.n);
        for (i, idx) in self.fixed.iter().enumerate() {
            x[*idx] = self.primary[k].0[i];
        }
        for (c, idx) in self.free.iter().enumerate() {
            x[*idx] = z[c];
        }
        x
    }

    /// `G_perp(x) [mu(x) - [J_d - R_d] grad H_d(0) - x_d']` and `G_perp(x)`.
    fn residual(&self, k: usize, z: &[f64], free_rates: &[f64]) -> Result<(DVector<f64>, DMatrix<f64>)> {
        let x = self.state(k, z);
        let mut rate = DVector::zeros(self.n);
        for (i, idx) in self.fixed.iter().enumerate() {
            rate[*idx] = self.primary[k].1[i];
        }
        for (c, idx) in self.free.iter().enumerate() {
            rate[*idx] = free_rates[c];
        }
        let g = self.model.io_matrix(&x);
        let annihilator = left_annihilator(&g, None)?;
        let r = &annihilator * (self.model.drift(&x) - &self.offset - rate);
        Ok((r, annihilator))
    }

    /// Columns `G_perp d mu / d z_c` by central differences.
    fn drift_jacobian(&self, k: usize, z: &[f64], annihilator: &DMatrix<f64>) -> DMatrix<f64> {
        let f = self.free.len();
        let mut jac = DMatrix::zeros(annihilator.nrows(), f);
        for c in 0..f {
            let h = 1e-6 * z[c].abs().max(1.0);
            let mut zp = z.to_vec();
            zp[c] += h;
            let mut zm = z.to_vec();
            zm[c] -= h;
            let d = (self.model.drift(&self.state(k, &zp)) - self.model.drift(&self.state(k, &zm))) / (2.0 * h);
            jac.set_column(c, &(annihilator * d));
        }
        jac
    }
}

fn max_abs(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0f64, |a, b| a.max(b.abs()))
}

/// Solves the projected matching equation along the reference for the unprescribed components.
///
/// Each grid time is first solved on its own (warm-started, with the unknown rates set to
/// zero); the resulting sequence then seeds a damped Newton iteration on the whole grid, where
/// the rates of the solved components come from not-a-knot spline differentiation.
pub fn solve_reference_plan<E, H, P>(
    model: &E,
    desired: &DesiredDynamics<H>,
    primary: &P,
    options: &PlanOptions,
) -> Result<ReferencePlan>
where
    E: PhsModel + ?Sized,
    H: DesiredHamiltonian,
    P: PrimaryReference + ?Sized,
{
    let n = model.dim_state();
    let m = model.dim_input();
    let fixed = primary.indices().to_vec();
    if fixed.len() != m || fixed.iter().any(|i| *i >= n) || desired.dim_state() != n {
        return Err(Error::invalid("primary reference must prescribe one distinct component per input"));
    }
    let free: Vec<usize> = (0..n).filter(|i| !fixed.contains(i)).collect();
    if free.len() + fixed.len() != n {
        return Err(Error::invalid("primary reference indices must be distinct"));
    }
    let f = free.len();
    if options.seed.len() != f {
        return Err(Error::invalid("seed must have one entry per solved component"));
    }
    if !(options.t_end > options.t_start) || !(options.grid_step > 0.0) {
        return Err(Error::invalid("plan span and grid step must be positive"));
    }
    let times = grid_with_max_step(options.t_start, options.t_end, options.grid_step);
    let count = times.len();
    let zero = DVector::zeros(n);
    let problem = PlanProblem {
        model,
        primary: times.iter().map(|t| primary.eval(*t)).collect(),
        fixed,
        free,
        offset: desired.target_field(&zero),
        n,
    };

    // per-time seeding
    let mut z = DVector::zeros(count * f);
    let seed: Vec<f64> = options.seed.iter().cloned().collect();
    let mut last_good: Option<Vec<f64>> = None;
    let zero_rates = vec![0.0; f];
    for k in 0..count {
        // only converged solutions warm-start later times
        let mut guess = last_good.clone().unwrap_or_else(|| seed.clone());
        for _ in 0..options.max_iterations {
            let (r, ann) = problem.residual(k, &guess, &zero_rates)?;
            let norm = r.norm();
            if norm <= options.target_residual {
                break;
            }
            let jac = problem.drift_jacobian(k, &guess, &ann);
            let Some(step) = jac.lu().solve(&(-&r)) else { break };
            let mut lambda = (options.max_step / step.amax()).min(1.0);
            let mut improved = false;
            for _ in 0..30 {
                let trial: Vec<f64> = guess.iter().zip(step.iter()).map(|(g, s)| g + lambda * s).collect();
                if let Ok((rt, _)) = problem.residual(k, &trial, &zero_rates) {
                    if rt.iter().all(|v| v.is_finite()) && rt.norm() < norm {
                        guess = trial;
                        improved = true;
                        break;
                    }
                }
                lambda *= 0.5;
            }
            if !improved {
                break;
            }
        }
        for c in 0..f {
            z[k * f + c] = guess[c];
        }
        let converged = problem
            .residual(k, &guess, &zero_rates)
            .map(|(r, _)| r.norm() <= options.max_residual)
            .unwrap_or(false);
        if converged {
            last_good = Some(guess);
        }
    }

    // global Newton with spline rates
    let dmat = if count >= 4 { Some(derivative_matrix(&times)?) } else { None };
    let rates_of = |z: &DVector<f64>| -> Vec<Vec<f64>> {
        let mut rates = vec![vec![0.0; f]; count];
        if let Some(d) = &dmat {
            for c in 0..f {
                let col = DVector::from_fn(count, |k, _| z[k * f + c]);
                let dc = d * col;
                for k in 0..count {
                    rates[k][c] = dc[k];
                }
            }
        }
        rates
    };
    let full_residual = |z: &DVector<f64>| -> Result<(DVector<f64>, Vec<DMatrix<f64>>)> {
        let rates = rates_of(z);
        let mut r = DVector::zeros(count * f);
        let mut anns = Vec::with_capacity(count);
        for k in 0..count {
            let (rk, ann) = problem.residual(k, &z.as_slice()[k * f..(k + 1) * f], &rates[k])?;
            r.rows_mut(k * f, f).copy_from(&rk);
            anns.push(ann);
        }
        Ok((r, anns))
    };
    let (mut r, mut anns) = full_residual(&z)?;
    for _ in 0..options.max_iterations {
        if max_abs(&r) <= options.target_residual {
            break;
        }
        let mut jac = DMatrix::zeros(count * f, count * f);
        for k in 0..count {
            let block = problem.drift_jacobian(k, &z.as_slice()[k * f..(k + 1) * f], &anns[k]);
            jac.view_mut((k * f, k * f), (f, f)).copy_from(&block);
            if let Some(d) = &dmat {
                for c in 0..f {
                    let col = anns[k].column(problem.free[c]).into_owned();
                    for l in 0..count {
                        let dkl = d[(k, l)];
                        if dkl != 0.0 {
                            for row in 0..f {
                                jac[(k * f + row, l * f + c)] -= col[row] * dkl;
                            }
                        }
                    }
                }
            }
        }
        let Some(step) = jac.lu().solve(&(-&r)) else { break };
        let norm = r.norm();
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let trial = &z + lambda * &step;
            if let Ok((rt, at)) = full_residual(&trial) {
                if rt.iter().all(|v| v.is_finite()) && rt.norm() < norm {
                    z = trial;
                    r = rt;
                    anns = at;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            break;
        }
    }

    let (worst_k, worst) = (0..count)
        .map(|k| (k, max_abs(&r.rows(k * f, f).into_owned())))
        .fold((0, 0.0f64), |a, b| if b.1 > a.1 { b } else { a });
    if !(worst <= options.max_residual) {
        return Err(Error::PlanFailed {
            time: times[worst_k],
            residual: worst,
        });
    }
    let rates = rates_of(&z);
    let mut states = Vec::with_capacity(count);
    let mut derivatives = Vec::with_capacity(count);
    for k in 0..count {
        let zk = &z.as_slice()[k * f..(k + 1) * f];
        states.push(problem.state(k, zk));
        let mut dx = DVector::zeros(n);
        for (i, idx) in problem.fixed.iter().enumerate() {
            dx[*idx] = problem.primary[k].1[i];
        }
        for (c, idx) in problem.free.iter().enumerate() {
            dx[*idx] = rates[k][c];
        }
        derivatives.push(dx);
    }
    ReferencePlan::from_samples(times, states, derivatives)
}
