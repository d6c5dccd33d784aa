//! Adaptive Dormand–Prince 5(4) integration with 4th-order dense output.
//!
//! Steps are chosen by the embedded error estimate; the solution is then interpolated onto
//! the caller's output grid, so output resolution never constrains the step size.

use alloc::format;
use alloc::vec::Vec;
use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::math;
use crate::phs::PhsModel;
use crate::trajectory::Trajectory;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub relative: f64,
    pub absolute: f64,
    pub max_steps: usize,
    /// States with any component beyond this magnitude count as blow-up.
    pub max_state: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            relative: 1e-8,
            absolute: 1e-8,
            max_steps: 2_000_000,
            max_state: 1e12,
        }
    }
}

impl Tolerances {
    pub fn uniform(tol: f64) -> Self {
        Self {
            relative: tol,
            absolute: tol,
            ..Default::default()
        }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Integrates `x' = f(t, x)` from `times[0]` and returns the state at every entry of `times`.
///
/// `times` must be non-decreasing with at least one entry. Errors from `f` other than
/// non-finite model evaluations are passed through unchanged; non-finite evaluations
/// shrink the step and eventually surface as [`Error::SimulationDiverged`].
pub fn integrate<F>(mut f: F, x0: &DVector<f64>, times: &[f64], tol: &Tolerances) -> Result<Vec<DVector<f64>>>
where
    F: FnMut(f64, &DVector<f64>) -> Result<DVector<f64>>,
{
    let Some(&t0) = times.first() else {
        return Err(Error::invalid("empty output grid"));
    };
    if times.windows(2).any(|w| !(w[1] >= w[0])) {
        return Err(Error::invalid("output grid must be non-decreasing"));
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("initial state is not finite"));
    }
    let t_end = *times.last().unwrap();
    let n = x0.len();
    let mut out = Vec::with_capacity(times.len());
    let mut next_out = 0;
    while next_out < times.len() && times[next_out] <= t0 {
        out.push(x0.clone());
        next_out += 1;
    }
    if next_out == times.len() {
        return Ok(out);
    }

    let diverged = |t: f64, reason: &str| Error::SimulationDiverged {
        last_time: t,
        reason: reason.into(),
    };

    let scale = |a: &DVector<f64>, b: &DVector<f64>| -> DVector<f64> {
        DVector::from_iterator(
            n,
            a.iter()
                .zip(b.iter())
                .map(|(x, y)| tol.absolute + tol.relative * x.abs().max(y.abs())),
        )
    };
    let rms = |v: &DVector<f64>, sc: &DVector<f64>| -> f64 {
        let s: f64 = v.iter().zip(sc.iter()).map(|(a, b)| (a / b) * (a / b)).sum();
        math::sqrt(s / n.max(1) as f64)
    };

    let mut t = t0;
    let mut y = x0.clone();
    let mut k1 = match f(t, &y) {
        Ok(k) => k,
        Err(Error::ModelEvaluation { .. }) => return Err(diverged(t, "non-finite dynamics at the initial state")),
        Err(e) => return Err(e),
    };
    if k1.iter().any(|v| !v.is_finite()) {
        return Err(diverged(t, "non-finite dynamics at the initial state"));
    }

    // initial step (Hairer, Nørsett & Wanner, II.4)
    let span = t_end - t0;
    let mut h = {
        let sc = scale(&y, &y);
        let d0 = rms(&y, &sc);
        let d1 = rms(&k1, &sc);
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        let h0 = h0.min(span);
        let y1 = &y + &k1 * h0;
        let h1 = match f(t + h0, &y1) {
            Ok(f1) if f1.iter().all(|v| v.is_finite()) => {
                let d2 = rms(&(f1 - &k1), &sc) / h0;
                if d1.max(d2) <= 1e-15 {
                    (h0 * 1e-3).max(1e-6)
                } else {
                    math::powf(0.01 / d1.max(d2), 0.2)
                }
            }
            _ => h0 * 1e-3,
        };
        (100.0 * h0).min(h1).min(span)
    };

    let mut steps = 0usize;
    let mut last_rejected = false;
    while t < t_end {
        steps += 1;
        if steps > tol.max_steps {
            return Err(diverged(t, "maximum number of steps exceeded"));
        }
        if h < 1e-14 * t.abs().max(1.0) {
            return Err(diverged(t, "step size underflow"));
        }
        if t + h > t_end || t_end - (t + h) < 1e-12 * h {
            h = t_end - t;
        }

        let stages = (|| -> Result<_> {
            let k2 = f(t + C2 * h, &(&y + &k1 * (h * A21)))?;
            let k3 = f(t + C3 * h, &(&y + (&k1 * A31 + &k2 * A32) * h))?;
            let k4 = f(t + C4 * h, &(&y + (&k1 * A41 + &k2 * A42 + &k3 * A43) * h))?;
            let k5 = f(t + C5 * h, &(&y + (&k1 * A51 + &k2 * A52 + &k3 * A53 + &k4 * A54) * h))?;
            let k6 = f(
                t + h,
                &(&y + (&k1 * A61 + &k2 * A62 + &k3 * A63 + &k4 * A64 + &k5 * A65) * h),
            )?;
            let y1 = &y + (&k1 * A71 + &k3 * A73 + &k4 * A74 + &k5 * A75 + &k6 * A76) * h;
            let k7 = f(t + h, &y1)?;
            Ok((k2, k3, k4, k5, k6, k7, y1))
        })();
        let (_k2, k3, k4, k5, k6, k7, y1) = match stages {
            Ok(s) => s,
            Err(Error::ModelEvaluation { .. }) => {
                h *= 0.5;
                last_rejected = true;
                continue;
            }
            Err(e) => return Err(e),
        };
        if y1.iter().chain(k7.iter()).any(|v| !v.is_finite()) {
            h *= 0.5;
            last_rejected = true;
            continue;
        }

        let err_vec = (&k1 * E1 + &k3 * E3 + &k4 * E4 + &k5 * E5 + &k6 * E6 + &k7 * E7) * h;
        let err = rms(&err_vec, &scale(&y, &y1));

        if err <= 1.0 {
            if y1.amax() > tol.max_state {
                return Err(diverged(t, "state magnitude exceeded the blow-up bound"));
            }
            let t_new = if h == t_end - t { t_end } else { t + h };
            // dense output on (t, t_new]
            if next_out < times.len() && times[next_out] <= t_new {
                let r2 = &y1 - &y;
                let r3 = &k1 * h - &r2;
                let r4 = &r2 - &k7 * h - &r3;
                let r5 = (&k1 * D1 + &k3 * D3 + &k4 * D4 + &k5 * D5 + &k6 * D6 + &k7 * D7) * h;
                while next_out < times.len() && times[next_out] <= t_new {
                    let tau = times[next_out];
                    if tau == t_new {
                        out.push(y1.clone());
                    } else {
                        let th = (tau - t) / h;
                        let th1 = 1.0 - th;
                        out.push(&y + (&r2 + (&r3 + (&r4 + &r5 * th1) * th) * th1) * th);
                    }
                    next_out += 1;
                }
            }
            t = t_new;
            y = y1;
            k1 = k7;
            let mut fac = 0.9 * math::powf(err.max(1e-10), -0.2);
            fac = fac.clamp(0.2, if last_rejected { 1.0 } else { 10.0 });
            h *= fac;
            last_rejected = false;
        } else {
            let fac = (0.9 * math::powf(err, -0.2)).max(0.2);
            h *= fac;
            last_rejected = true;
        }
    }
    while out.len() < times.len() {
        out.push(y.clone());
    }
    Ok(out)
}

/// An input signal, possibly state feedback: `u = u(t, x)`.
pub trait InputSignal {
    fn input(&self, t: f64, x: &DVector<f64>) -> Result<DVector<f64>>;
}

impl<U: InputSignal + ?Sized> InputSignal for &U {
    fn input(&self, t: f64, x: &DVector<f64>) -> Result<DVector<f64>> {
        (**self).input(t, x)
    }
}

/// Time-only input `u(t)`.
#[derive(Debug, Clone, Copy)]
pub struct OpenLoop<F>(pub F);

impl<F: Fn(f64) -> DVector<f64>> InputSignal for OpenLoop<F> {
    fn input(&self, t: f64, _x: &DVector<f64>) -> Result<DVector<f64>> {
        Ok((self.0)(t))
    }
}

/// `u = 0` with `m` channels.
#[derive(Debug, Clone, Copy)]
pub struct ZeroInput(pub usize);

impl InputSignal for ZeroInput {
    fn input(&self, _t: f64, _x: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(DVector::zeros(self.0))
    }
}

/// `count` equally spaced points on `[t0, t1]`, both ends included.
pub fn uniform_grid(t0: f64, t1: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => alloc::vec![t0],
        _ => {
            let last = (count - 1) as f64;
            (0..count)
                .map(|i| if i == count - 1 { t1 } else { t0 + (t1 - t0) * (i as f64 / last) })
                .collect()
        }
    }
}

/// Uniform grid on `[t0, t1]` whose spacing is the largest value not exceeding `max_step`.
pub fn grid_with_max_step(t0: f64, t1: f64, max_step: f64) -> Vec<f64> {
    let intervals = math::ceil((t1 - t0) / max_step - 1e-9).max(1.0) as usize;
    uniform_grid(t0, t1, intervals + 1)
}

/// Simulates `model` driven by `input` and samples the solution on `times`.
///
/// Inputs and port outputs are recorded at the sample times.
pub fn simulate<M, U>(model: &M, x0: &DVector<f64>, input: &U, times: &[f64], tol: &Tolerances) -> Result<Trajectory>
where
    M: PhsModel + ?Sized,
    U: InputSignal + ?Sized,
{
    if x0.len() != model.dim_state() {
        return Err(Error::invalid(format!(
            "initial state has {} entries, model has {}",
            x0.len(),
            model.dim_state()
        )));
    }
    let states = integrate(
        |t, x| {
            let u = input.input(t, x)?;
            model.eval_dynamics(x, &u)
        },
        x0,
        times,
        tol,
    )?;
    let mut inputs = Vec::with_capacity(times.len());
    let mut outputs = Vec::with_capacity(times.len());
    for (t, x) in times.iter().zip(&states) {
        inputs.push(input.input(*t, x)?);
        outputs.push(model.output(x));
    }
    Trajectory::new(times.to_vec(), states, inputs, Some(outputs))
}
