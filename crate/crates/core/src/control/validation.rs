//! Checks on the desired energy and on closed-loop trajectories.

use alloc::vec::Vec;
use nalgebra::DVector;

use super::desired::{for_each_grid_point, DesiredHamiltonian};
use super::plan::ReferencePlan;
use crate::error::{Error, Result};
use crate::trajectory::Trajectory;

#[derive(Debug, Clone, PartialEq)]
pub struct HdMinimumCheck {
    pub passed: bool,
    pub argmin: DVector<f64>,
    pub min_value: f64,
    /// Second-smallest grid value minus the smallest.
    pub gap: f64,
    /// Grid point closest to `x_bar = 0`.
    pub nearest_origin: DVector<f64>,
}

/// Evaluates `H_d` on a tensor grid over `[lo, hi]`; passes when the grid minimum sits at the
/// grid point nearest the origin and is strictly separated from the next value.
pub fn validate_hd_minimum<H: DesiredHamiltonian + ?Sized>(
    hamiltonian: &H,
    lo: &[f64],
    hi: &[f64],
    counts: &[usize],
) -> Result<HdMinimumCheck> {
    let n = lo.len();
    if hi.len() != n || counts.len() != n || counts.contains(&0) || lo.iter().zip(hi).any(|(a, b)| !(a <= b)) {
        return Err(Error::invalid("invalid validation box"));
    }
    let mut best = (f64::INFINITY, DVector::zeros(n));
    let mut second = f64::INFINITY;
    let mut nearest = (f64::INFINITY, DVector::zeros(n));
    let mut nonfinite = false;
    for_each_grid_point(lo, hi, counts, |x| {
        let v = hamiltonian.value(x);
        if !v.is_finite() {
            nonfinite = true;
            return;
        }
        if v < best.0 {
            second = best.0;
            best = (v, x.clone());
        } else if v < second {
            second = v;
        }
        let d = x.norm();
        if d < nearest.0 {
            nearest = (d, x.clone());
        }
    });
    if nonfinite {
        return Err(Error::invalid("H_d is not finite on the validation grid"));
    }
    let gap = second - best.0;
    Ok(HdMinimumCheck {
        passed: best.1 == nearest.1 && gap > 0.0,
        argmin: best.1,
        min_value: best.0,
        gap,
        nearest_origin: nearest.1,
    })
}

/// `H_d(x(t) - x_d(t))` along a trajectory.
pub fn hd_along<H: DesiredHamiltonian + ?Sized>(hamiltonian: &H, plan: &ReferencePlan, traj: &Trajectory) -> Result<Vec<f64>> {
    traj.times()
        .iter()
        .zip(traj.states())
        .map(|(t, x)| Ok(hamiltonian.value(&(x - plan.eval(*t)?.0))))
        .collect()
}

/// Number of consecutive-sample increases larger than `tolerance`.
pub fn count_increases(values: &[f64], tolerance: f64) -> usize {
    values.windows(2).filter(|w| w[1] - w[0] > tolerance).count()
}

#[derive(Debug, Clone, PartialEq)]
pub struct LaSalleReport {
    pub final_errors: Vec<f64>,
    pub converged: usize,
    pub fraction: f64,
    pub tolerance: f64,
}

/// Fraction of closed-loop runs whose final tracking error is within `tolerance`.
pub fn lasalle_probe(runs: &[Trajectory], plan: &ReferencePlan, tolerance: f64) -> Result<LaSalleReport> {
    if runs.is_empty() {
        return Err(Error::invalid("no trajectories given"));
    }
    let final_errors = runs
        .iter()
        .map(|tr| {
            let last = tr.len() - 1;
            let (xd, _) = plan.eval(tr.times()[last])?;
            Ok((&tr.states()[last] - xd).norm())
        })
        .collect::<Result<Vec<f64>>>()?;
    let converged = final_errors.iter().filter(|e| **e <= tolerance).count();
    Ok(LaSalleReport {
        fraction: converged as f64 / runs.len() as f64,
        final_errors,
        converged,
        tolerance,
    })
}
