//! Savitzky–Golay smoothing and differentiation of uniformly sampled trajectories.

use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::trajectory::Trajectory;

/// Training pairs `(x(t_i), x'(t_i))` with the inputs applied at `t_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct FilteredDataset {
    times: Vec<f64>,
    states: Vec<DVector<f64>>,
    derivatives: Vec<DVector<f64>>,
    inputs: Vec<DVector<f64>>,
}

impl FilteredDataset {
    pub fn new(
        times: Vec<f64>,
        states: Vec<DVector<f64>>,
        derivatives: Vec<DVector<f64>>,
        inputs: Vec<DVector<f64>>,
    ) -> Result<Self> {
        let len = times.len();
        if len == 0 {
            return Err(Error::invalid("dataset is empty"));
        }
        if states.len() != len || derivatives.len() != len || inputs.len() != len {
            return Err(Error::invalid("dataset columns differ in length"));
        }
        let n = states[0].len();
        let m = inputs[0].len();
        if states.iter().chain(&derivatives).any(|v| v.len() != n) || inputs.iter().any(|u| u.len() != m) {
            return Err(Error::invalid("dataset entries differ in dimension"));
        }
        if states
            .iter()
            .chain(&derivatives)
            .chain(&inputs)
            .any(|v| v.iter().any(|x| !x.is_finite()))
        {
            return Err(Error::invalid("dataset contains non-finite values"));
        }
        Ok(Self {
            times,
            states,
            derivatives,
            inputs,
        })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn dim_state(&self) -> usize {
        self.states[0].len()
    }

    pub fn dim_input(&self) -> usize {
        self.inputs[0].len()
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

    pub fn inputs(&self) -> &[DVector<f64>] {
        &self.inputs
    }

    /// Every sample duplicated in place (`x1, x1, x2, x2, ...`).
    pub fn duplicated(&self) -> Self {
        let twice = |v: &[DVector<f64>]| v.iter().flat_map(|x| [x.clone(), x.clone()]).collect::<Vec<_>>();
        Self {
            times: self.times.iter().flat_map(|t| [*t, *t]).collect(),
            states: twice(&self.states),
            derivatives: twice(&self.derivatives),
            inputs: twice(&self.inputs),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SavitzkyGolay {
    pub window: usize,
    pub poly_order: usize,
}

impl Default for SavitzkyGolay {
    fn default() -> Self {
        Self {
            window: 9,
            poly_order: 3,
        }
    }
}

impl SavitzkyGolay {
    pub fn new(window: usize, poly_order: usize) -> Result<Self> {
        if window % 2 == 0 || window < poly_order + 2 {
            return Err(Error::invalid(
                "window must be odd and at least poly_order + 2",
            ));
        }
        Ok(Self { window, poly_order })
    }

    /// `(value, derivative)` weights for each evaluation offset `-half..=half` inside a window,
    /// with derivative weights in units of one sample spacing.
    fn weights(&self) -> Vec<(Vec<f64>, Vec<f64>)> {
        let w = self.window;
        let half = (w / 2) as f64;
        let p = self.poly_order + 1;
        let vander = DMatrix::from_fn(w, p, |i, k| libm::pow(i as f64 - half, k as f64));
        let vt = vander.transpose();
        let gram = &vt * &vander;
        let fit = gram
            .lu()
            .solve(&vt)
            .expect("Vandermonde normal matrix is invertible for distinct nodes");
        (0..w)
            .map(|j| {
                let s = j as f64 - half;
                let basis = DVector::from_fn(p, |k, _| libm::pow(s, k as f64));
                let dbasis = DVector::from_fn(p, |k, _| if k == 0 { 0.0 } else { k as f64 * libm::pow(s, k as f64 - 1.0) });
                let value = fit.tr_mul(&basis);
                let deriv = fit.tr_mul(&dbasis);
                (value.iter().cloned().collect(), deriv.iter().cloned().collect())
            })
            .collect()
    }

    /// Smooths states and estimates derivatives by local polynomial fits.
    ///
    /// Interior samples use the centered window; the first and last `window / 2` samples
    /// reuse the first and last full windows (one-sided fits).
    pub fn apply(&self, traj: &Trajectory) -> Result<FilteredDataset> {
        let len = traj.len();
        if len < self.window {
            return Err(Error::TooShort {
                len,
                window: self.window,
            });
        }
        let times = traj.times();
        let step = (times[len - 1] - times[0]) / (len - 1) as f64;
        if times
            .windows(2)
            .any(|w| ((w[1] - w[0]) - step).abs() > 1e-6 * step.abs())
        {
            return Err(Error::invalid("Savitzky–Golay filtering needs uniform sampling"));
        }
        let weights = self.weights();
        let half = self.window / 2;
        let n = traj.dim_state();
        let states = traj.states();
        let mut smoothed = Vec::with_capacity(len);
        let mut derivatives = Vec::with_capacity(len);
        for i in 0..len {
            let start = i.saturating_sub(half).min(len - self.window);
            let (vw, dw) = &weights[i - start];
            let mut x = DVector::zeros(n);
            let mut dx = DVector::zeros(n);
            for (j, (a, b)) in vw.iter().zip(dw).enumerate() {
                let s = &states[start + j];
                x.axpy(*a, s, 1.0);
                dx.axpy(*b / step, s, 1.0);
            }
            smoothed.push(x);
            derivatives.push(dx);
        }
        FilteredDataset::new(times.to_vec(), smoothed, derivatives, traj.inputs().to_vec())
    }
}

/// [`SavitzkyGolay::apply`] with explicit window and order.
pub fn filter_derivatives(traj: &Trajectory, window: usize, poly_order: usize) -> Result<FilteredDataset> {
    SavitzkyGolay::new(window, poly_order)?.apply(traj)
}
