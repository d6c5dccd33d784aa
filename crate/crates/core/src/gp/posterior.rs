//! Trained GP-PHS model: posterior dynamics, posterior Hamiltonian and error envelopes.

use alloc::vec;
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

use super::gram::{inverse_squares, mean_adjust, structure_rows};
use super::hyperparams::GpHyperparams;
use super::kernel::{se_hessian_into, se_value};
use super::likelihood::condition;
use crate::error::{Error, Result};
use crate::filter::FilteredDataset;
use crate::linalg::JitteredCholesky;
use crate::math::sqrt;
use crate::phs::PhsModel;

/// Whether the error envelope scales the posterior variance or the standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BoundScale {
    #[default]
    Variance,
    StdDev,
}

/// Posterior over port-Hamiltonian vector fields conditioned on derivative data.
///
/// Queries are read-only; the model can be shared between threads.
#[derive(Debug, Clone)]
pub struct GpPhsModel {
    hyper: GpHyperparams,
    states: Vec<DVector<f64>>,
    targets: DVector<f64>,
    base_jitter: f64,
    chol: JitteredCholesky,
    alpha: DVector<f64>,
    nlml: f64,
    /// `A_j^T alpha_j` per training point.
    coeffs: Vec<DVector<f64>>,
    /// Row-major `J - R` at each training state.
    a_rows: Vec<Vec<f64>>,
    inv_sq: Vec<f64>,
    beta: DVector<f64>,
    risk: f64,
    bound_scale: BoundScale,
    reference: DVector<f64>,
    offset: f64,
}

impl GpPhsModel {
    /// Conditions on `targets` (stacked mean-adjusted derivatives) observed at `states`.
    pub fn new(hyper: GpHyperparams, states: Vec<DVector<f64>>, targets: DVector<f64>, jitter: f64) -> Result<Self> {
        hyper.validate()?;
        let n = hyper.dim_state();
        let c = condition(&states, &targets, &hyper, jitter)?;
        let a = structure_rows(&hyper.structure, &states);
        let coeffs = (0..states.len())
            .map(|j| {
                let aj = DMatrix::from_row_slice(n, n, &a[j]);
                aj.tr_mul(&c.alpha.rows(j * n, n))
            })
            .collect();
        let inv_sq = inverse_squares(&hyper);
        let mut model = Self {
            hyper,
            states,
            targets,
            base_jitter: jitter,
            chol: c.chol,
            alpha: c.alpha,
            nlml: c.value,
            coeffs,
            a_rows: a,
            inv_sq,
            beta: DVector::from_element(n, 1.0),
            risk: 0.01,
            bound_scale: BoundScale::Variance,
            reference: DVector::zeros(n),
            offset: 0.0,
        };
        model.offset = model.raw_hamiltonian(&model.reference.clone());
        Ok(model)
    }

    pub fn from_dataset(dataset: &FilteredDataset, hyper: GpHyperparams, jitter: f64) -> Result<Self> {
        let y = mean_adjust(dataset, &hyper.structure)?;
        Self::new(hyper, dataset.states().to_vec(), y, jitter)
    }

    pub fn with_beta(mut self, beta: DVector<f64>) -> Result<Self> {
        if beta.len() != self.dim_state() || beta.iter().any(|b| !(*b >= 0.0 && b.is_finite())) {
            return Err(Error::invalid("beta must be a nonnegative vector of state dimension"));
        }
        self.beta = beta;
        Ok(self)
    }

    pub fn with_risk(mut self, risk: f64) -> Result<Self> {
        if !(risk > 0.0 && risk < 1.0) {
            return Err(Error::invalid("risk must lie in (0, 1)"));
        }
        self.risk = risk;
        Ok(self)
    }

    pub fn with_bound_scale(mut self, scale: BoundScale) -> Self {
        self.bound_scale = scale;
        self
    }

    /// Pins the posterior Hamiltonian to zero at `reference`.
    pub fn with_reference(mut self, reference: DVector<f64>) -> Result<Self> {
        if reference.len() != self.dim_state() || reference.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("reference state has the wrong dimension"));
        }
        self.offset = self.raw_hamiltonian(&reference);
        self.reference = reference;
        Ok(self)
    }

    pub fn hyper(&self) -> &GpHyperparams {
        &self.hyper
    }

    pub fn train_states(&self) -> &[DVector<f64>] {
        &self.states
    }

    /// Mean-adjusted derivative observations.
    pub fn targets(&self) -> &DVector<f64> {
        &self.targets
    }

    pub fn base_jitter(&self) -> f64 {
        self.base_jitter
    }

    /// Jitter that was actually needed to factorize the Gram matrix.
    pub fn jitter(&self) -> f64 {
        self.chol.jitter
    }

    /// `K^{-1} y`
    pub fn weights(&self) -> &DVector<f64> {
        &self.alpha
    }

    pub fn nlml(&self) -> f64 {
        self.nlml
    }

    pub fn beta(&self) -> &DVector<f64> {
        &self.beta
    }

    pub fn risk(&self) -> f64 {
        self.risk
    }

    pub fn bound_scale(&self) -> BoundScale {
        self.bound_scale
    }

    pub fn reference(&self) -> &DVector<f64> {
        &self.reference
    }

    /// `|K - L L^T| / |K|` in the Frobenius norm.
    pub fn factorization_residual(&self) -> f64 {
        let mut k = super::gram::gram_matrix(&self.states, &self.hyper, 0.0).expect("validated at construction");
        for i in 0..k.nrows() {
            k[(i, i)] += self.chol.jitter;
        }
        let l = &self.chol.lower;
        (&k - l * l.transpose()).norm() / k.norm()
    }

    fn raw_hamiltonian(&self, x: &DVector<f64>) -> f64 {
        let n = self.dim_state();
        let sf2 = self.hyper.signal_std * self.hyper.signal_std;
        let mut h = 0.0;
        for (xj, c) in self.states.iter().zip(&self.coeffs) {
            let k = se_value(x.as_slice(), xj.as_slice(), &self.inv_sq);
            let mut s = 0.0;
            for l in 0..n {
                s += self.inv_sq[l] * (x[l] - xj[l]) * c[l];
            }
            h += k * s;
        }
        sf2 * h
    }

    /// Posterior mean `mu(x' | x, D)` of the drift, without the input term.
    pub fn posterior_mean(&self, x: &DVector<f64>) -> DVector<f64> {
        self.hyper.structure.structure_matrix(x) * self.hamiltonian_gradient(x)
    }

    /// Posterior variance of each drift component.
    pub fn posterior_variance(&self, x: &DVector<f64>) -> DVector<f64> {
        let n = self.dim_state();
        let sf2 = self.hyper.signal_std * self.hyper.signal_std;
        let a_star = self.hyper.structure.structure_matrix(x);
        let a = &self.a_rows;
        let mut pi = vec![0.0; n * n];
        let mut cross = DMatrix::zeros(n * self.states.len(), n);
        for (j, xj) in self.states.iter().enumerate() {
            se_hessian_into(xj.as_slice(), x.as_slice(), &self.inv_sq, &mut pi);
            let aj = DMatrix::from_row_slice(n, n, &a[j]);
            let pim = DMatrix::from_row_slice(n, n, &pi);
            let block = (aj * pim * a_star.transpose()) * sf2;
            cross.view_mut((j * n, 0), (n, n)).copy_from(&block);
        }
        se_hessian_into(x.as_slice(), x.as_slice(), &self.inv_sq, &mut pi);
        let prior = (&a_star * DMatrix::from_row_slice(n, n, &pi) * a_star.transpose()) * sf2;
        let v = self.chol.solve_lower(&cross);
        DVector::from_fn(n, |q, _| {
            let reduction: f64 = v.column(q).norm_squared();
            (prior[(q, q)] - reduction).max(0.0)
        })
    }

    /// Posterior mean and variance of `x'` at `x` under input `u`.
    pub fn posterior_dynamics(&self, x: &DVector<f64>, u: &DVector<f64>) -> Result<(DVector<f64>, DVector<f64>)> {
        if x.len() != self.dim_state() || u.len() != self.dim_input() {
            return Err(Error::invalid("state or input has the wrong dimension"));
        }
        let mean = self.posterior_mean(x) + self.hyper.structure.io_matrix(x) * u;
        Ok((mean, self.posterior_variance(x)))
    }

    /// Posterior Hamiltonian (zero at the reference state) and its gradient.
    pub fn posterior_hamiltonian(&self, x: &DVector<f64>) -> (f64, DVector<f64>) {
        (self.hamiltonian(x), self.hamiltonian_gradient(x))
    }

    /// Per-dimension model-error bound `beta_i var_i` (or `beta_i sd_i`).
    pub fn error_envelope(&self, x: &DVector<f64>) -> DVector<f64> {
        let var = self.posterior_variance(x);
        self.envelope_from_variance(&var)
    }

    pub(crate) fn envelope_from_variance(&self, var: &DVector<f64>) -> DVector<f64> {
        DVector::from_fn(var.len(), |i, _| {
            let s = match self.bound_scale {
                BoundScale::Variance => var[i],
                BoundScale::StdDev => sqrt(var[i]),
            };
            self.beta[i] * s
        })
    }
}

impl PhsModel for GpPhsModel {
    fn dim_state(&self) -> usize {
        self.hyper.dim_state()
    }

    fn dim_input(&self) -> usize {
        self.hyper.structure.dim_input()
    }

    fn interconnection(&self, x: &DVector<f64>) -> DMatrix<f64> {
        self.hyper.structure.interconnection(x)
    }

    fn dissipation(&self, x: &DVector<f64>) -> DMatrix<f64> {
        self.hyper.structure.dissipation(x)
    }

    fn io_matrix(&self, x: &DVector<f64>) -> DMatrix<f64> {
        self.hyper.structure.io_matrix(x)
    }

    fn hamiltonian(&self, x: &DVector<f64>) -> f64 {
        self.raw_hamiltonian(x) - self.offset
    }

    fn hamiltonian_gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        let n = self.dim_state();
        let sf2 = self.hyper.signal_std * self.hyper.signal_std;
        let mut pi = vec![0.0; n * n];
        let mut g = DVector::zeros(n);
        for (xj, c) in self.states.iter().zip(&self.coeffs) {
            se_hessian_into(x.as_slice(), xj.as_slice(), &self.inv_sq, &mut pi);
            for p in 0..n {
                let mut s = 0.0;
                for q in 0..n {
                    s += pi[p * n + q] * c[q];
                }
                g[p] += s;
            }
        }
        g * sf2
    }
}

/// Per-dimension `beta` as the `quantile` of `|error_i| / scale_i` over validation pairs of
/// states and true drifts.
pub fn calibrate_beta(
    model: &GpPhsModel,
    states: &[DVector<f64>],
    drifts: &[DVector<f64>],
    quantile: f64,
) -> Result<DVector<f64>> {
    if states.is_empty() || states.len() != drifts.len() || !(0.0..=1.0).contains(&quantile) {
        return Err(Error::invalid("calibration needs matching nonempty samples and a quantile in [0, 1]"));
    }
    let n = model.dim_state();
    let unit = model.clone().with_beta(DVector::from_element(n, 1.0))?;
    let mut ratios: Vec<Vec<f64>> = vec![Vec::with_capacity(states.len()); n];
    for (x, f) in states.iter().zip(drifts) {
        let err = unit.posterior_mean(x) - f;
        let scale = unit.error_envelope(x);
        for i in 0..n {
            let r = if scale[i] > 0.0 {
                err[i].abs() / scale[i]
            } else if err[i] == 0.0 {
                0.0
            } else {
                f64::INFINITY
            };
            ratios[i].push(r);
        }
    }
    Ok(DVector::from_fn(n, |i, _| {
        let r = &mut ratios[i];
        r.sort_by(|a, b| a.total_cmp(b));
        let pos = crate::math::ceil(quantile * r.len() as f64) as usize;
        r[pos.clamp(1, r.len()) - 1]
    }))
}
