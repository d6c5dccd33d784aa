//! Squared-exponential kernel, its mixed Hessian and the port-Hamiltonian matrix kernel.

use alloc::vec;
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

use super::hyperparams::GpHyperparams;
use crate::math::exp;

/// `exp(-sum_i d_i^2 / (2 l_i^2))` with `d = x - x'`; `inv_sq[i] = 1 / l_i^2`.
pub(crate) fn se_value(x: &[f64], y: &[f64], inv_sq: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..x.len() {
        let d = x[i] - y[i];
        s += d * d * inv_sq[i];
    }
    exp(-0.5 * s)
}

/// Writes the mixed Hessian `d^2 k / dx_a dx'_b` into `out` (row-major, `n x n`) and returns
/// the kernel value.
pub(crate) fn se_hessian_into(x: &[f64], y: &[f64], inv_sq: &[f64], out: &mut [f64]) -> f64 {
    let n = x.len();
    let k = se_value(x, y, inv_sq);
    for a in 0..n {
        let ua = inv_sq[a] * (x[a] - y[a]);
        for b in 0..n {
            let ub = inv_sq[b] * (x[b] - y[b]);
            let diag = if a == b { inv_sq[a] } else { 0.0 };
            out[a * n + b] = k * (diag - ua * ub);
        }
    }
    k
}

/// Mixed second derivative `Pi(x, x') = d^2/dx dx' exp(-|x - x'|^2_L)` of the SE kernel.
///
/// At zero lag this is `diag(1 / l_i^2)`.
pub fn se_hessian(x: &DVector<f64>, x_prime: &DVector<f64>, lengthscales: &DVector<f64>) -> DMatrix<f64> {
    let n = x.len();
    let inv_sq: Vec<f64> = lengthscales.iter().map(|l| 1.0 / (l * l)).collect();
    let mut out = vec![0.0; n * n];
    se_hessian_into(x.as_slice(), x_prime.as_slice(), &inv_sq, &mut out);
    DMatrix::from_row_slice(n, n, &out)
}

/// `d Pi / d log l_k` for every `k`.
pub fn se_hessian_log_lengthscale_derivatives(
    x: &DVector<f64>,
    x_prime: &DVector<f64>,
    lengthscales: &DVector<f64>,
) -> Vec<DMatrix<f64>> {
    let n = x.len();
    let a: Vec<f64> = lengthscales.iter().map(|l| 1.0 / (l * l)).collect();
    let d: Vec<f64> = (0..n).map(|i| x[i] - x_prime[i]).collect();
    let pi = se_hessian(x, x_prime, lengthscales);
    let k = se_value(x.as_slice(), x_prime.as_slice(), &a);
    (0..n)
        .map(|kk| {
            DMatrix::from_fn(n, n, |p, q| {
                let mut inner = 0.0;
                if p == kk && q == kk {
                    inner += 1.0;
                }
                if p == kk {
                    inner -= a[q] * d[p] * d[q];
                }
                if q == kk {
                    inner -= a[p] * d[p] * d[q];
                }
                a[kk] * d[kk] * d[kk] * pi[(p, q)] - 2.0 * a[kk] * k * inner
            })
        })
        .collect()
}

/// `k_phs(x, x') = s_f^2 A(x) Pi(x, x') A(x')^T` with `A = J - R` of the structure estimate.
pub fn phs_kernel(x: &DVector<f64>, x_prime: &DVector<f64>, hyper: &GpHyperparams) -> DMatrix<f64> {
    let a = hyper.structure.structure_matrix(x);
    let a_prime = hyper.structure.structure_matrix(x_prime);
    let pi = se_hessian(x, x_prime, &hyper.lengthscales);
    (a * pi * a_prime.transpose()) * (hyper.signal_std * hyper.signal_std)
}
