//! Gram matrix assembly and prior-mean adjustment.

use alloc::vec;
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

use super::hyperparams::GpHyperparams;
use super::kernel::se_hessian_into;
use super::structure::StructureEstimate;
use crate::error::{Error, Result};
use crate::filter::FilteredDataset;

/// Row-major `n x n` product `A P B^T` of small square matrices.
pub(crate) fn sandwich(a: &[f64], p: &[f64], b: &[f64], n: usize, out: &mut [f64]) {
    let mut tmp = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik != 0.0 {
                for j in 0..n {
                    tmp[i * n + j] += aik * p[k * n + j];
                }
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            let mut s = 0.0;
            for k in 0..n {
                s += tmp[i * n + k] * b[j * n + k];
            }
            out[i * n + j] = s;
        }
    }
}

/// Row-major copies of `J - R` at every state.
pub(crate) fn structure_rows(structure: &StructureEstimate, states: &[DVector<f64>]) -> Vec<Vec<f64>> {
    states
        .iter()
        .map(|x| {
            let a = structure.structure_matrix(x);
            let n = a.nrows();
            (0..n * n).map(|k| a[(k / n, k % n)]).collect()
        })
        .collect()
}

pub(crate) fn inverse_squares(hyper: &GpHyperparams) -> Vec<f64> {
    hyper.lengthscales.iter().map(|l| 1.0 / (l * l)).collect()
}

/// Kernel blocks only, without noise or jitter.
pub fn prior_gram(states: &[DVector<f64>], hyper: &GpHyperparams) -> DMatrix<f64> {
    let n = hyper.dim_state();
    let count = states.len();
    let sf2 = hyper.signal_std * hyper.signal_std;
    let inv_sq = inverse_squares(hyper);
    let a = structure_rows(&hyper.structure, states);
    let mut k = DMatrix::zeros(n * count, n * count);
    let mut pi = vec![0.0; n * n];
    let mut block = vec![0.0; n * n];
    for i in 0..count {
        for j in i..count {
            se_hessian_into(states[i].as_slice(), states[j].as_slice(), &inv_sq, &mut pi);
            sandwich(&a[i], &pi, &a[j], n, &mut block);
            for p in 0..n {
                for q in 0..n {
                    let v = sf2 * block[p * n + q];
                    k[(i * n + p, j * n + q)] = v;
                    k[(j * n + q, i * n + p)] = v;
                }
            }
        }
    }
    k
}

/// Block Gram matrix with `diag(noise) + jitter I` added to the diagonal blocks.
pub fn gram_matrix(states: &[DVector<f64>], hyper: &GpHyperparams, jitter: f64) -> Result<DMatrix<f64>> {
    let n = hyper.dim_state();
    if states.is_empty() {
        return Err(Error::invalid("Gram matrix needs at least one state"));
    }
    if states.iter().any(|x| x.len() != n) {
        return Err(Error::invalid("state dimension does not match the hyperparameters"));
    }
    let mut k = prior_gram(states, hyper);
    for i in 0..states.len() {
        for p in 0..n {
            k[(i * n + p, i * n + p)] += hyper.noise_var[p] + jitter;
        }
    }
    Ok(k)
}

/// Stacked `x'(t_i) - G(x_i) u(t_i)`.
pub fn mean_adjust(dataset: &FilteredDataset, structure: &StructureEstimate) -> Result<DVector<f64>> {
    let n = dataset.dim_state();
    if structure.dim_state() != n || structure.dim_input() != dataset.dim_input() {
        return Err(Error::invalid("dataset dimensions do not match the structure"));
    }
    let mut y = DVector::zeros(n * dataset.len());
    for (i, ((x, dx), u)) in dataset
        .states()
        .iter()
        .zip(dataset.derivatives())
        .zip(dataset.inputs())
        .enumerate()
    {
        let r = dx - structure.io_matrix(x) * u;
        y.rows_mut(i * n, n).copy_from(&r);
    }
    Ok(y)
}
