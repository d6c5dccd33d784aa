//! Negative log marginal likelihood of the mean-adjusted derivative data and its gradient.

use alloc::vec;
use alloc::vec::Vec;
use nalgebra::DVector;

use super::gram::{inverse_squares, mean_adjust, prior_gram, structure_rows};
use super::hyperparams::{GpHyperparams, NoiseMode, ParamLayout};
use super::kernel::se_hessian_into;
use crate::error::{Error, Result};
use crate::filter::FilteredDataset;
use crate::linalg::JitteredCholesky;
use crate::math::LN_2PI;

/// Factorization of the noisy Gram matrix and the weights `K^{-1} y`.
pub(crate) struct Conditioned {
    pub chol: JitteredCholesky,
    pub alpha: DVector<f64>,
    pub value: f64,
}

pub(crate) fn condition(
    states: &[DVector<f64>],
    targets: &DVector<f64>,
    hyper: &GpHyperparams,
    jitter: f64,
) -> Result<Conditioned> {
    let n = hyper.dim_state();
    if states.is_empty() {
        return Err(Error::invalid("dataset is empty"));
    }
    if states.iter().any(|x| x.len() != n) || targets.len() != n * states.len() {
        return Err(Error::invalid("dataset dimensions do not match the hyperparameters"));
    }
    let mut k = prior_gram(states, hyper);
    for i in 0..states.len() {
        for p in 0..n {
            k[(i * n + p, i * n + p)] += hyper.noise_var[p];
        }
    }
    let chol = JitteredCholesky::new(&k, jitter)?;
    let alpha = chol.solve(targets);
    let value = 0.5 * targets.dot(&alpha) + 0.5 * chol.log_det() + 0.5 * targets.len() as f64 * LN_2PI;
    if !value.is_finite() {
        return Err(Error::Conditioning { jitter: chol.jitter });
    }
    Ok(Conditioned { chol, alpha, value })
}

/// `1/2 y^T K^{-1} y + 1/2 log|K| + (nN/2) log 2 pi` with `y` the mean-adjusted derivatives.
pub fn negative_log_marginal_likelihood(dataset: &FilteredDataset, hyper: &GpHyperparams, jitter: f64) -> Result<f64> {
    let y = mean_adjust(dataset, &hyper.structure)?;
    Ok(condition(dataset.states(), &y, hyper, jitter)?.value)
}

/// NLML and its gradient with respect to the packed parameters of `layout`.
pub fn nlml_with_gradient(
    dataset: &FilteredDataset,
    hyper: &GpHyperparams,
    layout: &ParamLayout,
    jitter: f64,
) -> Result<(f64, DVector<f64>)> {
    let n = hyper.dim_state();
    let states = dataset.states();
    let count = states.len();
    let y = mean_adjust(dataset, &hyper.structure)?;
    let c = condition(states, &y, hyper, jitter)?;
    let kinv = c.chol.inverse();
    let alpha = &c.alpha;
    let w = |r: usize, s: usize| kinv[(r, s)] - alpha[r] * alpha[s];

    let sf2 = hyper.signal_std * hyper.signal_std;
    let inv_sq = inverse_squares(hyper);
    let a = structure_rows(&hyper.structure, states);
    let with_structure = layout.structure && hyper.structure.num_params() > 0;

    let mut grad = DVector::zeros(layout.len(hyper));
    let mut pi_inner = 0.0;
    let mut len_grad = vec![0.0; n];
    let mut m_acc: Vec<Vec<f64>> = if with_structure { vec![vec![0.0; n * n]; count] } else { Vec::new() };

    let mut pi = vec![0.0; n * n];
    let mut wb = vec![0.0; n * n];
    let mut wa = vec![0.0; n * n];
    let mut g = vec![0.0; n * n];
    let mut d = vec![0.0; n];
    for i in 0..count {
        for j in i..count {
            let xi = states[i].as_slice();
            let xj = states[j].as_slice();
            let kval = se_hessian_into(xi, xj, &inv_sq, &mut pi);
            for p in 0..n {
                d[p] = xi[p] - xj[p];
                for q in 0..n {
                    wb[p * n + q] = w(i * n + p, j * n + q);
                }
            }
            // wa = W_ij A_j
            for p in 0..n {
                for q in 0..n {
                    let mut s = 0.0;
                    for r in 0..n {
                        s += wb[p * n + r] * a[j][r * n + q];
                    }
                    wa[p * n + q] = s;
                }
            }
            // g = A_i^T W_ij A_j
            for p in 0..n {
                for q in 0..n {
                    let mut s = 0.0;
                    for r in 0..n {
                        s += a[i][r * n + p] * wa[r * n + q];
                    }
                    g[p * n + q] = s;
                }
            }
            let weight = if i == j { 1.0 } else { 2.0 };
            let gp: f64 = g.iter().zip(&pi).map(|(x, y)| x * y).sum();
            pi_inner += weight * gp;
            for k in 0..n {
                let ak = inv_sq[k];
                let mut row = 0.0;
                let mut col = 0.0;
                for b in 0..n {
                    row += g[k * n + b] * inv_sq[b] * d[b];
                    col += g[b * n + k] * inv_sq[b] * d[b];
                }
                let dk = ak * d[k] * d[k] * gp - 2.0 * ak * kval * (g[k * n + k] - d[k] * row - d[k] * col);
                len_grad[k] += weight * dk;
            }
            if with_structure {
                // M_i += W_ij A_j Pi_ij^T, M_j += W_ij^T A_i Pi_ij
                for p in 0..n {
                    for q in 0..n {
                        let mut s = 0.0;
                        for r in 0..n {
                            s += wa[p * n + r] * pi[q * n + r];
                        }
                        m_acc[i][p * n + q] += s;
                    }
                }
                if i != j {
                    let mut wta = vec![0.0; n * n];
                    for p in 0..n {
                        for q in 0..n {
                            let mut s = 0.0;
                            for r in 0..n {
                                s += wb[r * n + p] * a[i][r * n + q];
                            }
                            wta[p * n + q] = s;
                        }
                    }
                    for p in 0..n {
                        for q in 0..n {
                            let mut s = 0.0;
                            for r in 0..n {
                                s += wta[p * n + r] * pi[r * n + q];
                            }
                            m_acc[j][p * n + q] += s;
                        }
                    }
                }
            }
        }
    }

    grad[0] = sf2 * pi_inner;
    for k in 0..n {
        grad[1 + k] = 0.5 * sf2 * len_grad[k];
    }
    let mut offset = 1 + n;
    if let NoiseMode::Learned { floor } = layout.noise {
        for p in 0..n {
            let trace: f64 = (0..count).map(|i| w(i * n + p, i * n + p)).sum();
            grad[offset + p] = 0.5 * (hyper.noise_var[p] - floor) * trace;
        }
        offset += n;
    }
    if with_structure {
        for (i, x) in states.iter().enumerate() {
            let ders = hyper.structure.param_derivatives(x);
            let u = &dataset.inputs()[i];
            let ai = alpha.rows(i * n, n);
            for (s, (da, dg)) in ders.iter().enumerate() {
                let mut v = 0.0;
                for p in 0..n {
                    for q in 0..n {
                        v += da[(p, q)] * m_acc[i][p * n + q];
                    }
                }
                let dy = -(dg * u);
                grad[offset + s] += sf2 * v + ai.dot(&dy);
            }
        }
    }
    Ok((c.value, grad))
}

/// Central finite-difference gradient of the NLML in packed coordinates.
pub fn nlml_finite_difference_gradient(
    dataset: &FilteredDataset,
    hyper: &GpHyperparams,
    layout: &ParamLayout,
    jitter: f64,
    step: f64,
) -> Result<DVector<f64>> {
    let theta = layout.pack(hyper);
    let mut out = DVector::zeros(theta.len());
    for k in 0..theta.len() {
        let mut tp = theta.clone();
        tp[k] += step;
        let mut tm = theta.clone();
        tm[k] -= step;
        let fp = negative_log_marginal_likelihood(dataset, &layout.unpack(&tp, hyper), jitter)?;
        let fm = negative_log_marginal_likelihood(dataset, &layout.unpack(&tm, hyper), jitter)?;
        out[k] = (fp - fm) / (2.0 * step);
    }
    Ok(out)
}
