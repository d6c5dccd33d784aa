//! Dense helpers on top of nalgebra: jittered Cholesky, SPD inverse, small solves.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Largest diagonal jitter tried before a Gram matrix is declared singular.
pub const MAX_JITTER: f64 = 1e-6;

/// Lower Cholesky factor of `K + jitter * I` together with the jitter that made it succeed.
#[derive(Debug, Clone)]
pub struct JitteredCholesky {
    pub lower: DMatrix<f64>,
    pub jitter: f64,
}

impl JitteredCholesky {
    /// Factorizes `k + j I`, starting at `base_jitter` and growing tenfold up to [`MAX_JITTER`].
    pub fn new(k: &DMatrix<f64>, base_jitter: f64) -> Result<Self> {
        let mut jitter = base_jitter.max(0.0);
        loop {
            let mut shifted = k.clone();
            if jitter > 0.0 {
                for i in 0..shifted.nrows() {
                    shifted[(i, i)] += jitter;
                }
            }
            if let Some(ch) = shifted.cholesky() {
                let lower = ch.unpack();
                if lower.iter().all(|v| v.is_finite()) {
                    return Ok(Self { lower, jitter });
                }
            }
            let next = if jitter == 0.0 { 1e-12 } else { jitter * 10.0 };
            if next > MAX_JITTER * (1.0 + 1e-9) {
                return Err(Error::Conditioning { jitter });
            }
            jitter = next;
        }
    }

    pub fn log_det(&self) -> f64 {
        2.0 * self.lower.diagonal().iter().map(|d| crate::math::ln(*d)).sum::<f64>()
    }

    /// `K^{-1} b`
    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        let y = self
            .lower
            .solve_lower_triangular(b)
            .expect("cholesky factor has a nonzero diagonal");
        self.lower
            .tr_solve_lower_triangular(&y)
            .expect("cholesky factor has a nonzero diagonal")
    }

    /// `L^{-1} B`
    pub fn solve_lower(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        self.lower
            .solve_lower_triangular(b)
            .expect("cholesky factor has a nonzero diagonal")
    }

    pub fn inverse(&self) -> DMatrix<f64> {
        spd_inverse_from_lower(&self.lower)
    }
}

/// `(L L^T)^{-1}` from a lower-triangular factor.
///
/// Column-major sweeps keep every inner loop contiguous; this is several times faster than
/// solving against the identity for the Gram sizes used in training.
pub fn spd_inverse_from_lower(lower: &DMatrix<f64>) -> DMatrix<f64> {
    let n = lower.nrows();
    let ls = lower.as_slice();
    let mut linv = DMatrix::<f64>::zeros(n, n);
    {
        let s = linv.as_mut_slice();
        for j in 0..n {
            let col = &mut s[j * n..(j + 1) * n];
            col[j] = 1.0;
            for i in j..n {
                let yi = col[i] / ls[i * n + i];
                col[i] = yi;
                if yi != 0.0 {
                    let lc = &ls[i * n + i + 1..(i + 1) * n];
                    for (c, &lv) in col[i + 1..].iter_mut().zip(lc) {
                        *c -= yi * lv;
                    }
                }
            }
        }
    }
    let mut out = DMatrix::<f64>::zeros(n, n);
    let s = linv.as_slice();
    for j in 0..n {
        for i in j..n {
            let v = dot(&s[i * n + i..(i + 1) * n], &s[j * n + i..(j + 1) * n]);
            out[(i, j)] = v;
            out[(j, i)] = v;
        }
    }
    out
}

/// Dot product with eight independent accumulators (lets the compiler vectorize).
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 8];
    let ca = a.chunks_exact(8);
    let cb = b.chunks_exact(8);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for k in 0..8 {
            acc[k] += x[k] * y[k];
        }
    }
    let mut s: f64 = acc.iter().sum();
    for (x, y) in ra.iter().zip(rb) {
        s += x * y;
    }
    s
}

/// Smallest eigenvalue of the symmetric part of `m`.
pub fn min_symmetric_eigenvalue(m: &DMatrix<f64>) -> f64 {
    let sym = (m + m.transpose()) * 0.5;
    sym.symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min)
}

/// Largest absolute entry of `m + m^T` relative to the largest entry of `m` (0 for the zero matrix).
pub fn skew_defect(m: &DMatrix<f64>) -> f64 {
    let scale = m.amax();
    if scale == 0.0 {
        return 0.0;
    }
    (m + m.transpose()).amax() / scale
}

/// Least-squares solution of `a x = b` via SVD; exact when `a` is square and invertible.
pub fn least_squares(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    let svd = a.clone().svd(true, true);
    let tol = 1e-13 * svd.singular_values.amax().max(f64::MIN_POSITIVE);
    svd.solve(b, tol)
        .map_err(|e| Error::invalid(alloc::format!("least squares: {e}")))
}

/// `(G^T G)^{-1} G^T v`, failing when `G^T G` is singular.
pub fn left_pseudo_inverse_apply(g: &DMatrix<f64>, v: &DVector<f64>) -> Result<DVector<f64>> {
    let gtg = g.transpose() * g;
    let scale = gtg.amax();
    let lu = gtg.clone().lu();
    let det = lu.determinant();
    if scale == 0.0 || !det.is_finite() || det.abs() <= 1e-12 * libm::pow(scale, gtg.nrows() as f64) {
        return Err(Error::Synthesis(alloc::string::String::from(
            "G^T G is singular",
        )));
    }
    lu.solve(&(g.transpose() * v))
        .ok_or_else(|| Error::Synthesis(alloc::string::String::from("G^T G is singular")))
}
