//! Full-rank left annihilators `G_perp` with `G_perp G = 0`.

use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Orthonormal basis (as rows) of the left null space of `g`.
///
/// Standard basis vectors are projected onto the complement of `range(g)` and
/// orthonormalized in order, so the result is deterministic. With `previous`, each row's sign
/// is flipped to agree with the matching row of the earlier basis.
pub fn left_annihilator(g: &DMatrix<f64>, previous: Option<&DMatrix<f64>>) -> Result<DMatrix<f64>> {
    let (n, m) = g.shape();
    if m > n {
        return Err(Error::Synthesis("input matrix has more columns than rows".into()));
    }
    let gtg = g.tr_mul(g);
    let inv = gtg
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Synthesis("G^T G is singular".into()))?
        .inverse();
    let projector = DMatrix::identity(n, n) - g * inv * g.transpose();
    let mut rows: Vec<DVector<f64>> = Vec::with_capacity(n - m);
    for i in 0..n {
        if rows.len() == n - m {
            break;
        }
        let mut v = projector.column(i).into_owned();
        for r in &rows {
            let c = r.dot(&v);
            v.axpy(-c, r, 1.0);
        }
        // second pass for numerical orthogonality
        for r in &rows {
            let c = r.dot(&v);
            v.axpy(-c, r, 1.0);
        }
        let norm = v.norm();
        if norm > 1e-8 {
            rows.push(v / norm);
        }
    }
    if rows.len() != n - m {
        return Err(Error::Synthesis("could not complete the annihilator basis".into()));
    }
    let mut out = DMatrix::zeros(n - m, n);
    for (k, r) in rows.iter().enumerate() {
        let flip = previous
            .filter(|p| p.shape() == (n - m, n))
            .map(|p| p.row(k).transpose().dot(r) < 0.0)
            .unwrap_or(false);
        let sign = if flip { -1.0 } else { 1.0 };
        out.set_row(k, &(r.transpose() * sign));
    }
    Ok(out)
}
