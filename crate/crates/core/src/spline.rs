//! Not-a-knot cubic splines and cubic Hermite interpolation.

use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

fn check_knots(t: &[f64]) -> Result<()> {
    if t.len() < 4 {
        return Err(Error::invalid("not-a-knot spline needs at least 4 knots"));
    }
    if t.windows(2).any(|w| !(w[1] > w[0])) || t.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("spline knots must be finite and strictly increasing"));
    }
    Ok(())
}

/// Matrix `D` with `D y` equal to the knot slopes of the not-a-knot cubic spline through `(t, y)`.
pub fn derivative_matrix(t: &[f64]) -> Result<DMatrix<f64>> {
    check_knots(t)?;
    let n = t.len();
    let h: Vec<f64> = t.windows(2).map(|w| w[1] - w[0]).collect();
    // A s = B y, where B y reproduces the right-hand side built from secant slopes.
    let mut a = DMatrix::zeros(n, n);
    let mut b = DMatrix::zeros(n, n);
    let add_secant = |row: usize, seg: usize, coef: f64, b: &mut DMatrix<f64>| {
        b[(row, seg + 1)] += coef / h[seg];
        b[(row, seg)] -= coef / h[seg];
    };

    let d = t[2] - t[0];
    a[(0, 0)] = h[1];
    a[(0, 1)] = d;
    add_secant(0, 0, (h[0] + 2.0 * d) * h[1] / d, &mut b);
    add_secant(0, 1, h[0] * h[0] / d, &mut b);

    for i in 1..n - 1 {
        a[(i, i - 1)] = h[i];
        a[(i, i)] = 2.0 * (h[i - 1] + h[i]);
        a[(i, i + 1)] = h[i - 1];
        add_secant(i, i - 1, 3.0 * h[i], &mut b);
        add_secant(i, i, 3.0 * h[i - 1], &mut b);
    }

    let d = t[n - 1] - t[n - 3];
    let (hl, hp) = (h[n - 2], h[n - 3]);
    a[(n - 1, n - 2)] = d;
    a[(n - 1, n - 1)] = hp;
    add_secant(n - 1, n - 3, hl * hl / d, &mut b);
    add_secant(n - 1, n - 2, (2.0 * d + hl) * hp / d, &mut b);

    a.lu()
        .solve(&b)
        .ok_or_else(|| Error::invalid("singular spline system"))
}

/// Cubic Hermite interpolant through knot values and slopes.
#[derive(Debug, Clone, PartialEq)]
pub struct Hermite {
    knots: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl Hermite {
    pub fn new(knots: Vec<f64>, values: Vec<f64>, slopes: Vec<f64>) -> Result<Self> {
        if knots.len() < 2 || values.len() != knots.len() || slopes.len() != knots.len() {
            return Err(Error::invalid("Hermite interpolant needs matching knots, values and slopes"));
        }
        if knots.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("knots must be strictly increasing"));
        }
        Ok(Self {
            knots,
            values,
            slopes,
        })
    }

    /// Not-a-knot cubic spline through `(t, y)`.
    pub fn not_a_knot(t: &[f64], y: &[f64]) -> Result<Self> {
        let d = derivative_matrix(t)?;
        let slopes = d * DVector::from_column_slice(y);
        Self::new(t.to_vec(), y.to_vec(), slopes.iter().cloned().collect())
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    fn segment(&self, t: f64) -> usize {
        let k = &self.knots;
        match k.binary_search_by(|v| v.total_cmp(&t)) {
            Ok(i) => i.min(k.len() - 2),
            Err(i) => i.saturating_sub(1).min(k.len() - 2),
        }
    }

    /// Value, first and second derivative at `t` (extrapolates with the end cubics).
    pub fn eval_all(&self, t: f64) -> (f64, f64, f64) {
        let i = self.segment(t);
        let h = self.knots[i + 1] - self.knots[i];
        let s = (t - self.knots[i]) / h;
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (m0, m1) = (self.slopes[i] * h, self.slopes[i + 1] * h);
        let s2 = s * s;
        let s3 = s2 * s;
        let value = (2.0 * s3 - 3.0 * s2 + 1.0) * y0
            + (s3 - 2.0 * s2 + s) * m0
            + (-2.0 * s3 + 3.0 * s2) * y1
            + (s3 - s2) * m1;
        let d1 = (6.0 * s2 - 6.0 * s) * y0
            + (3.0 * s2 - 4.0 * s + 1.0) * m0
            + (-6.0 * s2 + 6.0 * s) * y1
            + (3.0 * s2 - 2.0 * s) * m1;
        let d2 = (12.0 * s - 6.0) * y0 + (6.0 * s - 4.0) * m0 + (-12.0 * s + 6.0) * y1 + (6.0 * s - 2.0) * m1;
        (value, d1 / h, d2 / (h * h))
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.eval_all(t).0
    }

    pub fn derivative(&self, t: f64) -> f64 {
        self.eval_all(t).1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_is_reproduced() {
        let t: Vec<f64> = (0..7).map(|i| 0.3 * i as f64 + 0.1 * (i % 2) as f64).collect();
        let f = |x: f64| x * x * x - 2.0 * x + 1.0;
        let y: Vec<f64> = t.iter().map(|x| f(*x)).collect();
        let s = Hermite::not_a_knot(&t, &y).unwrap();
        for x in [0.05, 0.4, 1.0, 1.77] {
            let (v, d1, d2) = s.eval_all(x);
            assert!((v - f(x)).abs() < 1e-12);
            assert!((d1 - (3.0 * x * x - 2.0)).abs() < 1e-11);
            assert!((d2 - 6.0 * x).abs() < 1e-10);
        }
    }

    #[test]
    fn derivative_matrix_annihilates_constants() {
        let t: Vec<f64> = (0..10).map(|i| i as f64 * 0.5).collect();
        let d = derivative_matrix(&t).unwrap();
        let ones = DVector::from_element(10, 1.0);
        assert!((d * ones).amax() < 1e-12);
    }

    #[test]
    fn smooth_function_slopes_converge() {
        let err = |n: usize| {
            let t: Vec<f64> = (0..n).map(|i| 3.0 * i as f64 / (n - 1) as f64).collect();
            let y: Vec<f64> = t.iter().map(|x| libm::sin(*x)).collect();
            let d = derivative_matrix(&t).unwrap() * DVector::from_vec(y);
            t.iter()
                .zip(d.iter())
                .map(|(x, s)| (s - libm::cos(*x)).abs())
                .fold(0.0, f64::max)
        };
        let (coarse, fine) = (err(21), err(41));
        assert!(fine < coarse / 8.0, "{coarse} {fine}");
    }

    #[test]
    fn rejects_bad_knots() {
        assert!(derivative_matrix(&[0.0, 1.0, 2.0]).is_err());
        assert!(derivative_matrix(&[0.0, 1.0, 1.0, 2.0]).is_err());
    }
}
