//! Desired closed-loop structure `J_d`, `R_d` and energy `H_d(x_bar)`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;
use crate::optim::{minimize, LbfgsConfig};
use crate::phs::PhsModel;

/// Desired energy as a function of the tracking error `x_bar = x - x_d`.
pub trait DesiredHamiltonian {
    fn value(&self, xbar: &DVector<f64>) -> f64;
    fn gradient(&self, xbar: &DVector<f64>) -> DVector<f64>;
}

impl<T: DesiredHamiltonian + ?Sized> DesiredHamiltonian for &T {
    fn value(&self, xbar: &DVector<f64>) -> f64 {
        (**self).value(xbar)
    }

    fn gradient(&self, xbar: &DVector<f64>) -> DVector<f64> {
        (**self).gradient(xbar)
    }
}

/// `1/2 sum_i w_i (x_bar_i - c_i)^2`
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticHamiltonian {
    pub weights: DVector<f64>,
    pub center: DVector<f64>,
}

impl QuadraticHamiltonian {
    /// `1/2 |x_bar|^2`
    pub fn unit(n: usize) -> Self {
        Self {
            weights: DVector::from_element(n, 1.0),
            center: DVector::zeros(n),
        }
    }
}

impl DesiredHamiltonian for QuadraticHamiltonian {
    fn value(&self, xbar: &DVector<f64>) -> f64 {
        let d = xbar - &self.center;
        0.5 * d.iter().zip(self.weights.iter()).map(|(v, w)| w * v * v).sum::<f64>()
    }

    fn gradient(&self, xbar: &DVector<f64>) -> DVector<f64> {
        (xbar - &self.center).component_mul(&self.weights)
    }
}

/// `H_d(x_bar) = H(x_bar + s) - H(s)` for a model Hamiltonian `H` and shift `s`.
///
/// With `s` a minimizer of `H`, `H_d` has its minimum at `x_bar = 0`.
#[derive(Debug, Clone)]
pub struct ShiftedHamiltonian<M> {
    model: M,
    shift: DVector<f64>,
    offset: f64,
}

impl<M: PhsModel> ShiftedHamiltonian<M> {
    pub fn new(model: M, shift: DVector<f64>) -> Result<Self> {
        if shift.len() != model.dim_state() {
            return Err(Error::invalid("shift has the wrong dimension"));
        }
        let offset = model.hamiltonian(&shift);
        Ok(Self { model, shift, offset })
    }

    /// `H_d(x_bar) = H(x_bar)` without any shift.
    pub fn literal(model: M) -> Self {
        let n = model.dim_state();
        Self {
            model,
            shift: DVector::zeros(n),
            offset: 0.0,
        }
    }

    /// Shift at the minimizer of `H` over the box `[lo, hi]`.
    pub fn at_minimizer(model: M, lo: &[f64], hi: &[f64], counts: &[usize]) -> Result<Self> {
        let s = find_hamiltonian_minimizer(&model, lo, hi, counts)?;
        Self::new(model, s)
    }

    pub fn shift(&self) -> &DVector<f64> {
        &self.shift
    }

    pub fn model(&self) -> &M {
        &self.model
    }
}

impl<M: PhsModel> DesiredHamiltonian for ShiftedHamiltonian<M> {
    fn value(&self, xbar: &DVector<f64>) -> f64 {
        self.model.hamiltonian(&(xbar + &self.shift)) - self.offset
    }

    fn gradient(&self, xbar: &DVector<f64>) -> DVector<f64> {
        self.model.hamiltonian_gradient(&(xbar + &self.shift))
    }
}

/// Calls `f` with every point of the tensor grid on `[lo, hi]` with `counts[i]` points per axis.
pub(crate) fn for_each_grid_point(lo: &[f64], hi: &[f64], counts: &[usize], mut f: impl FnMut(&DVector<f64>)) {
    let n = lo.len();
    let total: usize = counts.iter().product();
    let mut x = DVector::zeros(n);
    for flat in 0..total {
        let mut rem = flat;
        for i in (0..n).rev() {
            let k = rem % counts[i];
            rem /= counts[i];
            x[i] = if counts[i] == 1 {
                0.5 * (lo[i] + hi[i])
            } else {
                lo[i] + (hi[i] - lo[i]) * k as f64 / (counts[i] - 1) as f64
            };
        }
        f(&x);
    }
}

fn check_box(n: usize, lo: &[f64], hi: &[f64], counts: &[usize]) -> Result<()> {
    if lo.len() != n || hi.len() != n || counts.len() != n {
        return Err(Error::invalid("box and resolution must match the state dimension"));
    }
    if lo.iter().zip(hi).any(|(a, b)| !(a <= b)) || counts.contains(&0) {
        return Err(Error::invalid("box bounds must be ordered and counts positive"));
    }
    Ok(())
}

/// Grid search over the box followed by L-BFGS refinement (kept only if it stays in the box).
pub fn find_hamiltonian_minimizer<M: PhsModel + ?Sized>(
    model: &M,
    lo: &[f64],
    hi: &[f64],
    counts: &[usize],
) -> Result<DVector<f64>> {
    check_box(model.dim_state(), lo, hi, counts)?;
    let mut best = (f64::INFINITY, DVector::zeros(lo.len()));
    for_each_grid_point(lo, hi, counts, |x| {
        let v = model.hamiltonian(x);
        if v < best.0 {
            best = (v, x.clone());
        }
    });
    if !best.0.is_finite() {
        return Err(Error::Synthesis("Hamiltonian is not finite on the search box".into()));
    }
    let refined = minimize(
        |x| {
            let v = model.hamiltonian(x);
            v.is_finite().then(|| (v, model.hamiltonian_gradient(x)))
        },
        best.1.clone(),
        &LbfgsConfig {
            gradient_tolerance: 1e-12,
            ..LbfgsConfig::default()
        },
    );
    Ok(match refined {
        Some(r) if r.value <= best.0 && r.x.iter().zip(lo.iter().zip(hi)).all(|(v, (a, b))| *a <= *v && *v <= *b) => r.x,
        _ => best.1,
    })
}

/// Target dynamics `x_bar' = [J_d - R_d] grad H_d(x_bar)` with constant `J_d` and diagonal `R_d`.
#[derive(Debug, Clone)]
pub struct DesiredDynamics<H> {
    interconnection: DMatrix<f64>,
    damping: DVector<f64>,
    hamiltonian: H,
}

impl<H: DesiredHamiltonian> DesiredDynamics<H> {
    pub fn new(interconnection: DMatrix<f64>, damping: DVector<f64>, hamiltonian: H) -> Result<Self> {
        let n = damping.len();
        if interconnection.shape() != (n, n) {
            return Err(Error::invalid("J_d must be square and match R_d"));
        }
        if linalg::skew_defect(&interconnection) > 1e-12 * interconnection.amax().max(1.0) {
            return Err(Error::invalid("J_d must be skew-symmetric"));
        }
        if damping.iter().any(|r| !(*r >= 0.0 && r.is_finite())) {
            return Err(Error::invalid("R_d entries must be nonnegative"));
        }
        Ok(Self {
            interconnection,
            damping,
            hamiltonian,
        })
    }

    /// `J_d = [[0,1,0],[-1,0,0],[0,0,0]]`, `R_d = diag(0, b, 1/r_d)`.
    pub fn microactuator(damping: f64, inv_rd: f64, hamiltonian: H) -> Result<Self> {
        let j = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        Self::new(j, DVector::from_column_slice(&[0.0, damping, inv_rd]), hamiltonian)
    }

    pub fn dim_state(&self) -> usize {
        self.damping.len()
    }

    pub fn interconnection(&self) -> &DMatrix<f64> {
        &self.interconnection
    }

    /// Diagonal of `R_d`.
    pub fn damping(&self) -> &DVector<f64> {
        &self.damping
    }

    pub fn hamiltonian(&self) -> &H {
        &self.hamiltonian
    }

    /// `J_d - R_d`
    pub fn structure_matrix(&self) -> DMatrix<f64> {
        &self.interconnection - DMatrix::from_diagonal(&self.damping)
    }

    /// `[J_d - R_d] grad H_d(x_bar)`
    pub fn target_field(&self, xbar: &DVector<f64>) -> DVector<f64> {
        self.structure_matrix() * self.hamiltonian.gradient(xbar)
    }

    /// `grad H_d^T R_d grad H_d`
    pub fn dissipation_rate(&self, xbar: &DVector<f64>) -> f64 {
        let g = self.hamiltonian.gradient(xbar);
        g.iter().zip(self.damping.iter()).map(|(g, r)| r * g * g).sum()
    }

    /// Same structure with a different desired energy.
    pub fn with_hamiltonian<H2: DesiredHamiltonian>(&self, hamiltonian: H2) -> DesiredDynamics<H2> {
        DesiredDynamics {
            interconnection: self.interconnection.clone(),
            damping: self.damping.clone(),
            hamiltonian,
        }
    }
}

