//! Port-Hamiltonian models `x' = [J(x) - R(x)] grad H(x) + G(x) u`, `y = G(x)^T grad H(x)`.

use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{fmt_state, Error, Result};
use crate::linalg;

/// A port-Hamiltonian system described by its structure matrices and energy.
///
/// Implementations must be pure: evaluating any method twice at the same state returns the
/// same value, and no method mutates shared state.
pub trait PhsModel {
    fn dim_state(&self) -> usize;
    fn dim_input(&self) -> usize;

    /// Skew-symmetric interconnection matrix `J(x)`.
    fn interconnection(&self, x: &DVector<f64>) -> DMatrix<f64>;
    /// Symmetric positive semi-definite dissipation matrix `R(x)`.
    fn dissipation(&self, x: &DVector<f64>) -> DMatrix<f64>;
    /// Input matrix `G(x)`, `n x m`.
    fn io_matrix(&self, x: &DVector<f64>) -> DMatrix<f64>;
    fn hamiltonian(&self, x: &DVector<f64>) -> f64;
    fn hamiltonian_gradient(&self, x: &DVector<f64>) -> DVector<f64>;

    /// `J(x) - R(x)`
    fn structure_matrix(&self, x: &DVector<f64>) -> DMatrix<f64> {
        self.interconnection(x) - self.dissipation(x)
    }

    /// Drift `[J(x) - R(x)] grad H(x)` without the input term.
    fn drift(&self, x: &DVector<f64>) -> DVector<f64> {
        self.structure_matrix(x) * self.hamiltonian_gradient(x)
    }

    /// Right-hand side of the state equation; fails on non-finite results.
    fn eval_dynamics(&self, x: &DVector<f64>, u: &DVector<f64>) -> Result<DVector<f64>> {
        if x.len() != self.dim_state() || u.len() != self.dim_input() {
            return Err(Error::invalid("state or input has the wrong dimension"));
        }
        let dx = self.drift(x) + self.io_matrix(x) * u;
        if dx.iter().all(|v| v.is_finite()) {
            Ok(dx)
        } else {
            Err(Error::ModelEvaluation { state: fmt_state(x) })
        }
    }

    /// Port output `y = G(x)^T grad H(x)`.
    fn output(&self, x: &DVector<f64>) -> DVector<f64> {
        self.io_matrix(x).transpose() * self.hamiltonian_gradient(x)
    }

    /// Instantaneous dissipated power `grad H^T R grad H`.
    fn dissipated_power(&self, x: &DVector<f64>) -> f64 {
        let g = self.hamiltonian_gradient(x);
        g.dot(&(self.dissipation(x) * &g))
    }
}

impl<M: PhsModel + ?Sized> PhsModel for &M {
    fn dim_state(&self) -> usize {
        (**self).dim_state()
    }
    fn dim_input(&self) -> usize {
        (**self).dim_input()
    }
    fn interconnection(&self, x: &DVector<f64>) -> DMatrix<f64> {
        (**self).interconnection(x)
    }
    fn dissipation(&self, x: &DVector<f64>) -> DMatrix<f64> {
        (**self).dissipation(x)
    }
    fn io_matrix(&self, x: &DVector<f64>) -> DMatrix<f64> {
        (**self).io_matrix(x)
    }
    fn hamiltonian(&self, x: &DVector<f64>) -> f64 {
        (**self).hamiltonian(x)
    }
    fn hamiltonian_gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        (**self).hamiltonian_gradient(x)
    }
}

/// Linear PHS with constant `J`, `R`, `G` and quadratic energy `H = x^T Q x / 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearPhs {
    pub j: DMatrix<f64>,
    pub r: DMatrix<f64>,
    pub g: DMatrix<f64>,
    pub q: DMatrix<f64>,
}

impl LinearPhs {
    pub fn new(j: DMatrix<f64>, r: DMatrix<f64>, g: DMatrix<f64>, q: DMatrix<f64>) -> Result<Self> {
        let n = j.nrows();
        if j.ncols() != n || r.shape() != (n, n) || q.shape() != (n, n) || g.nrows() != n {
            return Err(Error::Construction("inconsistent matrix shapes".into()));
        }
        if linalg::skew_defect(&j) > 1e-12 {
            return Err(Error::Construction("J is not skew-symmetric".into()));
        }
        if (&r - r.transpose()).amax() > 1e-12 * r.amax().max(1.0)
            || linalg::min_symmetric_eigenvalue(&r) < -1e-10
        {
            return Err(Error::Construction("R is not symmetric PSD".into()));
        }
        Ok(Self { j, r, g, q })
    }

    /// Mass-spring-damper with state `(position, momentum)` and a force input.
    pub fn mass_spring_damper(mass: f64, stiffness: f64, damping: f64) -> Result<Self> {
        if mass <= 0.0 || stiffness <= 0.0 || damping < 0.0 {
            return Err(Error::Construction("mass, stiffness must be > 0 and damping >= 0".into()));
        }
        Self::new(
            DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]),
            DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, damping]),
            DMatrix::from_column_slice(2, 1, &[0.0, 1.0]),
            DMatrix::from_row_slice(2, 2, &[stiffness, 0.0, 0.0, 1.0 / mass]),
        )
    }
}

impl PhsModel for LinearPhs {
    fn dim_state(&self) -> usize {
        self.j.nrows()
    }
    fn dim_input(&self) -> usize {
        self.g.ncols()
    }
    fn interconnection(&self, _x: &DVector<f64>) -> DMatrix<f64> {
        self.j.clone()
    }
    fn dissipation(&self, _x: &DVector<f64>) -> DMatrix<f64> {
        self.r.clone()
    }
    fn io_matrix(&self, _x: &DVector<f64>) -> DMatrix<f64> {
        self.g.clone()
    }
    fn hamiltonian(&self, x: &DVector<f64>) -> f64 {
        0.5 * x.dot(&(&self.q * x))
    }
    fn hamiltonian_gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        (&self.q + self.q.transpose()) * x * 0.5
    }
}

/// Worst violations of the structural invariants over a set of states.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StructureCheck {
    /// `max |J + J^T| / max |J|`
    pub skew_defect: f64,
    /// Smallest eigenvalue of `R` seen.
    pub min_dissipation_eigenvalue: f64,
    /// Largest relative error between `grad H` and central differences of `H`.
    pub gradient_error: f64,
}

impl StructureCheck {
    pub fn holds(&self) -> bool {
        self.skew_defect <= 1e-12 && self.min_dissipation_eigenvalue >= -1e-10 && self.gradient_error <= 1e-6
    }
}

/// Central-difference gradient of a scalar function.
pub fn finite_difference_gradient(f: impl Fn(&DVector<f64>) -> f64, x: &DVector<f64>) -> DVector<f64> {
    let mut g = DVector::zeros(x.len());
    for i in 0..x.len() {
        let h = 1e-6 * x[i].abs().max(1.0);
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[i] += h;
        xm[i] -= h;
        g[i] = (f(&xp) - f(&xm)) / (2.0 * h);
    }
    g
}

/// Checks skew-symmetry of `J`, PSD of `R` and `grad H` against finite differences at `states`.
pub fn check_structure<M: PhsModel + ?Sized>(model: &M, states: &[DVector<f64>]) -> StructureCheck {
    let mut out = StructureCheck {
        min_dissipation_eigenvalue: f64::INFINITY,
        ..Default::default()
    };
    for x in states {
        out.skew_defect = out.skew_defect.max(linalg::skew_defect(&model.interconnection(x)));
        out.min_dissipation_eigenvalue = out
            .min_dissipation_eigenvalue
            .min(linalg::min_symmetric_eigenvalue(&model.dissipation(x)));
        let g = model.hamiltonian_gradient(x);
        let fd = finite_difference_gradient(|z| model.hamiltonian(z), x);
        let scale = g.amax().max(fd.amax()).max(1.0);
        out.gradient_error = out.gradient_error.max((&g - &fd).amax() / scale);
    }
    out
}

/// Uniform random states in the box `[lo, hi]^n`.
pub fn sample_box<R: Rng + ?Sized>(rng: &mut R, lo: &[f64], hi: &[f64], count: usize) -> Vec<DVector<f64>> {
    (0..count)
        .map(|_| DVector::from_iterator(lo.len(), lo.iter().zip(hi).map(|(a, b)| rng.random_range(*a..=*b))))
        .collect()
}
