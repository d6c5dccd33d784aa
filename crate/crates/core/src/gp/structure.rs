//! Parametric structure estimates `J(x|phi_J)`, `R(x|phi_R)`, `G(x|phi_G)`.

use alloc::vec;
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;
use crate::math::{sigmoid, softplus, softplus_inverse};

/// Structure matrices as functions of their parameters.
///
/// Every variant keeps `J` skew-symmetric and `R` positive semi-definite for all parameter
/// values: fixed matrices are validated once, and the microactuator parameters pass through a
/// softplus.
#[derive(Debug, Clone, PartialEq)]
pub enum StructureEstimate {
    /// Known constant matrices without free parameters.
    Fixed {
        j: DMatrix<f64>,
        r: DMatrix<f64>,
        g: DMatrix<f64>,
    },
    /// `J = [[0,1,0],[-1,0,0],[0,0,0]]`, `R = diag(0, b, 1/r)`, `G = (0, 0, 1/r)^T` with
    /// `b = softplus(damping_raw)` and `r = softplus(resistance_raw)`.
    Microactuator { damping_raw: f64, resistance_raw: f64 },
}

impl StructureEstimate {
    pub fn fixed(j: DMatrix<f64>, r: DMatrix<f64>, g: DMatrix<f64>) -> Result<Self> {
        let n = j.nrows();
        if j.ncols() != n || r.shape() != (n, n) || g.nrows() != n {
            return Err(Error::invalid("structure matrices have inconsistent shapes"));
        }
        let scale = j.amax().max(r.amax()).max(1.0);
        if linalg::skew_defect(&j) > 1e-12 * scale {
            return Err(Error::invalid("J must be skew-symmetric"));
        }
        if (&r - r.transpose()).amax() > 1e-12 * scale || linalg::min_symmetric_eigenvalue(&r) < -1e-12 * scale {
            return Err(Error::invalid("R must be symmetric positive semi-definite"));
        }
        Ok(Self::Fixed { j, r, g })
    }

    /// Microactuator structure with positive damping `b` and resistance `r`.
    pub fn microactuator(damping: f64, resistance: f64) -> Result<Self> {
        if !(damping > 0.0 && resistance > 0.0 && damping.is_finite() && resistance.is_finite()) {
            return Err(Error::invalid("damping and resistance estimates must be positive"));
        }
        Ok(Self::Microactuator {
            damping_raw: softplus_inverse(damping),
            resistance_raw: softplus_inverse(resistance),
        })
    }

    pub fn dim_state(&self) -> usize {
        match self {
            Self::Fixed { j, .. } => j.nrows(),
            Self::Microactuator { .. } => 3,
        }
    }

    pub fn dim_input(&self) -> usize {
        match self {
            Self::Fixed { g, .. } => g.ncols(),
            Self::Microactuator { .. } => 1,
        }
    }

    /// Estimated `(b, r)` for the microactuator structure.
    pub fn microactuator_params(&self) -> Option<(f64, f64)> {
        match self {
            Self::Microactuator {
                damping_raw,
                resistance_raw,
            } => Some((softplus(*damping_raw), softplus(*resistance_raw))),
            Self::Fixed { .. } => None,
        }
    }

    /// Number of free (unconstrained) parameters.
    pub fn num_params(&self) -> usize {
        match self {
            Self::Fixed { .. } => 0,
            Self::Microactuator { .. } => 2,
        }
    }

    pub fn params(&self) -> Vec<f64> {
        match self {
            Self::Fixed { .. } => Vec::new(),
            Self::Microactuator {
                damping_raw,
                resistance_raw,
            } => vec![*damping_raw, *resistance_raw],
        }
    }

    pub fn with_params(&self, p: &[f64]) -> Self {
        match self {
            Self::Fixed { .. } => self.clone(),
            Self::Microactuator { .. } => Self::Microactuator {
                damping_raw: p[0],
                resistance_raw: p[1],
            },
        }
    }

    pub fn interconnection(&self, _x: &DVector<f64>) -> DMatrix<f64> {
        match self {
            Self::Fixed { j, .. } => j.clone(),
            Self::Microactuator { .. } => {
                DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0, 0.0])
            }
        }
    }

    pub fn dissipation(&self, _x: &DVector<f64>) -> DMatrix<f64> {
        match self {
            Self::Fixed { r, .. } => r.clone(),
            Self::Microactuator { .. } => {
                let (b, r) = self.microactuator_params().expect("microactuator variant");
                DMatrix::from_diagonal(&DVector::from_column_slice(&[0.0, b, 1.0 / r]))
            }
        }
    }

    pub fn io_matrix(&self, _x: &DVector<f64>) -> DMatrix<f64> {
        match self {
            Self::Fixed { g, .. } => g.clone(),
            Self::Microactuator { .. } => {
                let (_, r) = self.microactuator_params().expect("microactuator variant");
                DMatrix::from_column_slice(3, 1, &[0.0, 0.0, 1.0 / r])
            }
        }
    }

    /// `J(x) - R(x)`
    pub fn structure_matrix(&self, x: &DVector<f64>) -> DMatrix<f64> {
        self.interconnection(x) - self.dissipation(x)
    }

    /// Derivatives of `J - R` and `G` with respect to each free parameter.
    pub fn param_derivatives(&self, _x: &DVector<f64>) -> Vec<(DMatrix<f64>, DMatrix<f64>)> {
        match self {
            Self::Fixed { .. } => Vec::new(),
            Self::Microactuator {
                damping_raw,
                resistance_raw,
            } => {
                let r = softplus(*resistance_raw);
                let mut da_b = DMatrix::zeros(3, 3);
                da_b[(1, 1)] = -sigmoid(*damping_raw);
                let dg_b = DMatrix::zeros(3, 1);
                // d(1/r)/d raw = -sigmoid(raw) / r^2
                let dinv = -sigmoid(*resistance_raw) / (r * r);
                let mut da_r = DMatrix::zeros(3, 3);
                da_r[(2, 2)] = -dinv;
                let mut dg_r = DMatrix::zeros(3, 1);
                dg_r[(2, 0)] = dinv;
                vec![(da_b, dg_b), (da_r, dg_r)]
            }
        }
    }
}
