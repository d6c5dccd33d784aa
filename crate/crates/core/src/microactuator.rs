//! Electrostatic microactuator: air gap `x1`, plate momentum `x2`, charge `x3`.
//!
//! ```text
//!         [ 0  1    0  ]            [ 0  ]
//! x'  =   [-1 -b    0  ] grad H  +  [ 0  ] u
//!         [ 0  0  -1/r ]            [1/r ]
//!
//! H(x) = k/2 (x1 - x1s)^2 + x2^2 / (2m) + kappa x3^2 / C(x1)
//! ```
//!
//! `kappa` is 1 in the [`EnergyConvention::Verbatim`] form and 1/2 in the conventional
//! [`EnergyConvention::Halved`] form.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::phs::PhsModel;

/// Capacitance as a function of the air gap, stored through its reciprocal `1/C(x1)`.
///
/// Working with the reciprocal keeps the closed gap `x1 = 0` finite for the parallel-plate law.
#[derive(Debug, Clone, Copy)]
pub enum CapacitanceLaw {
    /// `C(x1) = c0 / x1`
    ParallelPlate { c0: f64 },
    /// Arbitrary law given by `1/C` and its derivative with respect to `x1`.
    Custom {
        inverse: fn(f64) -> f64,
        inverse_derivative: fn(f64) -> f64,
    },
}

impl CapacitanceLaw {
    /// `1 / C(x1)`
    pub fn inverse(&self, x1: f64) -> f64 {
        match *self {
            CapacitanceLaw::ParallelPlate { c0 } => x1 / c0,
            CapacitanceLaw::Custom { inverse, .. } => inverse(x1),
        }
    }

    /// `d(1/C)/dx1`
    pub fn inverse_derivative(&self, x1: f64) -> f64 {
        match *self {
            CapacitanceLaw::ParallelPlate { c0 } => 1.0 / c0,
            CapacitanceLaw::Custom {
                inverse_derivative, ..
            } => inverse_derivative(x1),
        }
    }

    pub fn capacitance(&self, x1: f64) -> f64 {
        1.0 / self.inverse(x1)
    }
}

impl Default for CapacitanceLaw {
    fn default() -> Self {
        CapacitanceLaw::ParallelPlate { c0: 1.0 }
    }
}

/// Whether the electrical energy is `x3^2 / C` or `x3^2 / (2C)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EnergyConvention {
    #[default]
    Verbatim,
    Halved,
}

impl EnergyConvention {
    fn factor(self) -> f64 {
        match self {
            EnergyConvention::Verbatim => 1.0,
            EnergyConvention::Halved => 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct MicroactuatorParams {
    pub mass: f64,
    pub damping: f64,
    pub stiffness: f64,
    pub resistance: f64,
    pub rest_gap: f64,
    pub capacitance: CapacitanceLaw,
    pub convention: EnergyConvention,
}

impl Default for MicroactuatorParams {
    fn default() -> Self {
        Self {
            mass: 1.0,
            damping: 0.5,
            stiffness: 10.0,
            resistance: 1.0,
            rest_gap: 1.0,
            capacitance: CapacitanceLaw::default(),
            convention: EnergyConvention::Verbatim,
        }
    }
}

/// Air-gap interval on which the capacitance law is validated by default.
pub const DEFAULT_GAP_DOMAIN: (f64, f64) = (0.0, 2.5);

#[derive(Debug, Clone)]
pub struct Microactuator {
    params: MicroactuatorParams,
}

impl Microactuator {
    pub fn new(params: MicroactuatorParams) -> Result<Self> {
        Self::with_domain(params, DEFAULT_GAP_DOMAIN)
    }

    /// Builds the model after checking `C(x1) > 0` on 201 points of `gap_domain`.
    pub fn with_domain(params: MicroactuatorParams, gap_domain: (f64, f64)) -> Result<Self> {
        let p = &params;
        if !(p.mass > 0.0 && p.resistance > 0.0 && p.stiffness > 0.0 && p.damping >= 0.0) {
            return Err(Error::Construction(
                "microactuator needs m, r, k > 0 and b >= 0".into(),
            ));
        }
        if !p.rest_gap.is_finite() || !(gap_domain.0 <= gap_domain.1) {
            return Err(Error::Construction("invalid rest gap or gap domain".into()));
        }
        for i in 0..=200 {
            let x1 = gap_domain.0 + (gap_domain.1 - gap_domain.0) * i as f64 / 200.0;
            // C > 0 (possibly infinite) <=> 1/C >= 0
            let inv = p.capacitance.inverse(x1);
            if !inv.is_finite() || inv < 0.0 {
                return Err(Error::Construction(alloc::format!(
                    "capacitance is not positive at x1 = {x1}"
                )));
            }
        }
        Ok(Self { params })
    }

    pub fn params(&self) -> &MicroactuatorParams {
        &self.params
    }

    /// Minimizer of `H`: rest gap, zero momentum, zero charge.
    pub fn equilibrium(&self) -> DVector<f64> {
        DVector::from_vec(alloc::vec![self.params.rest_gap, 0.0, 0.0])
    }
}

impl PhsModel for Microactuator {
    fn dim_state(&self) -> usize {
        3
    }

    fn dim_input(&self) -> usize {
        1
    }

    fn interconnection(&self, _x: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0, 0.0])
    }

    fn dissipation(&self, _x: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_vec(alloc::vec![
            0.0,
            self.params.damping,
            1.0 / self.params.resistance
        ]))
    }

    fn io_matrix(&self, _x: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::from_column_slice(3, 1, &[0.0, 0.0, 1.0 / self.params.resistance])
    }

    fn hamiltonian(&self, x: &DVector<f64>) -> f64 {
        let p = &self.params;
        let dx = x[0] - p.rest_gap;
        0.5 * p.stiffness * dx * dx
            + x[1] * x[1] / (2.0 * p.mass)
            + p.convention.factor() * p.capacitance.inverse(x[0]) * x[2] * x[2]
    }

    fn hamiltonian_gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        let p = &self.params;
        let kappa = p.convention.factor();
        DVector::from_vec(alloc::vec![
            p.stiffness * (x[0] - p.rest_gap) + kappa * p.capacitance.inverse_derivative(x[0]) * x[2] * x[2],
            x[1] / p.mass,
            2.0 * kappa * p.capacitance.inverse(x[0]) * x[2],
        ])
    }
}
