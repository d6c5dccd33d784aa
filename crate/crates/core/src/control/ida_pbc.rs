//! Set-point IDA-PBC for a known port-Hamiltonian model.

use nalgebra::DVector;

use super::annihilator::left_annihilator;
use super::desired::{DesiredDynamics, DesiredHamiltonian};
use crate::error::{Error, Result};
use crate::integrate::InputSignal;
use crate::linalg::left_pseudo_inverse_apply;
use crate::phs::PhsModel;

/// `u = (G^T G)^{-1} G^T ([J_d - R_d] grad H_d(x - x*) - [J - R] grad H(x))`.
#[derive(Debug, Clone)]
pub struct ClassicalIdaPbc<M, H> {
    model: M,
    desired: DesiredDynamics<H>,
    target: DVector<f64>,
}

impl<M: PhsModel, H: DesiredHamiltonian> ClassicalIdaPbc<M, H> {
    pub fn new(model: M, desired: DesiredDynamics<H>, target: DVector<f64>) -> Result<Self> {
        let n = model.dim_state();
        if desired.dim_state() != n || target.len() != n {
            return Err(Error::invalid("desired dynamics and target must match the model"));
        }
        Ok(Self { model, desired, target })
    }

    fn mismatch(&self, x: &DVector<f64>) -> DVector<f64> {
        self.desired.target_field(&(x - &self.target)) - self.model.drift(x)
    }

    pub fn control(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        left_pseudo_inverse_apply(&self.model.io_matrix(x), &self.mismatch(x))
    }

    /// `G_perp ([J - R] grad H - [J_d - R_d] grad H_d)`; zero where the matching equation holds.
    pub fn matching_residual(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        let annihilator = left_annihilator(&self.model.io_matrix(x), None)?;
        Ok(-(annihilator * self.mismatch(x)))
    }
}

impl<M: PhsModel, H: DesiredHamiltonian> InputSignal for ClassicalIdaPbc<M, H> {
    fn input(&self, _t: f64, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.control(x)
    }
}
