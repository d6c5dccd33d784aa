//! Passivity-based tracking control from a learned (or exact) port-Hamiltonian model.

pub mod annihilator;
pub mod conditions;
pub mod desired;
pub mod ida_pbc;
pub mod plan;
pub mod tracking;
pub mod validation;

use nalgebra::{DMatrix, DVector};

use crate::gp::GpPhsModel;
use crate::phs::PhsModel;

pub use annihilator::left_annihilator;
pub use conditions::{ultimate_bound, verify_dissipation_condition, worst_case_margin, ConditionReport, MarginSample, SamplingSpec};
pub use desired::{DesiredDynamics, DesiredHamiltonian, QuadraticHamiltonian, ShiftedHamiltonian};
pub use ida_pbc::ClassicalIdaPbc;
pub use plan::{solve_reference_plan, AirGapReference, ConstantReference, PlanOptions, PrimaryReference, ReferencePlan};
pub use tracking::{matching_residual, microactuator_reduced_control, TrackingController};
pub use validation::{count_increases, hd_along, lasalle_probe, validate_hd_minimum, HdMinimumCheck, LaSalleReport};

/// Per-dimension bound on the model error `|mu(x) - f(x)|`.
pub trait ErrorEnvelope {
    fn error_envelope(&self, x: &DVector<f64>) -> DVector<f64>;
}

/// A model usable for control synthesis: a port-Hamiltonian estimate with an error envelope.
///
/// The drift estimate `mu(x)` is [`PhsModel::drift`].
pub trait DynamicsEstimate: PhsModel + ErrorEnvelope {}

impl<T: PhsModel + ErrorEnvelope> DynamicsEstimate for T {}

impl ErrorEnvelope for GpPhsModel {
    fn error_envelope(&self, x: &DVector<f64>) -> DVector<f64> {
        GpPhsModel::error_envelope(self, x)
    }
}

impl<E: ErrorEnvelope + ?Sized> ErrorEnvelope for &E {
    fn error_envelope(&self, x: &DVector<f64>) -> DVector<f64> {
        (**self).error_envelope(x)
    }
}

/// The true plant used in place of a learned model (zero model error).
#[derive(Debug, Clone)]
pub struct ExactModel<M>(pub M);

impl<M: PhsModel> PhsModel for ExactModel<M> {
    fn dim_state(&self) -> usize {
        self.0.dim_state()
    }

    fn dim_input(&self) -> usize {
        self.0.dim_input()
    }

    fn interconnection(&self, x: &DVector<f64>) -> DMatrix<f64> {
        self.0.interconnection(x)
    }

    fn dissipation(&self, x: &DVector<f64>) -> DMatrix<f64> {
        self.0.dissipation(x)
    }

    fn io_matrix(&self, x: &DVector<f64>) -> DMatrix<f64> {
        self.0.io_matrix(x)
    }

    fn hamiltonian(&self, x: &DVector<f64>) -> f64 {
        self.0.hamiltonian(x)
    }

    fn hamiltonian_gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        self.0.hamiltonian_gradient(x)
    }
}

impl<M: PhsModel> ErrorEnvelope for ExactModel<M> {
    fn error_envelope(&self, _x: &DVector<f64>) -> DVector<f64> {
        DVector::zeros(self.0.dim_state())
    }
}

/// State-independent envelope.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstantEnvelope(pub DVector<f64>);

impl ErrorEnvelope for ConstantEnvelope {
    fn error_envelope(&self, _x: &DVector<f64>) -> DVector<f64> {
        self.0.clone()
    }
}
