//! Tracking control through the modified matching equation.

use alloc::boxed::Box;
use nalgebra::DVector;

use super::annihilator::left_annihilator;
use super::desired::{DesiredDynamics, DesiredHamiltonian};
use super::plan::ReferencePlan;
use crate::error::{Error, Result};
use crate::integrate::InputSignal;
use crate::linalg::left_pseudo_inverse_apply;
use crate::phs::PhsModel;

/// `G_perp(x) (mu(x) - [J_d - R_d] grad H_d(x - x_d) - x_d')` at time `t`.
pub fn matching_residual<E, H>(
    model: &E,
    desired: &DesiredDynamics<H>,
    plan: &ReferencePlan,
    x: &DVector<f64>,
    t: f64,
) -> Result<DVector<f64>>
where
    E: PhsModel + ?Sized,
    H: DesiredHamiltonian,
{
    let (xd, xd_dot) = plan.eval(t)?;
    let annihilator = left_annihilator(&model.io_matrix(x), None)?;
    Ok(annihilator * (model.drift(x) - desired.target_field(&(x - xd)) - xd_dot))
}

type External<'a> = Box<dyn Fn(f64) -> DVector<f64> + 'a>;

/// `u = (G^T G)^{-1} G^T ([J_d - R_d] grad H_d(x_bar) + x_d' - mu(x)) + u_ex(t)`.
pub struct TrackingController<'a, E: ?Sized, H> {
    model: &'a E,
    desired: &'a DesiredDynamics<H>,
    plan: &'a ReferencePlan,
    external: Option<External<'a>>,
}

impl<'a, E: PhsModel + ?Sized, H: DesiredHamiltonian> TrackingController<'a, E, H> {
    pub fn new(model: &'a E, desired: &'a DesiredDynamics<H>, plan: &'a ReferencePlan) -> Result<Self> {
        let n = model.dim_state();
        if desired.dim_state() != n || plan.dim_state() != n {
            return Err(Error::invalid("model, desired dynamics and plan differ in dimension"));
        }
        Ok(Self {
            model,
            desired,
            plan,
            external: None,
        })
    }

    /// Adds an external input `u_ex(t)` (semi-passive configuration).
    pub fn with_external(mut self, u_ex: impl Fn(f64) -> DVector<f64> + 'a) -> Self {
        self.external = Some(Box::new(u_ex));
        self
    }

    pub fn plan(&self) -> &ReferencePlan {
        self.plan
    }

    pub fn desired(&self) -> &DesiredDynamics<H> {
        self.desired
    }

    /// Tracking error `x - x_d(t)`.
    pub fn tracking_error(&self, t: f64, x: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(x - self.plan.eval(t)?.0)
    }

    pub fn external_input(&self, t: f64) -> DVector<f64> {
        match &self.external {
            Some(f) => f(t),
            None => DVector::zeros(self.model.dim_input()),
        }
    }

    /// Control without the external input.
    pub fn base_control(&self, t: f64, x: &DVector<f64>) -> Result<DVector<f64>> {
        let (xd, xd_dot) = self.plan.eval(t)?;
        let v = self.desired.target_field(&(x - xd)) + xd_dot - self.model.drift(x);
        left_pseudo_inverse_apply(&self.model.io_matrix(x), &v)
    }

    pub fn control(&self, t: f64, x: &DVector<f64>) -> Result<DVector<f64>> {
        let mut u = self.base_control(t, x)?;
        if let Some(f) = &self.external {
            u += f(t);
        }
        Ok(u)
    }

    /// Passive output `y_ex = G(x)^T grad H_d(x_bar)` conjugate to `u_ex`.
    pub fn external_output(&self, t: f64, x: &DVector<f64>) -> Result<DVector<f64>> {
        let xbar = self.tracking_error(t, x)?;
        Ok(self.model.io_matrix(x).transpose() * self.desired.hamiltonian().gradient(&xbar))
    }
}

impl<E: PhsModel + ?Sized, H: DesiredHamiltonian> InputSignal for TrackingController<'_, E, H> {
    fn input(&self, t: f64, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.control(t, x)
    }
}

/// Closed form of the tracking law for the microactuator structure `G = (0, 0, 1/r)^T`:
/// `u = r (-(1/r_d) dH_d/dx_bar3 + x_d3') + dH/dx3`.
pub fn microactuator_reduced_control<E, H>(
    model: &E,
    desired: &DesiredDynamics<H>,
    plan: &ReferencePlan,
    x: &DVector<f64>,
    t: f64,
) -> Result<f64>
where
    E: PhsModel + ?Sized,
    H: DesiredHamiltonian,
{
    let g = model.io_matrix(x);
    if g.shape() != (3, 1) || g[(0, 0)] != 0.0 || g[(1, 0)] != 0.0 || g[(2, 0)] == 0.0 {
        return Err(Error::invalid("model does not have the microactuator input structure"));
    }
    let r = 1.0 / g[(2, 0)];
    let (xd, xd_dot) = plan.eval(t)?;
    let grad_d = desired.hamiltonian().gradient(&(x - xd));
    let inv_rd = desired.damping()[2];
    let dh = model.hamiltonian_gradient(x);
    Ok(r * (-inv_rd * grad_d[2] + xd_dot[2]) + dh[2])
}
