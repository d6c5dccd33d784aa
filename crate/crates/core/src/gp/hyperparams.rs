//! GP hyperparameters and their unconstrained (log/softplus) parameterization.

use alloc::vec::Vec;
use nalgebra::DVector;

use super::structure::StructureEstimate;
use crate::error::{Error, Result};
use crate::math::{exp, ln};

#[derive(Debug, Clone, PartialEq)]
pub struct GpHyperparams {
    pub signal_std: f64,
    pub lengthscales: DVector<f64>,
    /// Observation noise variance per state dimension.
    pub noise_var: DVector<f64>,
    pub structure: StructureEstimate,
}

impl GpHyperparams {
    pub fn new(
        signal_std: f64,
        lengthscales: DVector<f64>,
        noise_var: DVector<f64>,
        structure: StructureEstimate,
    ) -> Result<Self> {
        let h = Self {
            signal_std,
            lengthscales,
            noise_var,
            structure,
        };
        h.validate()?;
        Ok(h)
    }

    /// Unit signal and lengthscales, noise `noise_var` in every dimension.
    pub fn isotropic(structure: StructureEstimate, noise_var: f64) -> Result<Self> {
        let n = structure.dim_state();
        Self::new(
            1.0,
            DVector::from_element(n, 1.0),
            DVector::from_element(n, noise_var),
            structure,
        )
    }

    pub fn dim_state(&self) -> usize {
        self.structure.dim_state()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.structure.dim_state();
        if self.lengthscales.len() != n || self.noise_var.len() != n {
            return Err(Error::invalid("hyperparameter dimensions do not match the structure"));
        }
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !positive(self.signal_std) || !self.lengthscales.iter().all(|l| positive(*l)) {
            return Err(Error::invalid("signal std and lengthscales must be positive"));
        }
        if !self.noise_var.iter().all(|s| *s >= 0.0 && s.is_finite()) {
            return Err(Error::invalid("noise variances must be nonnegative"));
        }
        Ok(())
    }
}

/// How observation noise enters the optimization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseMode {
    /// Held at the initial value.
    Fixed,
    /// `sigma_i^2 = floor + exp(theta_i)`.
    Learned { floor: f64 },
}

/// Which hyperparameters are free during training; `ln s_f` and `ln l` always are.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamLayout {
    pub noise: NoiseMode,
    pub structure: bool,
}

impl Default for ParamLayout {
    fn default() -> Self {
        Self {
            noise: NoiseMode::Learned { floor: 1e-8 },
            structure: true,
        }
    }
}

impl ParamLayout {
    pub fn len(&self, hyper: &GpHyperparams) -> usize {
        let n = hyper.dim_state();
        let noise = match self.noise {
            NoiseMode::Fixed => 0,
            NoiseMode::Learned { .. } => n,
        };
        let structure = if self.structure { hyper.structure.num_params() } else { 0 };
        1 + n + noise + structure
    }

    /// Offset of the first structure parameter, if structure is free.
    pub fn structure_offset(&self, hyper: &GpHyperparams) -> Option<usize> {
        self.structure
            .then(|| self.len(hyper) - hyper.structure.num_params())
    }

    pub fn pack(&self, hyper: &GpHyperparams) -> DVector<f64> {
        let mut theta = Vec::with_capacity(self.len(hyper));
        theta.push(ln(hyper.signal_std));
        theta.extend(hyper.lengthscales.iter().map(|l| ln(*l)));
        if let NoiseMode::Learned { floor } = self.noise {
            theta.extend(hyper.noise_var.iter().map(|s| ln((s - floor).max(1e-300))));
        }
        if self.structure {
            theta.extend(hyper.structure.params());
        }
        DVector::from_vec(theta)
    }

    /// Inverse of [`pack`](Self::pack); parameters absent from the layout are taken from
    /// `template`.
    pub fn unpack(&self, theta: &DVector<f64>, template: &GpHyperparams) -> GpHyperparams {
        let n = template.dim_state();
        let mut i = 0;
        let mut next = || {
            let v = theta[i];
            i += 1;
            v
        };
        let signal_std = exp(next());
        let lengthscales = DVector::from_fn(n, |_, _| exp(next()));
        let noise_var = match self.noise {
            NoiseMode::Fixed => template.noise_var.clone(),
            NoiseMode::Learned { floor } => DVector::from_fn(n, |_, _| floor + exp(next())),
        };
        let structure = if self.structure {
            let p: Vec<f64> = (0..template.structure.num_params()).map(|_| next()).collect();
            template.structure.with_params(&p)
        } else {
            template.structure.clone()
        };
        GpHyperparams {
            signal_std,
            lengthscales,
            noise_var,
            structure,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pack_unpack_round_trip() {
        let s = StructureEstimate::microactuator(0.4, 1.5).unwrap();
        let h = GpHyperparams::new(
            1.7,
            DVector::from_column_slice(&[0.3, 2.0, 1.1]),
            DVector::from_column_slice(&[1e-3, 2e-3, 5e-4]),
            s,
        )
        .unwrap();
        let layout = ParamLayout::default();
        let theta = layout.pack(&h);
        assert_eq!(theta.len(), 9);
        let back = layout.unpack(&theta, &h);
        assert!((back.signal_std - h.signal_std).abs() < 1e-14);
        assert!((&back.lengthscales - &h.lengthscales).amax() < 1e-14);
        assert!((&back.noise_var - &h.noise_var).amax() < 1e-15);
        assert_eq!(back.structure.params(), h.structure.params());
    }

    #[test]
    fn invalid_values_are_rejected() {
        let s = StructureEstimate::microactuator(0.4, 1.5).unwrap();
        assert!(GpHyperparams::new(0.0, DVector::from_element(3, 1.0), DVector::zeros(3), s.clone()).is_err());
        assert!(GpHyperparams::new(1.0, DVector::from_element(2, 1.0), DVector::zeros(3), s.clone()).is_err());
        assert!(GpHyperparams::new(1.0, DVector::from_element(3, 1.0), DVector::from_element(3, -1.0), s).is_err());
    }
}
