//! Hyperparameter training by multi-start L-BFGS on the NLML.

use alloc::format;
use alloc::vec::Vec;
use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::hyperparams::{GpHyperparams, ParamLayout};
use super::likelihood::nlml_with_gradient;
use super::posterior::GpPhsModel;
use crate::error::{Error, Result};
use crate::filter::FilteredDataset;
use crate::optim::{minimize, LbfgsConfig, Termination};

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    /// Optimizer runs including the one from the initial guess.
    pub restarts: usize,
    pub lbfgs: LbfgsConfig,
    pub layout: ParamLayout,
    pub jitter: f64,
    pub seed: u64,
    /// Standard deviation of the random offsets added to the packed initial parameters.
    pub perturbation: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            restarts: 5,
            lbfgs: LbfgsConfig::default(),
            layout: ParamLayout::default(),
            jitter: 1e-10,
            seed: 0,
            perturbation: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RestartOutcome {
    pub start: GpHyperparams,
    /// `None` when the start could not be evaluated.
    pub result: Option<(GpHyperparams, f64)>,
    pub iterations: usize,
    pub evaluations: usize,
    pub gradient_norm: f64,
    pub termination: Option<Termination>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingReport {
    pub restarts: Vec<RestartOutcome>,
    pub best: usize,
}

impl TrainingReport {
    pub fn best_outcome(&self) -> &RestartOutcome {
        &self.restarts[self.best]
    }
}

/// Minimizes the NLML from `init` and `config.restarts - 1` perturbed starts and conditions
/// the model on the best hyperparameters found.
pub fn train(dataset: &FilteredDataset, init: &GpHyperparams, config: &TrainConfig) -> Result<(GpPhsModel, TrainingReport)> {
    init.validate()?;
    if dataset.is_empty() {
        return Err(Error::invalid("dataset is empty"));
    }
    if config.restarts == 0 {
        return Err(Error::invalid("at least one optimizer run is required"));
    }
    let layout = config.layout;
    let theta0 = layout.pack(init);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut restarts = Vec::with_capacity(config.restarts);
    for run in 0..config.restarts {
        let mut start = theta0.clone();
        if run > 0 {
            for v in start.iter_mut() {
                let z: f64 = StandardNormal.sample(&mut rng);
                *v += config.perturbation * z;
            }
        }
        let start_hyper = layout.unpack(&start, init);
        let objective = |theta: &DVector<f64>| {
            let h = layout.unpack(theta, init);
            nlml_with_gradient(dataset, &h, &layout, config.jitter).ok()
        };
        let outcome = match minimize(objective, start, &config.lbfgs) {
            Some(r) => RestartOutcome {
                start: start_hyper,
                result: Some((layout.unpack(&r.x, init), r.value)),
                iterations: r.iterations,
                evaluations: r.evaluations,
                gradient_norm: r.gradient.amax(),
                termination: Some(r.termination),
            },
            None => RestartOutcome {
                start: start_hyper,
                result: None,
                iterations: 0,
                evaluations: 1,
                gradient_norm: f64::NAN,
                termination: None,
            },
        };
        restarts.push(outcome);
    }
    let best = restarts
        .iter()
        .enumerate()
        .filter_map(|(i, r)| r.result.as_ref().map(|(_, v)| (i, *v)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(i, _)| i)
        .ok_or_else(|| Error::Training(format!("all {} optimizer runs failed to factorize", config.restarts)))?;
    let hyper = restarts[best].result.as_ref().expect("best run succeeded").0.clone();
    let model = GpPhsModel::from_dataset(dataset, hyper, config.jitter)?;
    Ok((model, TrainingReport { restarts, best }))
}
