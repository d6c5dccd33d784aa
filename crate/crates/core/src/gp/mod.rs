//! Gaussian processes over port-Hamiltonian vector fields.

pub mod gram;
pub mod hyperparams;
pub mod kernel;
pub mod likelihood;
pub mod posterior;
pub mod structure;
pub mod train;

pub use gram::{gram_matrix, mean_adjust, prior_gram};
pub use hyperparams::{GpHyperparams, NoiseMode, ParamLayout};
pub use kernel::{phs_kernel, se_hessian, se_hessian_log_lengthscale_derivatives};
pub use likelihood::{negative_log_marginal_likelihood, nlml_finite_difference_gradient, nlml_with_gradient};
pub use posterior::{calibrate_beta, BoundScale, GpPhsModel};
pub use structure::StructureEstimate;
pub use train::{train, RestartOutcome, TrainConfig, TrainingReport};
