//! Experiment configuration: a TOML document with one section per pipeline stage.
//!
//! Every field except `seed` has a default, so a file containing only `seed = 1` describes
//! the reference microactuator experiment.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::error::LabError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    /// Output directory; relative paths are resolved against `PHS_LAB_OUT` when it is set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub plant: PlantConfig,
    #[serde(default)]
    pub excitation: ExcitationConfig,
    #[serde(default)]
    pub dataset: DatasetConfig,
    #[serde(default)]
    pub filter: FilterConfig,
    #[serde(default)]
    pub gp: GpConfig,
    #[serde(default)]
    pub desired: DesiredConfig,
    #[serde(default)]
    pub reference: ReferenceConfig,
    #[serde(default)]
    pub closed_loop: ClosedLoopConfig,
    #[serde(default)]
    pub verify: VerifyConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnergyForm {
    /// `x1 x3^2 / c0`
    Verbatim,
    /// `x1 x3^2 / (2 c0)`
    Halved,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlantConfig {
    pub mass: f64,
    pub damping: f64,
    pub stiffness: f64,
    pub resistance: f64,
    pub rest_gap: f64,
    /// Parallel-plate constant in `C(x1) = c0 / x1`.
    pub c0: f64,
    pub energy: EnergyForm,
}

impl Default for PlantConfig {
    fn default() -> Self {
        Self {
            mass: 1.0,
            damping: 0.5,
            stiffness: 10.0,
            resistance: 1.0,
            rest_gap: 1.0,
            c0: 1.0,
            energy: EnergyForm::Verbatim,
        }
    }
}

/// `u(t) = amplitude sin(frequency t)` applied from `initial_state`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExcitationConfig {
    pub amplitude: f64,
    pub frequency: f64,
    pub initial_state: Vec<f64>,
}

impl Default for ExcitationConfig {
    fn default() -> Self {
        Self {
            amplitude: 1.0,
            frequency: 1.0,
            initial_state: vec![0.0, 0.0, 1.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DatasetConfig {
    pub samples: usize,
    pub t_end: f64,
    /// Variance of the Gaussian noise added to every state component.
    pub noise_variance: f64,
    /// Relative and absolute integrator tolerance.
    pub tolerance: f64,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        Self {
            samples: 300,
            t_end: 20.0,
            noise_variance: 1e-3,
            tolerance: 1e-8,
        }
    }
}

impl DatasetConfig {
    pub fn sampling_interval(&self) -> f64 {
        self.t_end / (self.samples - 1) as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FilterConfig {
    pub window: usize,
    pub poly_order: usize,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self { window: 9, poly_order: 3 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundScaleConfig {
    Variance,
    Stddev,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GpConfig {
    pub restarts: usize,
    pub max_iterations: usize,
    /// Standard deviation of the random restart offsets in log-parameter space.
    pub perturbation: f64,
    pub jitter: f64,
    pub init_signal_std: f64,
    pub init_lengthscales: Vec<f64>,
    pub init_noise_variance: Vec<f64>,
    pub init_damping: f64,
    pub init_resistance: f64,
    pub learn_noise: bool,
    pub learn_structure: bool,
    pub beta: Vec<f64>,
    pub risk: f64,
    pub bound_scale: BoundScaleConfig,
    /// State at which the learned Hamiltonian is pinned to zero.
    pub reference_state: Vec<f64>,
}

impl Default for GpConfig {
    fn default() -> Self {
        Self {
            restarts: 5,
            max_iterations: 500,
            perturbation: 0.5,
            jitter: 1e-10,
            init_signal_std: 1.0,
            init_lengthscales: vec![1.0; 3],
            init_noise_variance: vec![1e-2; 3],
            init_damping: 1.0,
            init_resistance: 1.0,
            learn_noise: true,
            learn_structure: true,
            beta: vec![1.0; 3],
            risk: 0.01,
            bound_scale: BoundScaleConfig::Variance,
            reference_state: vec![0.0; 3],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HamiltonianChoice {
    /// Learned Hamiltonian shifted so that its minimizer sits at zero tracking error.
    Shifted,
    /// Learned Hamiltonian evaluated at the tracking error as is.
    Literal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DesiredConfig {
    /// `1 / r_d`, the damping injected on the charge.
    pub inv_rd: f64,
    /// Damping on the momentum; the learned (or true) plant damping when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub damping: Option<f64>,
    pub hamiltonian: HamiltonianChoice,
    /// Per-axis bounds of the box on which the minimum of `H_d` is checked.
    pub domain: [f64; 2],
    pub resolution: usize,
}

impl Default for DesiredConfig {
    fn default() -> Self {
        Self {
            inv_rd: 10.0,
            damping: None,
            hamiltonian: HamiltonianChoice::Shifted,
            domain: [-2.0, 2.0],
            resolution: 21,
        }
    }
}

/// `x_d1(t) = rest_gap - slope t - amplitude sin(frequency t)` on `[0, t_end]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReferenceConfig {
    pub rest_gap: f64,
    pub slope: f64,
    pub amplitude: f64,
    pub frequency: f64,
    pub t_end: f64,
    /// Plan grid step; the dataset sampling interval when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_step: Option<f64>,
    /// Newton starting point for the solved components.
    pub seed: Vec<f64>,
    pub max_residual: f64,
}

impl Default for ReferenceConfig {
    fn default() -> Self {
        Self {
            rest_gap: 1.0,
            slope: 0.01,
            amplitude: 0.01,
            frequency: 0.8,
            t_end: 13.0,
            grid_step: None,
            seed: vec![0.0, 0.5],
            max_residual: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelChoice {
    /// Learned GP-PHS posterior.
    Gp,
    /// True plant dynamics in place of the posterior (zero model error).
    Exact,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClosedLoopConfig {
    pub model: ModelChoice,
    /// `x(0) - x_d(0)`
    pub initial_offset: Vec<f64>,
    pub output_step: f64,
    pub tolerance: f64,
    /// Per-step growth of `H_d` above this counts as an increase event.
    pub increase_tolerance: f64,
}

impl Default for ClosedLoopConfig {
    fn default() -> Self {
        Self {
            model: ModelChoice::Gp,
            initial_offset: vec![0.05, 0.0, 0.0],
            output_step: 0.01,
            tolerance: 1e-10,
            increase_tolerance: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    pub directions: usize,
    pub max_radius: f64,
    pub radial_steps: usize,
    pub bisection_steps: usize,
    pub times: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            directions: 100,
            max_radius: 2.0,
            radial_steps: 40,
            bisection_steps: 16,
            times: 3,
        }
    }
}

impl ExperimentConfig {
    /// Reference experiment with the given seed.
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            output_dir: None,
            plant: PlantConfig::default(),
            excitation: ExcitationConfig::default(),
            dataset: DatasetConfig::default(),
            filter: FilterConfig::default(),
            gp: GpConfig::default(),
            desired: DesiredConfig::default(),
            reference: ReferenceConfig::default(),
            closed_loop: ClosedLoopConfig::default(),
            verify: VerifyConfig::default(),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self, LabError> {
        let table: Table = text.parse().map_err(|e: toml::de::Error| LabError::Config(e.to_string()))?;
        Self::from_table(table)
    }

    pub fn from_table(table: Table) -> Result<Self, LabError> {
        let cfg: Self = Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| LabError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads `path`, applies `key=value` overrides and an optional seed, then validates.
    pub fn load(path: Option<&Path>, overrides: &[String], seed: Option<u64>) -> Result<Self, LabError> {
        let mut table = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| LabError::Config(format!("cannot read {}: {e}", p.display())))?;
                text.parse::<Table>()
                    .map_err(|e| LabError::Config(format!("{}: {e}", p.display())))?
            }
            None => Table::new(),
        };
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        if let Some(s) = seed {
            let s = i64::try_from(s).map_err(|_| LabError::Config("seed must fit in a signed 64-bit integer".into()))?;
            table.insert("seed".into(), Value::Integer(s));
        }
        if !table.contains_key("seed") {
            return Err(LabError::Config("`seed` is required (in the file or via --seed)".into()));
        }
        Self::from_table(table)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    pub fn validate(&self) -> Result<(), LabError> {
        let mut errs = Vec::new();
        let mut check = |ok: bool, msg: &str| {
            if !ok {
                errs.push(msg.to_string());
            }
        };
        let pos = |v: f64| v.is_finite() && v > 0.0;
        let fin = |v: &[f64]| v.iter().all(|x| x.is_finite());
        let p = &self.plant;
        check(pos(p.mass) && pos(p.stiffness) && pos(p.resistance) && pos(p.c0), "plant: mass, stiffness, resistance, c0 must be > 0");
        check(p.damping.is_finite() && p.damping >= 0.0, "plant.damping must be >= 0");
        check(p.rest_gap.is_finite(), "plant.rest_gap must be finite");
        let e = &self.excitation;
        check(e.amplitude.is_finite() && e.frequency.is_finite(), "excitation: amplitude and frequency must be finite");
        check(e.initial_state.len() == 3 && fin(&e.initial_state), "excitation.initial_state needs 3 finite values");
        let d = &self.dataset;
        check(d.samples >= 2, "dataset.samples must be >= 2");
        check(pos(d.t_end), "dataset.t_end must be > 0");
        check(d.noise_variance.is_finite() && d.noise_variance >= 0.0, "dataset.noise_variance must be >= 0");
        check(pos(d.tolerance) && d.tolerance < 1e-2, "dataset.tolerance must be in (0, 1e-2)");
        let f = &self.filter;
        check(f.window % 2 == 1 && f.window >= f.poly_order + 2, "filter: window must be odd and >= poly_order + 2");
        check(f.window <= d.samples, "filter.window exceeds dataset.samples");
        let g = &self.gp;
        check(g.restarts >= 1, "gp.restarts must be >= 1");
        check(g.max_iterations >= 1, "gp.max_iterations must be >= 1");
        check(g.perturbation.is_finite() && g.perturbation >= 0.0, "gp.perturbation must be >= 0");
        check(g.jitter.is_finite() && (0.0..=1e-6).contains(&g.jitter), "gp.jitter must be in [0, 1e-6]");
        check(pos(g.init_signal_std), "gp.init_signal_std must be > 0");
        check(g.init_lengthscales.len() == 3 && g.init_lengthscales.iter().all(|v| pos(*v)), "gp.init_lengthscales needs 3 positive values");
        check(
            g.init_noise_variance.len() == 3 && g.init_noise_variance.iter().all(|v| pos(*v)),
            "gp.init_noise_variance needs 3 positive values",
        );
        check(pos(g.init_damping) && pos(g.init_resistance), "gp.init_damping and gp.init_resistance must be > 0");
        check(g.beta.len() == 3 && g.beta.iter().all(|v| v.is_finite() && *v >= 0.0), "gp.beta needs 3 nonnegative values");
        check(g.risk > 0.0 && g.risk < 1.0, "gp.risk must be in (0, 1)");
        check(g.reference_state.len() == 3 && fin(&g.reference_state), "gp.reference_state needs 3 finite values");
        let s = &self.desired;
        check(pos(s.inv_rd), "desired.inv_rd must be > 0");
        check(s.damping.is_none_or(|b| b.is_finite() && b >= 0.0), "desired.damping must be >= 0");
        check(fin(&s.domain) && s.domain[0] < 0.0 && s.domain[1] > 0.0, "desired.domain must contain 0 strictly inside");
        check(s.resolution >= 3, "desired.resolution must be >= 3");
        let r = &self.reference;
        check(fin(&[r.rest_gap, r.slope, r.amplitude, r.frequency]), "reference parameters must be finite");
        check(pos(r.t_end), "reference.t_end must be > 0");
        check(r.grid_step.is_none_or(|h| pos(h) && h <= r.t_end), "reference.grid_step must be in (0, t_end]");
        check(r.seed.len() == 2 && fin(&r.seed), "reference.seed needs 2 finite values");
        check(pos(r.max_residual), "reference.max_residual must be > 0");
        let c = &self.closed_loop;
        check(c.initial_offset.len() == 3 && fin(&c.initial_offset), "closed_loop.initial_offset needs 3 finite values");
        check(pos(c.output_step) && c.output_step <= r.t_end, "closed_loop.output_step must be in (0, reference.t_end]");
        check(pos(c.tolerance) && c.tolerance < 1e-2, "closed_loop.tolerance must be in (0, 1e-2)");
        check(c.increase_tolerance.is_finite() && c.increase_tolerance >= 0.0, "closed_loop.increase_tolerance must be >= 0");
        let v = &self.verify;
        check(v.directions >= 1 && v.radial_steps >= 1 && v.times >= 1, "verify: directions, radial_steps, times must be >= 1");
        check(pos(v.max_radius), "verify.max_radius must be > 0");
        if errs.is_empty() {
            Ok(())
        } else {
            Err(LabError::Config(errs.join("; ")))
        }
    }
}

/// Sets a dotted key (`gp.restarts=3`) in a TOML table. The value is read as a TOML value
/// when it parses as one and as a bare string otherwise.
pub fn apply_override(table: &mut Table, assignment: &str) -> Result<(), LabError> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| LabError::Config(format!("override `{assignment}` is not key=value")))?;
    let key = key.trim();
    let raw = raw.trim();
    if key.is_empty() || key.split('.').any(str::is_empty) {
        return Err(LabError::Config(format!("override key `{key}` is malformed")));
    }
    let value = format!("v = {raw}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()));
    let parts: Vec<&str> = key.split('.').collect();
    let mut node = table;
    for part in &parts[..parts.len() - 1] {
        let entry = node
            .entry(part.to_string())
            .or_insert_with(|| Value::Table(Table::new()));
        node = entry
            .as_table_mut()
            .ok_or_else(|| LabError::Config(format!("override `{key}`: `{part}` is not a section")))?;
    }
    node.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}
