//! Pipeline stages. Each stage reads its inputs from the run directory and writes its
//! outputs there, so any stage can be rerun from persisted upstream artifacts.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use gpphs_core::control::{
    count_increases, hd_along, matching_residual, solve_reference_plan, ultimate_bound, validate_hd_minimum,
    verify_dissipation_condition, AirGapReference, ConditionReport, DesiredDynamics,
    DynamicsEstimate, ExactModel, HdMinimumCheck, PlanOptions, ReferencePlan, SamplingSpec, ShiftedHamiltonian,
    TrackingController,
};
use gpphs_core::filter::SavitzkyGolay;
use gpphs_core::gp::{train, BoundScale, GpHyperparams, GpPhsModel, NoiseMode, ParamLayout, StructureEstimate, TrainConfig};
use gpphs_core::integrate::{grid_with_max_step, simulate, uniform_grid, OpenLoop, Tolerances};
use gpphs_core::microactuator::{CapacitanceLaw, EnergyConvention, Microactuator, MicroactuatorParams};
use gpphs_core::optim::LbfgsConfig;
use gpphs_core::trajectory::{energy_balance_residual, Trajectory};
use gpphs_core::DVector;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::config::{BoundScaleConfig, EnergyForm, ExperimentConfig, HamiltonianChoice, ModelChoice};
use crate::error::{LabError, StageContext};
use crate::io;
use crate::metrics::*;
use crate::model_file;

/// File names inside a run directory.
pub mod artifacts {
    pub const CONFIG: &str = "config.toml";
    pub const SIMULATION: &str = "simulation.csv";
    pub const DATASET: &str = "dataset.csv";
    pub const FILTERED: &str = "filtered.csv";
    pub const MODEL: &str = "model.toml";
    pub const TRAINING: &str = "training.json";
    pub const HD_CHECK: &str = "hd_check.json";
    pub const PLAN: &str = "plan.csv";
    pub const CONDITIONS: &str = "conditions.json";
    pub const MARGINS: &str = "margins.csv";
    pub const CLOSED_LOOP: &str = "closed_loop.csv";
    pub const TRACKING: &str = "tracking.csv";
    pub const STATES: &str = "states.csv";
    pub const INPUT: &str = "input.csv";
    pub const LYAPUNOV: &str = "lyapunov.csv";
    pub const METRICS: &str = "metrics.json";
    pub const TIMINGS: &str = "timings.json";
}

/// Independent random streams derived from the run seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Noise = 1,
    Training = 2,
    Verification = 3,
}

pub fn stage_seed(seed: u64, stream: Stream) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng.next_u64()
}

pub fn plant(cfg: &ExperimentConfig) -> Result<Microactuator, LabError> {
    let p = &cfg.plant;
    Microactuator::new(MicroactuatorParams {
        mass: p.mass,
        damping: p.damping,
        stiffness: p.stiffness,
        resistance: p.resistance,
        rest_gap: p.rest_gap,
        capacitance: CapacitanceLaw::ParallelPlate { c0: p.c0 },
        convention: match p.energy {
            EnergyForm::Verbatim => EnergyConvention::Verbatim,
            EnergyForm::Halved => EnergyConvention::Halved,
        },
    })
    .map_err(|e| LabError::Config(e.to_string()))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), LabError> {
    let text = serde_json::to_string_pretty(value).expect("serializable");
    std::fs::write(path, text + "\n").map_err(|e| LabError::artifact(path, e))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, LabError> {
    if !path.is_file() {
        return Err(LabError::artifact(path, "missing artifact"));
    }
    let text = std::fs::read_to_string(path).map_err(|e| LabError::artifact(path, e))?;
    serde_json::from_str(&text).map_err(|e| LabError::artifact(path, e))
}

fn v(xs: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(xs)
}

fn ensure_dir(dir: &Path) -> Result<(), LabError> {
    std::fs::create_dir_all(dir).map_err(|e| LabError::artifact(dir, e))
}

/// Noise-free open-loop response to the excitation on the dataset grid.
pub fn run_simulate(cfg: &ExperimentConfig, dir: &Path) -> Result<Trajectory, LabError> {
    ensure_dir(dir)?;
    let plant = plant(cfg)?;
    let e = &cfg.excitation;
    let (a, w) = (e.amplitude, e.frequency);
    let input = OpenLoop(move |t: f64| DVector::from_element(1, a * (w * t).sin()));
    let times = uniform_grid(0.0, cfg.dataset.t_end, cfg.dataset.samples);
    let traj = simulate(&plant, &v(&e.initial_state), &input, &times, &Tolerances::uniform(cfg.dataset.tolerance)).stage("simulate")?;
    io::write_trajectory(&dir.join(artifacts::SIMULATION), &traj)?;
    Ok(traj)
}

/// Simulation plus i.i.d. Gaussian state noise.
pub fn run_generate_data(cfg: &ExperimentConfig, dir: &Path) -> Result<Trajectory, LabError> {
    let clean = run_simulate(cfg, dir)?;
    let var = cfg.dataset.noise_variance;
    let states = if var > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(stage_seed(cfg.seed, Stream::Noise));
        let normal = Normal::new(0.0, var.sqrt()).map_err(|e| LabError::Config(e.to_string()))?;
        clean
            .states()
            .iter()
            .map(|x| x.map(|c| c + normal.sample(&mut rng)))
            .collect()
    } else {
        clean.states().to_vec()
    };
    let noisy = Trajectory::new(clean.times().to_vec(), states, clean.inputs().to_vec(), None).stage("generate-data")?;
    io::write_trajectory(&dir.join(artifacts::DATASET), &noisy)?;
    Ok(noisy)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartSummary {
    pub nlml: Option<f64>,
    pub iterations: usize,
    pub evaluations: usize,
    pub gradient_norm: f64,
    pub termination: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingSummary {
    pub best: usize,
    pub restarts: Vec<RestartSummary>,
}

pub fn initial_hyperparams(cfg: &ExperimentConfig) -> Result<GpHyperparams, LabError> {
    let g = &cfg.gp;
    let structure = StructureEstimate::microactuator(g.init_damping, g.init_resistance).stage("train")?;
    GpHyperparams::new(g.init_signal_std, v(&g.init_lengthscales), v(&g.init_noise_variance), structure).stage("train")
}

/// Filters the noisy dataset, fits the GP-PHS and stores the model.
pub fn run_train(cfg: &ExperimentConfig, dir: &Path) -> Result<GpPhsModel, LabError> {
    let data = io::read_trajectory(&dir.join(artifacts::DATASET))?;
    let sg = SavitzkyGolay::new(cfg.filter.window, cfg.filter.poly_order).map_err(|e| LabError::Config(e.to_string()))?;
    let filtered = sg.apply(&data).stage("train")?;
    io::write_filtered(&dir.join(artifacts::FILTERED), &filtered)?;
    let g = &cfg.gp;
    let train_cfg = TrainConfig {
        restarts: g.restarts,
        lbfgs: LbfgsConfig {
            max_iterations: g.max_iterations,
            ..LbfgsConfig::default()
        },
        layout: ParamLayout {
            noise: if g.learn_noise { NoiseMode::Learned { floor: 1e-8 } } else { NoiseMode::Fixed },
            structure: g.learn_structure,
        },
        jitter: g.jitter,
        seed: stage_seed(cfg.seed, Stream::Training),
        perturbation: g.perturbation,
    };
    let (model, report) = train(&filtered, &initial_hyperparams(cfg)?, &train_cfg).stage("train")?;
    let model = model
        .with_beta(v(&g.beta))
        .and_then(|m| m.with_risk(g.risk))
        .and_then(|m| m.with_reference(v(&g.reference_state)))
        .stage("train")?
        .with_bound_scale(match g.bound_scale {
            BoundScaleConfig::Variance => BoundScale::Variance,
            BoundScaleConfig::Stddev => BoundScale::StdDev,
        });
    model_file::save_model(&dir.join(artifacts::MODEL), &model)?;
    let summary = TrainingSummary {
        best: report.best,
        restarts: report
            .restarts
            .iter()
            .map(|r| RestartSummary {
                nlml: r.result.as_ref().map(|x| x.1),
                iterations: r.iterations,
                evaluations: r.evaluations,
                gradient_norm: r.gradient_norm,
                termination: r.termination.map_or_else(|| "not evaluated".to_string(), |t| format!("{t:?}")),
            })
            .collect(),
    };
    write_json(&dir.join(artifacts::TRAINING), &summary)?;
    // the saved file, not the in-memory fit, is what downstream stages see
    model_file::load_model(&dir.join(artifacts::MODEL))
}

/// The dynamics the controller is built on.
pub enum Estimate {
    Gp(Box<GpPhsModel>),
    Exact(ExactModel<Microactuator>),
}

impl Estimate {
    pub fn load(cfg: &ExperimentConfig, dir: &Path) -> Result<Self, LabError> {
        match cfg.closed_loop.model {
            ModelChoice::Gp => Ok(Estimate::Gp(Box::new(model_file::load_model(&dir.join(artifacts::MODEL))?))),
            ModelChoice::Exact => Ok(Estimate::Exact(ExactModel(plant(cfg)?))),
        }
    }

    pub fn as_dyn(&self) -> &dyn DynamicsEstimate {
        match self {
            Estimate::Gp(m) => m.as_ref(),
            Estimate::Exact(m) => m,
        }
    }

    /// Damping and resistance of the estimated structure.
    pub fn structure_params(&self) -> (f64, f64) {
        match self {
            Estimate::Gp(m) => m.hyper().structure.microactuator_params().unwrap_or((0.0, 1.0)),
            Estimate::Exact(m) => (m.0.params().damping, m.0.params().resistance),
        }
    }
}

pub type Desired<'a> = DesiredDynamics<ShiftedHamiltonian<&'a dyn DynamicsEstimate>>;

/// `J_d - R_d` of the microactuator target with `H_d` built from the estimated Hamiltonian.
pub fn desired_dynamics<'a>(cfg: &ExperimentConfig, estimate: &'a Estimate) -> Result<Desired<'a>, LabError> {
    let d = &cfg.desired;
    let model = estimate.as_dyn();
    let h = match d.hamiltonian {
        HamiltonianChoice::Shifted => {
            ShiftedHamiltonian::at_minimizer(model, &[d.domain[0]; 3], &[d.domain[1]; 3], &[d.resolution; 3]).stage("plan")?
        }
        HamiltonianChoice::Literal => ShiftedHamiltonian::literal(model),
    };
    let damping = d.damping.unwrap_or(estimate.structure_params().0);
    DesiredDynamics::microactuator(damping, d.inv_rd, h).stage("plan")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HdCheckSummary {
    pub passed: bool,
    pub argmin: Vec<f64>,
    pub min_value: f64,
    pub gap: f64,
    pub nearest_origin: Vec<f64>,
    pub shift: Vec<f64>,
}

pub fn reference(cfg: &ExperimentConfig) -> AirGapReference {
    let r = &cfg.reference;
    AirGapReference {
        rest_gap: r.rest_gap,
        slope: r.slope,
        amplitude: r.amplitude,
        frequency: r.frequency,
    }
}

/// Gates `H_d` on its minimum and solves the matching equation along the reference.
pub fn run_plan(cfg: &ExperimentConfig, dir: &Path) -> Result<(ReferencePlan, HdMinimumCheck), LabError> {
    ensure_dir(dir)?;
    let estimate = Estimate::load(cfg, dir)?;
    let desired = desired_dynamics(cfg, &estimate)?;
    let d = &cfg.desired;
    let check = validate_hd_minimum(desired.hamiltonian(), &[d.domain[0]; 3], &[d.domain[1]; 3], &[d.resolution; 3]).stage("plan")?;
    write_json(
        &dir.join(artifacts::HD_CHECK),
        &HdCheckSummary {
            passed: check.passed,
            argmin: check.argmin.iter().copied().collect(),
            min_value: check.min_value,
            gap: check.gap,
            nearest_origin: check.nearest_origin.iter().copied().collect(),
            shift: desired.hamiltonian().shift().iter().copied().collect(),
        },
    )?;
    if !check.passed {
        return Err(LabError::Stage {
            stage: "plan",
            source: gpphs_core::Error::Synthesis(format!(
                "H_d is not minimal at zero tracking error (grid argmin {:?})",
                check.argmin.as_slice()
            )),
        });
    }
    let r = &cfg.reference;
    let step = r.grid_step.unwrap_or(cfg.dataset.sampling_interval());
    let mut options = PlanOptions::new(0.0, r.t_end, step, v(&r.seed));
    options.max_residual = r.max_residual;
    let plan = solve_reference_plan(estimate.as_dyn(), &desired, &reference(cfg), &options).stage("plan")?;
    io::write_plan(&dir.join(artifacts::PLAN), &plan)?;
    Ok((plan, check))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionSummary {
    pub epsilon: Option<f64>,
    pub satisfied: bool,
    pub worst_margin: f64,
    pub violation_fraction: f64,
    pub ultimate_bound: Option<f64>,
    pub samples: usize,
    pub max_radius: f64,
    pub radius_step: f64,
}

pub fn sampling_spec(cfg: &ExperimentConfig) -> SamplingSpec {
    let s = &cfg.verify;
    SamplingSpec {
        directions: s.directions,
        max_radius: s.max_radius,
        radial_steps: s.radial_steps,
        bisection_steps: s.bisection_steps,
        times: s.times,
        seed: stage_seed(cfg.seed, Stream::Verification),
    }
}

/// Samples the worst-case dissipation margin around the plan and estimates `epsilon`.
pub fn run_verify(cfg: &ExperimentConfig, dir: &Path) -> Result<(ConditionReport, ConditionSummary), LabError> {
    let estimate = Estimate::load(cfg, dir)?;
    let desired = desired_dynamics(cfg, &estimate)?;
    let plan = io::read_plan(&dir.join(artifacts::PLAN))?;
    let spec = sampling_spec(cfg);
    let report = verify_dissipation_condition(estimate.as_dyn(), &desired, &plan, &spec).stage("verify")?;
    let negative = report.samples.iter().filter(|s| s.margin < 0.0).count();
    let summary = ConditionSummary {
        epsilon: report.epsilon,
        satisfied: report.satisfied,
        worst_margin: report.worst_margin,
        violation_fraction: negative as f64 / report.samples.len().max(1) as f64,
        ultimate_bound: ultimate_bound(desired.hamiltonian(), report.epsilon, 3, &spec),
        samples: report.samples.len(),
        max_radius: report.max_radius,
        radius_step: report.radius_step,
    };
    write_json(&dir.join(artifacts::CONDITIONS), &summary)?;
    let header: Vec<String> = ["t", "radius", "margin", "xbar1", "xbar2", "xbar3"].iter().map(|s| s.to_string()).collect();
    io::write_rows(
        &dir.join(artifacts::MARGINS),
        &header,
        report.samples.iter().map(|s| {
            let mut row = vec![s.time, s.radius, s.margin];
            row.extend(s.xbar.iter());
            row
        }),
    )?;
    Ok((report, summary))
}

pub struct ClosedLoop {
    pub trajectory: Trajectory,
    pub plan: ReferencePlan,
    pub hd: Vec<f64>,
}

/// Closed-loop run of the true plant under the tracking controller, plus figure data.
pub fn run_control(cfg: &ExperimentConfig, dir: &Path) -> Result<ClosedLoop, LabError> {
    let estimate = Estimate::load(cfg, dir)?;
    let desired = desired_dynamics(cfg, &estimate)?;
    let plan = io::read_plan(&dir.join(artifacts::PLAN))?;
    let plant = plant(cfg)?;
    let c = &cfg.closed_loop;
    let controller = TrackingController::new(estimate.as_dyn(), &desired, &plan).stage("control")?;
    let times = grid_with_max_step(plan.start(), plan.end(), c.output_step);
    let x0 = &plan.states()[0] + v(&c.initial_offset);
    let traj = simulate(&plant, &x0, &controller, &times, &Tolerances::uniform(c.tolerance)).stage("control")?;
    io::write_trajectory(&dir.join(artifacts::CLOSED_LOOP), &traj)?;
    let hd = hd_along(desired.hamiltonian(), &plan, &traj).stage("control")?;
    let mut xd1 = Vec::with_capacity(times.len());
    for t in &times {
        xd1.push(plan.eval(*t).stage("control")?.0[0]);
    }
    let col = |i: usize| traj.states().iter().map(|x| x[i]).collect::<Vec<_>>();
    let u: Vec<f64> = traj.inputs().iter().map(|u| u[0]).collect();
    io::write_columns(&dir.join(artifacts::TRACKING), &["t", "x1", "xd1"], &[&times, &col(0), &xd1])?;
    io::write_columns(&dir.join(artifacts::STATES), &["t", "x2", "x3"], &[&times, &col(1), &col(2)])?;
    io::write_columns(&dir.join(artifacts::INPUT), &["t", "u"], &[&times, &u])?;
    io::write_columns(&dir.join(artifacts::LYAPUNOV), &["t", "Hd"], &[&times, &hd])?;
    drop(controller);
    Ok(ClosedLoop {
        trajectory: traj,
        plan,
        hd,
    })
}

/// Recomputes the metrics from the artifacts in `dir`.
pub fn run_report(cfg: &ExperimentConfig, dir: &Path) -> Result<MetricsReport, LabError> {
    if !dir.is_dir() {
        return Err(LabError::Usage(format!("run directory {} does not exist", dir.display())));
    }
    let estimate = Estimate::load(cfg, dir)?;
    let desired = desired_dynamics(cfg, &estimate)?;
    let plan = io::read_plan(&dir.join(artifacts::PLAN))?;
    let closed = io::read_trajectory(&dir.join(artifacts::CLOSED_LOOP))?;
    let open = io::read_trajectory(&dir.join(artifacts::SIMULATION))?;
    let conditions: ConditionSummary = read_json(&dir.join(artifacts::CONDITIONS))?;
    let hd_check: HdCheckSummary = read_json(&dir.join(artifacts::HD_CHECK))?;
    let (_, lyap) = io::read_rows(&dir.join(artifacts::LYAPUNOV))?;
    let hd: Vec<f64> = lyap.iter().map(|r| r[1]).collect();
    let plant = plant(cfg)?;

    let n = closed.dim_state();
    let mut max_err = vec![0.0; n];
    let mut sum_err = vec![0.0; n];
    let mut errors = Vec::with_capacity(closed.len());
    for (t, x) in closed.times().iter().zip(closed.states()) {
        let e = x - plan.eval(*t).stage("report")?.0;
        for i in 0..n {
            max_err[i] = f64::max(max_err[i], e[i].abs());
            sum_err[i] += e[i].abs();
        }
        errors.push(e);
    }
    let abs = |e: &DVector<f64>| e.iter().map(|c| c.abs()).collect::<Vec<_>>();
    let tracking = TrackingMetrics {
        max_abs_error: max_err,
        mean_abs_error: sum_err.iter().map(|s| s / closed.len() as f64).collect(),
        initial_error: errors.first().map(abs).unwrap_or_default(),
        final_error: errors.last().map(abs).unwrap_or_default(),
        horizon: closed.times().last().copied().unwrap_or(0.0),
        samples: closed.len(),
    };
    let tol = cfg.closed_loop.increase_tolerance;
    let hamiltonian = HamiltonianMetrics {
        initial: hd.first().copied().unwrap_or(0.0),
        final_value: hd.last().copied().unwrap_or(0.0),
        max: hd.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        increase_events: count_increases(&hd, tol),
        max_increase: hd.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max),
        tolerance: tol,
    };
    let energy_balance = EnergyMetrics {
        open_loop_max_residual: energy_balance_residual(&plant, &open).max_residual,
        closed_loop_max_residual: energy_balance_residual(&plant, &closed).max_residual,
    };
    let mut plan_residual: f64 = 0.0;
    for (t, xd) in plan.times().iter().zip(plan.states()) {
        let r = matching_residual(estimate.as_dyn(), &desired, &plan, xd, *t).stage("report")?;
        plan_residual = plan_residual.max(r.amax());
    }
    let learned = match &estimate {
        Estimate::Gp(m) => {
            let h = m.hyper();
            let (b, r) = estimate.structure_params();
            Some(LearnedMetrics {
                signal_std: h.signal_std,
                lengthscales: h.lengthscales.iter().copied().collect(),
                noise_variance: h.noise_var.iter().copied().collect(),
                damping: b,
                resistance: r,
                nlml: m.nlml(),
                jitter: m.jitter(),
            })
        }
        Estimate::Exact(_) => None,
    };
    let report = MetricsReport {
        schema_version: SCHEMA_VERSION,
        seed: cfg.seed,
        model: match cfg.closed_loop.model {
            ModelChoice::Gp => "gp".into(),
            ModelChoice::Exact => "exact".into(),
        },
        tracking,
        hamiltonian,
        energy_balance,
        conditions: ConditionMetrics {
            epsilon: conditions.epsilon,
            satisfied: conditions.satisfied,
            worst_margin: conditions.worst_margin,
            violation_fraction: conditions.violation_fraction,
            ultimate_bound: conditions.ultimate_bound,
            samples: conditions.samples,
        },
        hd_minimum: HdMinimumMetrics {
            passed: hd_check.passed,
            argmin: hd_check.argmin,
            gap: hd_check.gap,
            shift: hd_check.shift,
        },
        plan: PlanMetrics {
            points: plan.times().len(),
            t_end: plan.end(),
            max_residual: plan_residual,
        },
        learned,
    };
    if !report.all_finite() {
        return Err(LabError::artifact(dir.join(artifacts::METRICS), "non-finite metric"));
    }
    write_json(&dir.join(artifacts::METRICS), &report)?;
    Ok(report)
}

/// Wall-clock seconds per stage.
#[derive(Debug, Default, Clone, Serialize)]
pub struct Timings(pub BTreeMap<String, f64>);

impl Timings {
    fn time<T>(&mut self, name: &str, f: impl FnOnce() -> Result<T, LabError>) -> Result<T, LabError> {
        let start = Instant::now();
        let out = f();
        self.0.insert(name.to_string(), start.elapsed().as_secs_f64());
        out
    }
}

/// generate-data, train, plan, verify, control, report.
pub fn run_pipeline(cfg: &ExperimentConfig, dir: &Path) -> Result<MetricsReport, LabError> {
    ensure_dir(dir)?;
    let cfg_path = dir.join(artifacts::CONFIG);
    std::fs::write(&cfg_path, cfg.to_toml_string()).map_err(|e| LabError::artifact(&cfg_path, e))?;
    let mut timings = Timings::default();
    let result = (|| {
        timings.time("generate-data", || run_generate_data(cfg, dir))?;
        if cfg.closed_loop.model == ModelChoice::Gp {
            timings.time("train", || run_train(cfg, dir))?;
        }
        timings.time("plan", || run_plan(cfg, dir))?;
        timings.time("verify", || run_verify(cfg, dir))?;
        timings.time("control", || run_control(cfg, dir))?;
        timings.time("report", || run_report(cfg, dir))
    })();
    write_json(&dir.join(artifacts::TIMINGS), &timings)?;
    result
}

/// `--out`, else `output_dir` (under `PHS_LAB_OUT` when relative), else
/// `$PHS_LAB_OUT/seed-<seed>` (`runs/seed-<seed>` without the variable).
pub fn resolve_output_dir(cfg: &ExperimentConfig, out: Option<&Path>) -> PathBuf {
    if let Some(o) = out {
        return o.to_path_buf();
    }
    let root = std::env::var_os("PHS_LAB_OUT").map(PathBuf::from);
    match (&cfg.output_dir, root) {
        (Some(d), Some(r)) => r.join(d),
        (Some(d), None) => d.clone(),
        (None, Some(r)) => r.join(format!("seed-{}", cfg.seed)),
        (None, None) => PathBuf::from("runs").join(format!("seed-{}", cfg.seed)),
    }
}
