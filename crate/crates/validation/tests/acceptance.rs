//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any of them fails.

use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use gpphs_core::control::*;
use gpphs_core::filter::{FilteredDataset, SavitzkyGolay};
use gpphs_core::gp::*;
use gpphs_core::integrate::*;
use gpphs_core::linalg::min_symmetric_eigenvalue;
use gpphs_core::microactuator::{Microactuator, MicroactuatorParams};
use gpphs_core::phs::{LinearPhs, PhsModel};
use gpphs_core::trajectory::Trajectory;
use gpphs_core::{DMatrix, DVector};
use gpphs_lab::pipeline::{self, artifacts};
use gpphs_lab::{ExperimentConfig, MetricsReport};
use gpphs_validation::{cumulative_trapezoid, snapshot, spearman};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 2024;

struct Outcome {
    passed: bool,
    detail: String,
}

impl Outcome {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Self {
            passed,
            detail: detail.into(),
        }
    }

    fn within(mut self, elapsed: Duration, limit_secs: f64) -> Self {
        let secs = elapsed.as_secs_f64();
        if secs > limit_secs {
            self.passed = false;
        }
        self.detail = format!("{}; {secs:.1} s (limit {limit_secs} s)", self.detail);
        self
    }
}

fn v(xs: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(xs)
}

fn plant() -> Microactuator {
    Microactuator::new(MicroactuatorParams::default()).unwrap()
}

// ---------------------------------------------------------------- criteria 1 and 8

struct RunChecks {
    max_error: f64,
    increase_events: usize,
    max_increase: f64,
    completed: bool,
}

impl RunChecks {
    fn of(r: &MetricsReport, horizon: f64) -> Self {
        Self {
            max_error: r.tracking.max_abs_error[0],
            increase_events: r.hamiltonian.increase_events,
            max_increase: r.hamiltonian.max_increase,
            completed: (r.tracking.horizon - horizon).abs() < 1e-9,
        }
    }

    fn passed(&self) -> [bool; 3] {
        // the default offset puts the initial error on the bound itself, up to rounding of 1.05 - 1
        [self.max_error <= 0.05 * (1.0 + 1e-12), self.increase_events == 0, self.completed]
    }

    fn describe(&self) -> String {
        let [a, b, c] = self.passed();
        let mark = |ok: bool| if ok { "ok" } else { "FAIL" };
        format!(
            "(a) max|x1-xd1|={:.6e} {} (b) {} Hd increases > 1e-6, largest {:.2e} {} (c) {}",
            self.max_error,
            mark(a),
            self.increase_events,
            self.max_increase,
            mark(b),
            if c { "no divergence" } else { "DIVERGED" }
        )
    }
}

fn reproduction(root: &Path) -> (Outcome, Option<MetricsReport>) {
    let start = Instant::now();
    let cfg = ExperimentConfig::with_seed(SEED);
    let dir = root.join("perturbed");
    let perturbed = match pipeline::run_pipeline(&cfg, &dir) {
        Ok(r) => r,
        Err(e) => return (Outcome::new(false, format!("pipeline failed: {e}")).within(start.elapsed(), 300.0), None),
    };
    let elapsed = start.elapsed();

    // same model and plan, started on the reference
    let still = root.join("unperturbed");
    std::fs::create_dir_all(&still).unwrap();
    for name in [artifacts::MODEL, artifacts::PLAN, artifacts::SIMULATION, artifacts::CONDITIONS, artifacts::HD_CHECK] {
        std::fs::copy(dir.join(name), still.join(name)).unwrap();
    }
    let mut on_ref = cfg.clone();
    on_ref.closed_loop.initial_offset = vec![0.0; 3];
    let unperturbed = pipeline::run_control(&on_ref, &still).and_then(|_| pipeline::run_report(&on_ref, &still));

    let horizon = cfg.reference.t_end;
    let p = RunChecks::of(&perturbed, horizon);
    let mut passed = p.passed().iter().all(|x| *x);
    let mut detail = format!("x(0)=xd(0)+(0.05,0,0): {}", p.describe());
    match unperturbed {
        Ok(r) => {
            let u = RunChecks::of(&r, horizon);
            passed &= u.passed().iter().all(|x| *x);
            detail += &format!(" | x(0)=xd(0): {}", u.describe());
        }
        Err(e) => {
            passed = false;
            detail += &format!(" | x(0)=xd(0): control failed: {e}");
        }
    }
    (Outcome::new(passed, detail).within(elapsed, 300.0), Some(perturbed))
}

fn determinism(root: &Path, first: Option<&MetricsReport>) -> Outcome {
    let cfg = ExperimentConfig::with_seed(SEED);
    let again = root.join("repeat");
    let report = match pipeline::run_pipeline(&cfg, &again) {
        Ok(r) => r,
        Err(e) => return Outcome::new(false, format!("second run failed: {e}")),
    };
    let a = snapshot(&root.join("perturbed"), &[artifacts::TIMINGS]).unwrap();
    let b = snapshot(&again, &[artifacts::TIMINGS]).unwrap();
    let differing: Vec<&str> = a
        .iter()
        .zip(&b)
        .filter(|(x, y)| x != y)
        .map(|(x, _)| x.0.as_str())
        .collect();
    let same = a.len() == b.len() && differing.is_empty() && first == Some(&report);
    Outcome::new(
        same,
        if same {
            format!("{} artifacts bit-identical across two runs", a.len())
        } else {
            format!("differing artifacts: {differing:?}")
        },
    )
}

// ---------------------------------------------------------------- criterion 2

type ExactDesired = DesiredDynamics<ShiftedHamiltonian<ExactModel<Microactuator>>>;

fn exact_setup(t_end: f64) -> (ExactDesired, ReferencePlan) {
    let h = ShiftedHamiltonian::at_minimizer(ExactModel(plant()), &[-2.0; 3], &[2.0; 3], &[21; 3]).unwrap();
    let desired = DesiredDynamics::microactuator(plant().params().damping, 10.0, h).unwrap();
    let opts = PlanOptions::new(0.0, t_end, 20.0 / 299.0, v(&[0.0, 0.5]));
    let plan = solve_reference_plan(&ExactModel(plant()), &desired, &AirGapReference::default(), &opts).unwrap();
    (desired, plan)
}

fn perfect_model() -> Outcome {
    let start = Instant::now();
    let (desired, plan) = exact_setup(40.0);
    let model = ExactModel(plant());
    let ctrl = TrackingController::new(&model, &desired, &plan).unwrap();
    let tol = Tolerances::uniform(1e-11);

    // closed-loop error field against the target field: in the actuated channel for any
    // error, in full on the reference knots
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let (mut actuated_gap, mut full_gap, mut off_plan): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for k in 0..400 {
        let (t, xbar) = if k % 2 == 0 {
            (plan.times()[rng.random_range(0..plan.times().len())], DVector::zeros(3))
        } else {
            (rng.random_range(0.0..40.0), DVector::from_fn(3, |_, _| rng.random_range(-0.5..0.5)))
        };
        let (xd, xd_dot) = plan.eval(t).unwrap();
        let x = &xd + &xbar;
        let u = ctrl.control(t, &x).unwrap();
        let gap = plant().eval_dynamics(&x, &u).unwrap() - xd_dot - desired.target_field(&xbar);
        actuated_gap = actuated_gap.max(gap[2].abs());
        if k % 2 == 0 {
            full_gap = full_gap.max(gap.amax());
        } else {
            off_plan = off_plan.max(gap.rows(0, 2).amax());
        }
    }

    let short = grid_with_max_step(0.0, 13.0, 0.01);
    let traj = simulate(&plant(), &plan.states()[0], &ctrl, &short, &tol).unwrap();
    let mut track: f64 = 0.0;
    for (t, x) in short.iter().zip(traj.states()) {
        track = track.max((x - plan.eval(*t).unwrap().0).amax());
    }

    let times = grid_with_max_step(0.0, 40.0, 0.01);
    let mut strict = true;
    let mut reached = true;
    let mut slowest: f64 = 0.0;
    for k in 0..8 {
        let dir = DVector::from_fn(3, |_, _| rng.random_range(-1.0..1.0)).normalize();
        let x0 = &plan.states()[0] + dir * 0.5;
        let traj = simulate(&plant(), &x0, &ctrl, &times, &tol).unwrap();
        let hd = hd_along(desired.hamiltonian(), &plan, &traj).unwrap();
        let norms: Vec<f64> = times
            .iter()
            .zip(traj.states())
            .map(|(t, x)| (x - plan.eval(*t).unwrap().0).norm())
            .collect();
        match norms.iter().position(|n| *n <= 1e-3) {
            Some(stop) => {
                slowest = slowest.max(times[stop]);
                strict &= hd[..=stop].windows(2).all(|w| w[1] < w[0]);
            }
            None => {
                reached = false;
                eprintln!("  start {k}: error norm {:.2e} at t = 40", norms[norms.len() - 1]);
            }
        }
    }
    let passed = actuated_gap <= 1e-8 && full_gap <= 1e-6 && track <= 1e-4 && strict && reached;
    Outcome::new(
        passed,
        format!(
            "error-field mismatch: actuated {actuated_gap:.1e}, on the reference {full_gap:.1e}, \
             unactuated off the reference {off_plan:.1e}; tracking from x(0)=xd(0) {track:.1e}; \
             Hd strictly decreasing from |xbar(0)|=0.5 on 8 starts: {strict}, |xbar| <= 1e-3 reached: {reached} (latest t={slowest:.1})"
        ),
    )
    .within(start.elapsed(), 60.0)
}

// ---------------------------------------------------------------- criteria 3 and 4

fn random_hyper(rng: &mut ChaCha8Rng) -> GpHyperparams {
    GpHyperparams::new(
        rng.random_range(0.3..3.0),
        DVector::from_fn(3, |_, _| rng.random_range(0.2..3.0)),
        DVector::from_fn(3, |_, _| rng.random_range(1e-3..1e-1)),
        StructureEstimate::microactuator(rng.random_range(0.1..2.0), rng.random_range(0.3..3.0)).unwrap(),
    )
    .unwrap()
}

fn random_dataset(rng: &mut ChaCha8Rng, count: usize) -> FilteredDataset {
    let mut draw = |len: usize| -> Vec<DVector<f64>> {
        (0..count).map(|_| DVector::from_fn(len, |_, _| rng.random_range(-1.0..1.0))).collect()
    };
    let states = draw(3);
    let derivs = draw(3);
    let inputs = draw(1);
    FilteredDataset::new((0..count).map(|i| i as f64).collect(), states, derivs, inputs).unwrap()
}

/// Squared-exponential kernel Hessian written out entry by entry.
fn hessian_oracle(x: &DVector<f64>, y: &DVector<f64>, l: &DVector<f64>) -> DMatrix<f64> {
    let s: f64 = (0..3).map(|i| (x[i] - y[i]).powi(2) / (2.0 * l[i] * l[i])).sum();
    let k = (-s).exp();
    DMatrix::from_fn(3, 3, |a, b| {
        let delta = if a == b { 1.0 / (l[a] * l[a]) } else { 0.0 };
        k * (delta - (x[a] - y[a]) * (x[b] - y[b]) / (l[a] * l[a] * l[b] * l[b]))
    })
}

/// Dense conditioning with an LU solve.
fn dense_posterior(ds: &FilteredDataset, hyper: &GpHyperparams, x: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
    let count = ds.len();
    let jr = hyper.structure.structure_matrix(x);
    let kern = |p: &DVector<f64>, q: &DVector<f64>| &jr * hessian_oracle(p, q, &hyper.lengthscales) * jr.transpose() * hyper.signal_std.powi(2);
    let mut k = DMatrix::zeros(3 * count, 3 * count);
    let mut ks = DMatrix::zeros(3 * count, 3);
    let mut y = DVector::zeros(3 * count);
    for i in 0..count {
        let xi = &ds.states()[i];
        for j in 0..count {
            k.view_mut((3 * i, 3 * j), (3, 3)).copy_from(&kern(xi, &ds.states()[j]));
        }
        for p in 0..3 {
            k[(3 * i + p, 3 * i + p)] += hyper.noise_var[p];
        }
        ks.view_mut((3 * i, 0), (3, 3)).copy_from(&kern(xi, x));
        let r = &ds.derivatives()[i] - hyper.structure.io_matrix(xi) * &ds.inputs()[i];
        y.rows_mut(3 * i, 3).copy_from(&r);
    }
    let lu = k.lu();
    let mean = ks.transpose() * lu.solve(&y).unwrap();
    let cov = kern(x, x) - ks.transpose() * lu.solve(&ks).unwrap();
    (mean, cov.diagonal())
}

fn gp_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let (mut mean_gap, mut var_gap, mut grad_gap): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for count in 1..=10 {
        let ds = random_dataset(&mut rng, count);
        let hyper = random_hyper(&mut rng);
        let model = GpPhsModel::from_dataset(&ds, hyper.clone(), 0.0).unwrap();
        for _ in 0..5 {
            let x = DVector::from_fn(3, |_, _| rng.random_range(-1.5..1.5));
            let (m_ref, v_ref) = dense_posterior(&ds, &hyper, &x);
            let (m, var) = model.posterior_dynamics(&x, &v(&[0.0])).unwrap();
            mean_gap = mean_gap.max((m - m_ref).amax());
            var_gap = var_gap.max((var - v_ref).amax());
        }
        let layout = ParamLayout::default();
        let (_, g) = nlml_with_gradient(&ds, &hyper, &layout, 0.0).unwrap();
        let theta = layout.pack(&hyper);
        let f = |th: &DVector<f64>| negative_log_marginal_likelihood(&ds, &layout.unpack(th, &hyper), 0.0).unwrap();
        for k in 0..theta.len() {
            let h = 1e-5;
            let (mut up, mut down) = (theta.clone(), theta.clone());
            up[k] += h;
            down[k] -= h;
            let fd = (f(&up) - f(&down)) / (2.0 * h);
            grad_gap = grad_gap.max((g[k] - fd).abs() / fd.abs().max(1.0));
        }
    }
    let passed = mean_gap <= 1e-10 && var_gap <= 1e-10 && grad_gap <= 1e-5;
    Outcome::new(
        passed,
        format!("N=1..10: mean gap {mean_gap:.1e}, variance gap {var_gap:.1e}, NLML gradient rel. gap {grad_gap:.1e}"),
    )
    .within(start.elapsed(), 30.0)
}

fn kernel_validity() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let mut min_eig = f64::INFINITY;
    let mut asym: f64 = 0.0;
    for _ in 0..200 {
        let hyper = random_hyper(&mut rng);
        let count = rng.random_range(2..=15);
        let states: Vec<DVector<f64>> = (0..count)
            .map(|_| DVector::from_fn(3, |_, _| rng.random_range(-2.0..2.0)))
            .collect();
        min_eig = min_eig.min(min_symmetric_eigenvalue(&prior_gram(&states, &hyper)));
        for i in 0..count {
            for j in 0..count {
                let k = phs_kernel(&states[i], &states[j], &hyper);
                let kt = phs_kernel(&states[j], &states[i], &hyper).transpose();
                asym = asym.max((k - kt).amax());
            }
        }
    }
    Outcome::new(
        min_eig >= -1e-10 && asym <= 1e-12,
        format!("200 sets: min eigenvalue {min_eig:.2e}, max |k(x,x') - k(x',x)^T| {asym:.1e}"),
    )
    .within(start.elapsed(), 30.0)
}

// ---------------------------------------------------------------- criterion 5

fn energy_invariants() -> Outcome {
    let start = Instant::now();
    let lossless = LinearPhs::new(
        DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]),
        DMatrix::zeros(2, 2),
        DMatrix::from_column_slice(2, 1, &[0.0, 1.0]),
        DMatrix::from_row_slice(2, 2, &[3.0, 0.0, 0.0, 0.5]),
    )
    .unwrap();
    let (tol, horizon) = (1e-9, 20.0);
    let traj = simulate(&lossless, &v(&[0.7, -0.3]), &ZeroInput(1), &uniform_grid(0.0, horizon, 401), &Tolerances::uniform(tol)).unwrap();
    let h0 = lossless.hamiltonian(&traj.states()[0]);
    let drift = traj.states().iter().map(|x| (lossless.hamiltonian(x) - h0).abs()).fold(0.0, f64::max);
    let conserved = drift <= 10.0 * tol * horizon;

    // open loop: H(t) - H(0) <= int y^T u
    let mut rng = ChaCha8Rng::seed_from_u64(51);
    let times = grid_with_max_step(0.0, 10.0, 0.005);
    let m = plant();
    let mut open_excess = f64::NEG_INFINITY;
    for _ in 0..50 {
        let x0 = v(&[rng.random_range(0.3..1.7), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]);
        let (a, w, phi) = (rng.random_range(0.0..1.5), rng.random_range(0.2..3.0), rng.random_range(0.0..6.3));
        let input = OpenLoop(move |t: f64| DVector::from_element(1, a * (w * t + phi).sin()));
        let traj = simulate(&m, &x0, &input, &times, &Tolerances::uniform(1e-10)).unwrap();
        open_excess = open_excess.max(storage_excess(&traj, |x| m.hamiltonian(x), |k| {
            traj.outputs().unwrap()[k].dot(&traj.inputs()[k])
        }));
    }

    // closed loop with the exact model: H_d(t) - H_d(0) <= int y_ex^T u_ex outside the epsilon ball
    let (desired, plan) = exact_setup(13.0);
    let model = ExactModel(plant());
    let spec = SamplingSpec::default();
    let eps = verify_dissipation_condition(&model, &desired, &plan, &spec).unwrap().epsilon;
    let times = grid_with_max_step(0.0, 13.0, 0.005);
    let mut closed_excess = f64::NEG_INFINITY;
    for _ in 0..10 {
        let (a, w, phi) = (rng.random_range(0.0..0.5), rng.random_range(0.5..3.0), rng.random_range(0.0..6.3));
        let ctrl = TrackingController::new(&model, &desired, &plan)
            .unwrap()
            .with_external(move |t: f64| DVector::from_element(1, a * (w * t + phi).sin()));
        let x0 = &plan.states()[0] + DVector::from_fn(3, |_, _| rng.random_range(-0.1..0.1));
        let traj = simulate(&plant(), &x0, &ctrl, &times, &Tolerances::uniform(1e-11)).unwrap();
        let hd = hd_along(desired.hamiltonian(), &plan, &traj).unwrap();
        let supply: Vec<f64> = (0..traj.len())
            .map(|k| {
                let t = times[k];
                ctrl.external_output(t, &traj.states()[k]).unwrap().dot(&ctrl.external_input(t))
            })
            .collect();
        let supplied = cumulative_trapezoid(&times, &supply);
        let radius = eps.unwrap_or(f64::INFINITY);
        for k in 0..traj.len() {
            let xbar = ctrl.tracking_error(times[k], &traj.states()[k]).unwrap();
            if xbar.norm() > radius {
                closed_excess = closed_excess.max(hd[k] - hd[0] - supplied[k]);
            }
        }
    }
    let passed = conserved && open_excess <= 1e-6 && eps.is_some() && closed_excess <= 1e-6;
    Outcome::new(
        passed,
        format!(
            "lossless drift {drift:.1e} (bound {:.0e}); open-loop storage excess {open_excess:.1e} on 50 runs; \
             epsilon {eps:?}, closed-loop storage excess {closed_excess:.1e} on 10 runs",
            10.0 * tol * horizon
        ),
    )
    .within(start.elapsed(), 120.0)
}

/// Largest `S(x(t_k)) - S(x(0)) - int_0^{t_k} supply`.
fn storage_excess(traj: &Trajectory, storage: impl Fn(&DVector<f64>) -> f64, supply: impl Fn(usize) -> f64) -> f64 {
    let s: Vec<f64> = (0..traj.len()).map(&supply).collect();
    let supplied = cumulative_trapezoid(traj.times(), &s);
    let s0 = storage(&traj.states()[0]);
    traj.states()
        .iter()
        .zip(&supplied)
        .map(|(x, w)| storage(x) - s0 - w)
        .fold(f64::NEG_INFINITY, f64::max)
}

// ---------------------------------------------------------------- criterion 6

fn verifier() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut passed = true;
    for (n, eta, rho) in [(3, 0.3, 2.0), (2, 0.5, 1.0), (4, 0.1, 0.5)] {
        let desired = DesiredDynamics::new(DMatrix::zeros(n, n), DVector::from_element(n, rho), QuadraticHamiltonian::unit(n)).unwrap();
        let plan = ReferencePlan::constant(DVector::zeros(n), 0.0, 1.0).unwrap();
        let spec = SamplingSpec {
            directions: 10_000,
            max_radius: 2.0 * eta * (n as f64).sqrt() / rho,
            radial_steps: 100,
            times: 1,
            ..SamplingSpec::default()
        };
        let report = verify_dissipation_condition(&ConstantEnvelope(DVector::from_element(n, eta)), &desired, &plan, &spec).unwrap();
        let exact = eta * (n as f64).sqrt() / rho;
        match report.epsilon {
            Some(e) => {
                let off = (e - exact).abs() / spec.radius_step();
                worst = worst.max(off);
                passed &= off <= 1.0;
            }
            None => passed = false,
        }
    }
    Outcome::new(passed, format!("3 problems, largest |eps - eta sqrt(n)/rho| = {worst:.2} grid steps")).within(start.elapsed(), 30.0)
}

// ---------------------------------------------------------------- criterion 7

fn noiseless_dataset(samples: usize) -> FilteredDataset {
    let times = uniform_grid(0.0, 20.0, samples);
    let input = OpenLoop(|t: f64| DVector::from_element(1, t.sin()));
    let traj = simulate(&plant(), &v(&[0.0, 0.0, 1.0]), &input, &times, &Tolerances::uniform(1e-11)).unwrap();
    let window = if samples < 100 { 7 } else { 9 };
    SavitzkyGolay::new(window, 5).unwrap().apply(&traj).unwrap()
}

fn learning() -> Outcome {
    let start = Instant::now();
    let m = plant();
    let held_times = uniform_grid(0.0, 20.0, 200);
    let held_input = OpenLoop(|t: f64| DVector::from_element(1, 0.8 * (1.3 * t).sin()));
    let held = simulate(&m, &v(&[0.2, 0.1, 0.8]), &held_input, &held_times, &Tolerances::uniform(1e-11)).unwrap();
    let truth: Vec<DVector<f64>> = held
        .states()
        .iter()
        .zip(held.inputs())
        .map(|(x, u)| m.eval_dynamics(x, u).unwrap())
        .collect();

    let box_data = noiseless_dataset(300);
    let (mut lo, mut hi) = (vec![f64::INFINITY; 3], vec![f64::NEG_INFINITY; 3]);
    for x in box_data.states() {
        for i in 0..3 {
            lo[i] = lo[i].min(x[i]);
            hi[i] = hi[i].max(x[i]);
        }
    }
    let axis = |i: usize, k: usize| lo[i] + (hi[i] - lo[i]) * k as f64 / 9.0;
    let grid: Vec<DVector<f64>> = (0..1000).map(|k| v(&[axis(0, k / 100), axis(1, (k / 10) % 10), axis(2, k % 10)])).collect();
    let true_h: Vec<f64> = grid.iter().map(|x| m.hamiltonian(x)).collect();

    let init = pipeline::initial_hyperparams(&ExperimentConfig::with_seed(SEED)).unwrap();
    let config = TrainConfig {
        restarts: 2,
        seed: 71,
        ..TrainConfig::default()
    };
    let mut rmse = Vec::new();
    let mut rho = Vec::new();
    for n in [50, 100, 300] {
        let data = noiseless_dataset(n);
        let model = match train(&data, &init, &config) {
            Ok((model, _)) => model,
            Err(e) => return Outcome::new(false, format!("training on N={n} failed: {e}")),
        };
        let mut sq = 0.0;
        for ((x, u), f) in held.states().iter().zip(held.inputs()).zip(&truth) {
            sq += (model.posterior_dynamics(x, u).unwrap().0 - f).norm_squared();
        }
        rmse.push((sq / (3 * truth.len()) as f64).sqrt());
        let learned: Vec<f64> = grid.iter().map(|x| model.posterior_hamiltonian(x).0).collect();
        rho.push(spearman(&learned, &true_h));
    }
    let monotone = rmse.windows(2).all(|w| w[1] < w[0]);
    let ranked = rho.iter().all(|r| *r >= 0.95);
    Outcome::new(
        monotone && ranked,
        format!("N=50/100/300: held-out RMSE {:.2e} / {:.2e} / {:.2e}; Spearman {:.4} / {:.4} / {:.4}", rmse[0], rmse[1], rmse[2], rho[0], rho[1], rho[2]),
    )
    .within(start.elapsed(), 600.0)
}

// ----------------------------------------------------------------

fn main() -> ExitCode {
    let tmp = tempfile::tempdir().unwrap();
    let mut lines = Vec::new();
    let mut record = |id: u32, outcome: Outcome| {
        let line = format!("criterion {id}: {} | {}", if outcome.passed { "PASS" } else { "FAIL" }, outcome.detail);
        println!("{line}");
        lines.push(outcome.passed);
    };

    let (c1, first) = reproduction(tmp.path());
    record(1, c1);
    record(2, perfect_model());
    record(3, gp_oracle());
    record(4, kernel_validity());
    record(5, energy_invariants());
    record(6, verifier());
    record(7, learning());
    record(8, determinism(tmp.path(), first.as_ref()));

    let failed = lines.iter().filter(|p| !**p).count();
    println!("acceptance: {} of {} criteria passed", lines.len() - failed, lines.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
