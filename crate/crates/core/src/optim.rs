//! Limited-memory BFGS with backtracking line search.

use alloc::collections::VecDeque;
use nalgebra::DVector;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LbfgsConfig {
    pub memory: usize,
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
    /// Relative objective change below which the run stops.
    pub function_tolerance: f64,
    pub max_line_search: usize,
}

impl Default for LbfgsConfig {
    fn default() -> Self {
        Self {
            memory: 10,
            max_iterations: 500,
            gradient_tolerance: 1e-5,
            function_tolerance: 1e-12,
            max_line_search: 40,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    GradientTolerance,
    FunctionTolerance,
    MaxIterations,
    LineSearchFailed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LbfgsResult {
    pub x: DVector<f64>,
    pub value: f64,
    pub gradient: DVector<f64>,
    pub iterations: usize,
    pub evaluations: usize,
    pub termination: Termination,
}

/// Minimizes `f`, which returns the value and gradient, or `None` where it cannot be evaluated.
///
/// Returns `None` only when the starting point itself cannot be evaluated.
pub fn minimize<F>(mut f: F, x0: DVector<f64>, config: &LbfgsConfig) -> Option<LbfgsResult>
where
    F: FnMut(&DVector<f64>) -> Option<(f64, DVector<f64>)>,
{
    let mut evaluations = 1;
    let (mut value, mut grad) = f(&x0).filter(|(v, g)| v.is_finite() && g.iter().all(|x| x.is_finite()))?;
    let mut x = x0;
    let mut history: VecDeque<(DVector<f64>, DVector<f64>, f64)> = VecDeque::new();
    let mut termination = Termination::MaxIterations;
    let mut iterations = 0;

    while iterations < config.max_iterations {
        if grad.amax() <= config.gradient_tolerance {
            termination = Termination::GradientTolerance;
            break;
        }
        // two-loop recursion
        let mut q = -&grad;
        let mut alphas = alloc::vec::Vec::with_capacity(history.len());
        for (s, y, rho) in history.iter().rev() {
            let a = rho * s.dot(&q);
            q.axpy(-a, y, 1.0);
            alphas.push(a);
        }
        if let Some((s, y, _)) = history.back() {
            q *= s.dot(y) / y.dot(y);
        } else {
            q *= 1.0 / grad.norm().max(1.0);
        }
        for ((s, y, rho), a) in history.iter().zip(alphas.iter().rev()) {
            let b = rho * y.dot(&q);
            q.axpy(a - b, s, 1.0);
        }
        let mut direction = q;
        let mut slope = grad.dot(&direction);
        if !(slope < 0.0) {
            history.clear();
            direction = -&grad / grad.norm().max(1.0);
            slope = grad.dot(&direction);
        }

        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..config.max_line_search {
            let trial = &x + step * &direction;
            evaluations += 1;
            if let Some((v, g)) = f(&trial) {
                if v.is_finite() && g.iter().all(|x| x.is_finite()) && v <= value + 1e-4 * step * slope {
                    accepted = Some((trial, v, g));
                    break;
                }
            }
            step *= 0.5;
        }
        let Some((x_new, v_new, g_new)) = accepted else {
            if history.is_empty() {
                termination = Termination::LineSearchFailed;
                break;
            }
            history.clear();
            continue;
        };
        iterations += 1;
        let s = &x_new - &x;
        let y = &g_new - &grad;
        let sy = s.dot(&y);
        if sy > 1e-12 * s.norm() * y.norm() {
            if history.len() == config.memory {
                history.pop_front();
            }
            history.push_back((s, y, 1.0 / sy));
        }
        let change = (value - v_new).abs();
        x = x_new;
        grad = g_new;
        let old = value;
        value = v_new;
        if change <= config.function_tolerance * old.abs().max(value.abs()).max(1.0) {
            termination = if grad.amax() <= config.gradient_tolerance {
                Termination::GradientTolerance
            } else {
                Termination::FunctionTolerance
            };
            break;
        }
    }
    Some(LbfgsResult {
        x,
        value,
        gradient: grad,
        iterations,
        evaluations,
        termination,
    })
}
