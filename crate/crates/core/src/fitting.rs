//! Levenberg–Marquardt least squares with a recorded cost history.
//!
//! Written in-house rather than pulled from a crate because callers need
//! the sequence of accepted costs (it must never increase) and the
//! parameter covariance at the optimum.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FitError {
    #[error("no convergence after {iterations} iterations (cost {cost:e})")]
    ConvergenceFailure { iterations: usize, cost: f64 },
    #[error("residual function returned a non-finite value")]
    NonFinite,
    #[error("more parameters ({params}) than residuals ({residuals})")]
    Underdetermined { params: usize, residuals: usize },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LmOptions {
    pub max_iterations: usize,
    /// Stop when an accepted step lowers the cost by less than this fraction.
    pub cost_rtol: f64,
    /// Stop when every parameter moves by less than this fraction of its
    /// scale.
    pub step_rtol: f64,
    pub initial_lambda: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self { max_iterations: 200, cost_rtol: 1e-12, step_rtol: 1e-10, initial_lambda: 1e-3 }
    }
}

#[derive(Clone, Debug)]
pub struct LmResult {
    pub params: DVector<f64>,
    /// `Σ r²` at the optimum.
    pub cost: f64,
    /// Cost after every accepted iteration, starting with the initial guess.
    pub history: Vec<f64>,
    pub iterations: usize,
    /// `σ² (JᵀJ)⁻¹` with `σ² = cost / (n − p)`; `None` when `JᵀJ` is singular.
    pub covariance: Option<DMatrix<f64>>,
}

impl LmResult {
    /// One-sigma parameter uncertainties, when available.
    pub fn std_errors(&self) -> Option<Vec<f64>> {
        self.covariance.as_ref().map(|c| (0..c.nrows()).map(|i| c[(i, i)].max(0.0).sqrt()).collect())
    }
}

fn cost_of(r: &DVector<f64>) -> f64 {
    r.norm_squared()
}

/// Forward-difference Jacobian with per-parameter steps `1e-7·scale`.
fn jacobian<F: Fn(&DVector<f64>) -> DVector<f64>>(f: &F, p: &DVector<f64>, r0: &DVector<f64>, scale: &[f64]) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(r0.len(), p.len());
    for k in 0..p.len() {
        let h = 1e-7 * scale[k];
        let mut q = p.clone();
        q[k] += h;
        let col = (f(&q) - r0) / h;
        j.set_column(k, &col);
    }
    j
}

/// Minimise `Σ r(p)²` from `p0`. `scale` sets the typical magnitude of each
/// parameter (used for finite differences and the step test).
pub fn levenberg_marquardt<F>(residuals: F, p0: DVector<f64>, scale: &[f64], opts: &LmOptions) -> Result<LmResult, FitError>
where
    F: Fn(&DVector<f64>) -> DVector<f64>,
{
    let mut p = p0;
    let mut r = residuals(&p);
    if r.len() < p.len() {
        return Err(FitError::Underdetermined { params: p.len(), residuals: r.len() });
    }
    if r.iter().any(|x| !x.is_finite()) {
        return Err(FitError::NonFinite);
    }
    let mut cost = cost_of(&r);
    let mut history = vec![cost];
    let mut lambda = opts.initial_lambda;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < opts.max_iterations {
        iterations += 1;
        let j = jacobian(&residuals, &p, &r, scale);
        let jtj = j.transpose() * &j;
        let g = j.transpose() * &r;

        let mut accepted = false;
        for _ in 0..40 {
            let mut a = jtj.clone();
            for i in 0..a.nrows() {
                a[(i, i)] += lambda * jtj[(i, i)].max(1e-300);
            }
            let Some(step) = a.cholesky().map(|c| c.solve(&(-&g))) else {
                lambda *= 10.0;
                continue;
            };
            let trial = &p + &step;
            let r_trial = residuals(&trial);
            let c_trial = cost_of(&r_trial);
            if c_trial.is_finite() && c_trial <= cost {
                let small_step = step.iter().zip(scale).all(|(s, sc)| s.abs() <= opts.step_rtol * sc);
                let small_gain = cost - c_trial <= opts.cost_rtol * cost;
                p = trial;
                r = r_trial;
                cost = c_trial;
                history.push(cost);
                lambda = (lambda / 3.0).max(1e-12);
                accepted = true;
                converged = small_step || small_gain || cost == 0.0;
                break;
            }
            lambda *= 4.0;
        }
        if !accepted {
            // no downhill step at any damping: we are at a minimum to working precision
            converged = true;
        }
        if converged {
            break;
        }
    }
    if !converged {
        return Err(FitError::ConvergenceFailure { iterations, cost });
    }

    let j = jacobian(&residuals, &p, &r, scale);
    let dof = r.len().saturating_sub(p.len()).max(1) as f64;
    let covariance = (j.transpose() * &j).try_inverse().map(|inv| inv * (cost / dof));
    Ok(LmResult { params: p, cost, history, iterations, covariance })
}
