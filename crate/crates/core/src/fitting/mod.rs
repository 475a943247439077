//! Damped nonlinear least squares with parameter covariance and R².
//!
//! Uncertainties: when the trace carries `sigma_y` the residuals are weighted
//! by `1/σ` and the covariance is `(JᵀWJ)⁻¹`. Without them every point has unit
//! weight and the covariance is scaled by the reduced χ², `χ²/(n − k)`.
//! Standard errors are the square roots of the covariance diagonal.

mod guess;
mod lm;
mod models;

use nalgebra::{DMatrix, SVD};
use thiserror::Error;

pub use guess::{initial_guess, GuessError};
pub use lm::{JACOBIAN_ABS_STEP, JACOBIAN_REL_STEP, RANK_RCOND};
pub use models::{Model, ModelKind};

use crate::trace::SignalTrace;

pub const DEFAULT_MAX_ITERATIONS: usize = 500;
pub const DEFAULT_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Error, PartialEq)]
pub enum FitError {
    #[error("need at least {needed} points for {free} free parameters, got {got}")]
    InsufficientData { needed: usize, free: usize, got: usize },
    #[error("invalid fit problem: {0}")]
    InvalidProblem(String),
    #[error("degenerate fit: Jacobian is rank deficient along {}", describe_directions(.directions))]
    Degenerate {
        /// Unit vectors in parameter space (name, component) spanning the null space.
        directions: Vec<Vec<(String, f64)>>,
        parameters: Vec<f64>,
    },
}

fn describe_directions(dirs: &[Vec<(String, f64)>]) -> String {
    dirs.iter()
        .map(|d| {
            let terms: Vec<String> = d
                .iter()
                .filter(|(_, c)| c.abs() > 1e-3)
                .map(|(n, c)| format!("{c:+.3}·{n}"))
                .collect();
            format!("[{}]", terms.join(" "))
        })
        .collect::<Vec<_>>()
        .join(", ")
}

/// A model, a starting point and the solver settings.
#[derive(Debug, Clone)]
pub struct FitProblem<M = ModelKind> {
    pub model: M,
    pub initial_guess: Vec<f64>,
    /// Per-parameter `[lo, hi]`; steps are projected back into the box.
    pub bounds: Option<Vec<(f64, f64)>>,
    /// `true` entries are held at their initial value.
    pub fixed: Vec<bool>,
    pub max_iterations: usize,
    /// Relative χ² change (and scaled gradient) below which the fit has converged.
    pub tolerance: f64,
}

impl FitProblem<ModelKind> {
    /// Problem with the model's default bounds and fixed parameters.
    pub fn for_kind(kind: ModelKind, initial_guess: Vec<f64>) -> Self {
        Self {
            model: kind,
            initial_guess,
            bounds: Some(kind.default_bounds()),
            fixed: kind.default_fixed(),
            max_iterations: DEFAULT_MAX_ITERATIONS,
            tolerance: DEFAULT_TOLERANCE,
        }
    }
}

impl<M: Model> FitProblem<M> {
    pub fn new(model: M, initial_guess: Vec<f64>) -> Self {
        let n = initial_guess.len();
        Self {
            model,
            initial_guess,
            bounds: None,
            fixed: vec![false; n],
            max_iterations: DEFAULT_MAX_ITERATIONS,
            tolerance: DEFAULT_TOLERANCE,
        }
    }

    pub fn with_bounds(mut self, bounds: Vec<(f64, f64)>) -> Self {
        self.bounds = Some(bounds);
        self
    }

    pub fn fix(mut self, index: usize, fixed: bool) -> Self {
        self.fixed[index] = fixed;
        self
    }

    pub fn free_all(mut self) -> Self {
        self.fixed.iter_mut().for_each(|f| *f = false);
        self
    }

    fn validate(&self) -> Result<(), FitError> {
        let n = self.model.n_params();
        let bad = |msg: String| Err(FitError::InvalidProblem(msg));
        if self.initial_guess.len() != n {
            return bad(format!("model `{}` has {n} parameters, guess has {}", self.model.name(), self.initial_guess.len()));
        }
        if self.fixed.len() != n {
            return bad(format!("fixed mask has {} entries, expected {n}", self.fixed.len()));
        }
        if let Some((i, _)) = self.initial_guess.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return bad(format!("initial value of `{}` is not finite", self.model.param_names()[i]));
        }
        if !(self.tolerance > 0.0) {
            return bad(format!("tolerance must be positive, got {}", self.tolerance));
        }
        if let Some(bounds) = &self.bounds {
            if bounds.len() != n {
                return bad(format!("bounds have {} entries, expected {n}", bounds.len()));
            }
            for (i, (&v, &(lo, hi))) in self.initial_guess.iter().zip(bounds).enumerate() {
                if !(lo <= hi) || v < lo || v > hi {
                    return bad(format!(
                        "initial value {v} of `{}` outside bounds [{lo}, {hi}]",
                        self.model.param_names()[i]
                    ));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub param_names: Vec<String>,
    pub parameters: Vec<f64>,
    pub standard_errors: Vec<f64>,
    pub covariance: DMatrix<f64>,
    pub r_squared: f64,
    pub chi_squared: f64,
    /// Jacobian evaluations.
    pub iterations: usize,
    pub accepted_steps: usize,
    pub converged: bool,
    pub fixed: Vec<bool>,
    /// χ² at the start and after every accepted step.
    pub chi_squared_history: Vec<f64>,
}

impl FitResult {
    pub fn param(&self, name: &str) -> Option<f64> {
        self.param_names.iter().position(|n| n == name).map(|i| self.parameters[i])
    }

    pub fn std_error(&self, name: &str) -> Option<f64> {
        self.param_names.iter().position(|n| n == name).map(|i| self.standard_errors[i])
    }
}

/// `1 − SS_res/SS_tot`; defined as 1 when the data have zero variance.
pub fn r_squared(data: &SignalTrace, prediction: &[f64]) -> f64 {
    r_squared_values(data.y(), prediction)
}

pub fn r_squared_values(y: &[f64], prediction: &[f64]) -> f64 {
    assert_eq!(y.len(), prediction.len(), "prediction length must match data");
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let ss_tot: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    let ss_res: f64 = y.iter().zip(prediction).map(|(v, p)| (v - p).powi(2)).sum();
    if ss_tot == 0.0 {
        return 1.0;
    }
    1.0 - ss_res / ss_tot
}

/// Fits `problem.model` to `data`.
///
/// Hitting `max_iterations` is not an error: the result comes back with
/// `converged = false`.
pub fn fit<M: Model>(problem: &FitProblem<M>, data: &SignalTrace) -> Result<FitResult, FitError> {
    problem.validate()?;
    let n = problem.model.n_params();
    let free: Vec<usize> = (0..n).filter(|&i| !problem.fixed[i]).collect();
    if data.len() < free.len() + 1 {
        return Err(FitError::InsufficientData { needed: free.len() + 1, free: free.len(), got: data.len() });
    }
    let sqrt_w = match data.sigma_y() {
        Some(s) => s.iter().map(|v| 1.0 / v).collect(),
        None => vec![1.0; data.len()],
    };
    let lm_problem = lm::Problem {
        model: &problem.model,
        x: data.x(),
        y: data.y(),
        sqrt_w,
        free: free.clone(),
        bounds: problem.bounds.clone().unwrap_or_else(|| vec![(f64::NEG_INFINITY, f64::INFINITY); n]),
    };
    let outcome = lm::solve(&lm_problem, &problem.initial_guess, problem.max_iterations, problem.tolerance);

    let names: Vec<String> = problem.model.param_names().iter().map(|s| s.to_string()).collect();
    let mut covariance = DMatrix::zeros(n, n);
    if !free.is_empty() {
        let jac = lm_problem.jacobian(&outcome.params);
        let scale: Vec<f64> = jac.column_iter().map(|c| if c.norm() > 0.0 { c.norm() } else { 1.0 }).collect();
        let mut scaled = jac.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col /= scale[j];
        }
        let svd = SVD::new(scaled, false, true);
        let v_t = svd.v_t.as_ref().expect("v_t requested");
        let sigma = &svd.singular_values;
        let smax = sigma.max();
        let null: Vec<usize> = (0..sigma.len()).filter(|&i| !(sigma[i] > smax * RANK_RCOND) || smax == 0.0).collect();
        if !null.is_empty() {
            let directions = null
                .iter()
                .map(|&i| {
                    let mut dir: Vec<f64> = (0..free.len()).map(|j| v_t[(i, j)] / scale[j]).collect();
                    let norm = dir.iter().map(|d| d * d).sum::<f64>().sqrt();
                    dir.iter_mut().for_each(|d| *d /= norm);
                    free.iter().zip(dir).map(|(&k, c)| (names[k].clone(), c)).collect()
                })
                .collect();
            return Err(FitError::Degenerate { directions, parameters: outcome.params });
        }
        let dof = data.len() - free.len();
        let s2 = if data.sigma_y().is_some() { 1.0 } else { outcome.chi_squared / dof as f64 };
        // cov = S⁻¹ V Σ⁻² Vᵀ S⁻¹ · s²
        let k = free.len();
        let mut inner = DMatrix::zeros(k, k);
        for a in 0..k {
            for b in 0..=a {
                let v: f64 = (0..sigma.len()).map(|i| v_t[(i, a)] * v_t[(i, b)] / (sigma[i] * sigma[i])).sum();
                let v = v * s2 / (scale[a] * scale[b]);
                inner[(a, b)] = v;
                inner[(b, a)] = v;
            }
        }
        for (a, &ka) in free.iter().enumerate() {
            for (b, &kb) in free.iter().enumerate() {
                covariance[(ka, kb)] = inner[(a, b)];
            }
        }
    }

    let prediction: Vec<f64> = data.x().iter().map(|&x| problem.model.eval(x, &outcome.params)).collect();
    let standard_errors = (0..n).map(|i| covariance[(i, i)].max(0.0).sqrt()).collect();
    Ok(FitResult {
        param_names: names,
        parameters: outcome.params,
        standard_errors,
        covariance,
        r_squared: r_squared(data, &prediction),
        chi_squared: outcome.chi_squared,
        iterations: outcome.iterations,
        accepted_steps: outcome.accepted_steps,
        converged: outcome.converged,
        fixed: problem.fixed.clone(),
        chi_squared_history: outcome.chi_squared_history,
    })
}
