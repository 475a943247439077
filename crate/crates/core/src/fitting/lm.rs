//! Levenberg–Marquardt iteration in the trust-region form.
//!
//! The damped step minimises `‖J·δ + r‖² + λ‖D·δ‖²`, where `D` holds running
//! maxima of the Jacobian column norms. Each step is solved from the SVD of
//! the column-scaled Jacobian `J·D⁻¹`, so ill-conditioned problems (high-order
//! polynomials in kelvin) keep `cond(J)` rather than `cond(J)²`. The damping
//! `λ` is chosen so the scaled step fits in the trust radius `Δ`; `Δ` grows by
//! a factor 2 after good steps and shrinks by 4 after rejected ones, and
//! `λ = 0` (a pure Gauss–Newton step) whenever that step already fits.

use nalgebra::{DMatrix, DVector, SVD};

use super::models::Model;

/// Relative step for central-difference derivatives of nonlinear models.
pub const JACOBIAN_REL_STEP: f64 = 1e-6;
/// Absolute floor for the derivative step.
pub const JACOBIAN_ABS_STEP: f64 = 1e-9;
/// Singular values below this fraction of the largest are treated as zero.
pub const RANK_RCOND: f64 = 1e-12;

const INITIAL_RADIUS_FACTOR: f64 = 100.0;
const MIN_GAIN_RATIO: f64 = 1e-4;

pub(crate) struct Problem<'a, M: Model + ?Sized> {
    pub model: &'a M,
    pub x: &'a [f64],
    pub y: &'a [f64],
    pub sqrt_w: Vec<f64>,
    pub free: Vec<usize>,
    pub bounds: Vec<(f64, f64)>,
}

impl<M: Model + ?Sized> Problem<'_, M> {
    pub fn residuals(&self, p: &[f64]) -> DVector<f64> {
        DVector::from_iterator(
            self.x.len(),
            self.x.iter().zip(self.y).zip(&self.sqrt_w).map(|((&x, &y), &w)| w * (self.model.eval(x, p) - y)),
        )
    }

    /// Jacobian of the residuals with respect to the free parameters.
    ///
    /// Central differences in general; for linear models each column is the
    /// basis function itself, which is exact.
    pub fn jacobian(&self, p: &[f64]) -> DMatrix<f64> {
        let mut jac = DMatrix::zeros(self.x.len(), self.free.len());
        let mut work = p.to_vec();
        if self.model.is_linear() {
            work.fill(0.0);
            for (col, &k) in self.free.iter().enumerate() {
                work[k] = 1.0;
                for (i, (&x, &w)) in self.x.iter().zip(&self.sqrt_w).enumerate() {
                    jac[(i, col)] = w * self.model.eval(x, &work);
                }
                work[k] = 0.0;
            }
            return jac;
        }
        for (col, &k) in self.free.iter().enumerate() {
            let h = (JACOBIAN_REL_STEP * p[k].abs()).max(JACOBIAN_ABS_STEP);
            work[k] = p[k] + h;
            let plus = self.residuals(&work);
            work[k] = p[k] - h;
            let minus = self.residuals(&work);
            work[k] = p[k];
            jac.set_column(col, &((plus - minus) / (2.0 * h)));
        }
        jac
    }

    fn project(&self, p: &mut [f64]) {
        for &k in &self.free {
            let (lo, hi) = self.bounds[k];
            p[k] = p[k].clamp(lo, hi);
        }
    }
}

pub(crate) struct Outcome {
    pub params: Vec<f64>,
    pub chi_squared: f64,
    pub iterations: usize,
    pub accepted_steps: usize,
    pub converged: bool,
    pub chi_squared_history: Vec<f64>,
}

/// Scaled step `z(λ) = −V·diag(σ/(σ² + λ))·c`, `c = Uᵀr`.
fn scaled_step(sigma: &DVector<f64>, v_t: &DMatrix<f64>, c: &DVector<f64>, lambda: f64, cutoff: f64) -> DVector<f64> {
    let coeffs = DVector::from_iterator(
        sigma.len(),
        sigma.iter().zip(c.iter()).map(|(&s, &ci)| if s > cutoff { -s * ci / (s * s + lambda) } else { 0.0 }),
    );
    v_t.transpose() * coeffs
}

/// `λ ≥ 0` with `‖z(λ)‖ ≈ radius`, by bisection on `log λ`.
fn damping_for_radius(sigma: &DVector<f64>, v_t: &DMatrix<f64>, c: &DVector<f64>, radius: f64, cutoff: f64) -> f64 {
    let norm = |lambda: f64| scaled_step(sigma, v_t, c, lambda, cutoff).norm();
    if norm(0.0) <= radius {
        return 0.0;
    }
    let smax = sigma.max();
    let mut hi = (smax * c.norm() / radius).max(f64::MIN_POSITIVE);
    while norm(hi) > radius {
        hi *= 4.0;
    }
    let mut lo = hi * 1e-30;
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if norm(mid) > radius {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi / lo < 1.0 + 1e-3 {
            break;
        }
    }
    hi
}

fn max_gradient_cosine(jac: &DMatrix<f64>, r: &DVector<f64>) -> f64 {
    let rn = r.norm();
    if rn == 0.0 {
        return 0.0;
    }
    jac.column_iter()
        .map(|col| {
            let cn = col.norm();
            if cn == 0.0 {
                0.0
            } else {
                (col.dot(r) / (cn * rn)).abs()
            }
        })
        .fold(0.0, f64::max)
}

pub(crate) fn solve<M: Model + ?Sized>(problem: &Problem<'_, M>, initial: &[f64], max_iterations: usize, tolerance: f64) -> Outcome {
    let mut p = initial.to_vec();
    problem.project(&mut p);
    let mut r = problem.residuals(&p);
    let mut chi2 = r.norm_squared();
    let data_scale: f64 = problem.y.iter().zip(&problem.sqrt_w).map(|(y, w)| (y * w).powi(2)).sum();
    let exact_floor = (1e-14f64).powi(2) * data_scale;

    let n = problem.free.len();
    let mut diag = DVector::<f64>::zeros(n);
    let mut radius = 0.0;
    let mut history = vec![chi2];
    let mut accepted = 0;
    let mut iterations = 0;
    let mut converged = chi2 <= exact_floor;

    while !converged && iterations < max_iterations && n > 0 {
        iterations += 1;
        let jac = problem.jacobian(&p);
        let gradient_small = max_gradient_cosine(&jac, &r) <= tolerance;
        for (j, col) in jac.column_iter().enumerate() {
            diag[j] = diag[j].max(col.norm());
            if diag[j] == 0.0 {
                diag[j] = 1.0;
            }
        }
        let mut scaled = jac.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col /= diag[j];
        }
        let svd = SVD::new(scaled, true, true);
        let u = svd.u.as_ref().expect("u requested");
        let v_t = svd.v_t.as_ref().expect("v_t requested");
        let sigma = &svd.singular_values;
        let cutoff = sigma.max() * RANK_RCOND;
        let c = u.transpose() * &r;

        let p_norm = DVector::from_iterator(n, problem.free.iter().enumerate().map(|(j, &k)| diag[j] * p[k])).norm();
        // The residual can be nearly orthogonal to a slightly wrong Jacobian
        // while the Gauss–Newton step is still far from negligible.
        if gradient_small && scaled_step(sigma, v_t, &c, 0.0, cutoff).norm() <= tolerance * p_norm {
            converged = true;
            break;
        }
        if iterations == 1 {
            radius = INITIAL_RADIUS_FACTOR * p_norm;
            if radius == 0.0 {
                radius = INITIAL_RADIUS_FACTOR;
            }
        }

        loop {
            let lambda = damping_for_radius(sigma, v_t, &c, radius, cutoff);
            let z = scaled_step(sigma, v_t, &c, lambda, cutoff);
            let mut trial = p.clone();
            for (j, &k) in problem.free.iter().enumerate() {
                trial[k] += z[j] / diag[j];
            }
            problem.project(&mut trial);
            let delta = DVector::from_iterator(n, problem.free.iter().map(|&k| trial[k] - p[k]));
            let step_norm = DVector::from_iterator(n, delta.iter().enumerate().map(|(j, d)| d * diag[j])).norm();

            // Both reductions are formed from residual differences rather than
            // differences of χ², which keeps them accurate near the minimum.
            let j_delta = &jac * &delta;
            let predicted = -j_delta.dot(&(2.0 * &r + &j_delta));
            let r_trial = problem.residuals(&trial);
            let chi2_trial = r_trial.norm_squared();
            let actual = (&r - &r_trial).dot(&(&r + &r_trial));
            let ratio = if predicted > 0.0 { actual / predicted } else { -1.0 };

            if ratio > MIN_GAIN_RATIO && chi2_trial.is_finite() {
                if ratio > 0.75 || lambda == 0.0 {
                    radius = radius.max(2.0 * step_norm);
                } else if ratio < 0.25 {
                    radius = 0.5 * radius.min(step_norm.max(f64::MIN_POSITIVE));
                }
                let rel_actual = actual / chi2;
                let rel_pred = predicted / chi2;
                p = trial;
                r = r_trial;
                chi2 = chi2_trial;
                history.push(chi2);
                accepted += 1;
                if (rel_actual <= tolerance && rel_pred <= tolerance) || chi2 <= exact_floor {
                    converged = true;
                }
                break;
            }

            radius = 0.25 * radius.min(step_norm.max(f64::MIN_POSITIVE));
            if radius <= f64::EPSILON * p_norm.max(f64::MIN_POSITIVE) || step_norm == 0.0 {
                // No representable step reduces χ²: the minimum is resolved to machine precision.
                converged = true;
                break;
            }
        }
    }

    Outcome {
        params: p,
        chi_squared: chi2,
        iterations,
        accepted_steps: accepted,
        converged,
        chi_squared_history: history,
    }
}
