//! Starting points for each model family, estimated from the data alone.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use super::models::{Model, ModelKind};
use crate::constants::{CONSTANTS, EXPERIMENT_B_FIELD};
use crate::signals::larmor_frequency;
use crate::temperature::raman_exponent;
use crate::trace::SignalTrace;

#[derive(Debug, Error, PartialEq)]
pub enum GuessError {
    #[error("trace is flat; no structure to estimate `{0}` from")]
    Flat(&'static str),
    #[error("trace too short: {got} points, heuristic for `{model}` needs {needed}")]
    TooShort { model: &'static str, needed: usize, got: usize },
    #[error("heuristic for `{model}` failed: {reason}")]
    Failed { model: &'static str, reason: String },
}

/// Linear least squares on column-normalised basis functions.
/// Returns the coefficients and the residual sum of squares.
fn lstsq(columns: &[Vec<f64>], y: &[f64]) -> Option<(Vec<f64>, f64)> {
    let m = y.len();
    let k = columns.len();
    if m < k {
        return None;
    }
    let norms: Vec<f64> = columns
        .iter()
        .map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt())
        .map(|n| if n > 0.0 { n } else { 1.0 })
        .collect();
    let a = DMatrix::from_fn(m, k, |i, j| columns[j][i] / norms[j]);
    let b = DVector::from_column_slice(y);
    let sol = a.clone().svd(true, true).solve(&b, 1e-13).ok()?;
    let resid = (&a * &sol - &b).norm_squared();
    let coeffs: Vec<f64> = sol.iter().zip(&norms).map(|(s, n)| s / n).collect();
    if coeffs.iter().all(|c| c.is_finite()) {
        Some((coeffs, resid))
    } else {
        None
    }
}

fn logspace(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(move |i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
}

/// Best separable fit over a one-dimensional grid of a nonlinear parameter.
fn grid_search<F>(grid: impl Iterator<Item = f64>, mut columns_for: F, y: &[f64]) -> Option<(f64, Vec<f64>)>
where
    F: FnMut(f64) -> Vec<Vec<f64>>,
{
    let mut best: Option<(f64, f64, Vec<f64>)> = None;
    for g in grid {
        if let Some((coeffs, ssr)) = lstsq(&columns_for(g), y) {
            if best.as_ref().is_none_or(|b| ssr < b.1) {
                best = Some((g, ssr, coeffs));
            }
        }
    }
    best.map(|(g, _, c)| (g, c))
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Frequency (cycles per x unit) of the largest discrete-spectrum peak of
/// `y − mean(y)`, refined by parabolic interpolation of the power.
fn dominant_frequency(x: &[f64], y: &[f64]) -> Option<f64> {
    let span = x[x.len() - 1] - x[0];
    let mut dx: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    dx.sort_by(f64::total_cmp);
    let nyquist = 0.5 / dx[dx.len() / 2];
    let m = mean(y);
    let power = |f: f64| {
        let (mut re, mut im) = (0.0, 0.0);
        for (&xi, &yi) in x.iter().zip(y) {
            let (s, c) = (2.0 * PI * f * (xi - x[0])).sin_cos();
            re += (yi - m) * c;
            im -= (yi - m) * s;
        }
        re * re + im * im
    };
    let df = 1.0 / (8.0 * span);
    let n_f = ((nyquist - 1.0 / span) / df).floor() as usize;
    if n_f < 3 {
        return None;
    }
    let freqs: Vec<f64> = (0..=n_f).map(|i| 1.0 / span + i as f64 * df).collect();
    let pw: Vec<f64> = freqs.iter().map(|&f| power(f)).collect();
    let (imax, _) = pw.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1))?;
    if imax == 0 || imax == pw.len() - 1 {
        return Some(freqs[imax]);
    }
    let (a, b, c) = (pw[imax - 1], pw[imax], pw[imax + 1]);
    let denom = a - 2.0 * b + c;
    let shift = if denom != 0.0 { 0.5 * (a - c) / denom } else { 0.0 };
    Some(freqs[imax] + shift.clamp(-0.5, 0.5) * df)
}

fn check_structure(model: &'static str, data: &SignalTrace, needed: usize) -> Result<(), GuessError> {
    if data.len() < needed {
        return Err(GuessError::TooShort { model, needed, got: data.len() });
    }
    let y = data.y();
    let (lo, hi) = y.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
    let scale = lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
    if hi - lo <= 1e-12 * scale {
        return Err(GuessError::Flat(model));
    }
    Ok(())
}

fn failed(model: &'static str, reason: &str) -> GuessError {
    GuessError::Failed { model, reason: reason.to_string() }
}

/// Heuristic starting parameters for `kind` (in [`Model::param_names`] order).
///
/// ESEEM Larmor frequencies are taken at the experiment field; use
/// [`eseem_guess`] to supply other values.
pub fn initial_guess(kind: &ModelKind, data: &SignalTrace) -> Result<Vec<f64>, GuessError> {
    let needed = kind.n_params() + 1;
    let name = kind.cli_name();
    check_structure(name, data, needed)?;
    let (x, y) = (data.x(), data.y());
    match kind {
        ModelKind::Lorentzian2 => lorentzian2_guess(x, y),
        ModelKind::Ramsey => ramsey_guess(x, y),
        ModelKind::Eseem => eseem_guess(
            data,
            larmor_frequency(CONSTANTS.gyro_c13, EXPERIMENT_B_FIELD),
            larmor_frequency(CONSTANTS.gyro_si29, EXPERIMENT_B_FIELD),
        ),
        ModelKind::T1Decay => exponential_guess(x, y),
        ModelKind::Rabi => {
            let f = dominant_frequency(x, y).ok_or_else(|| failed(name, "too few samples per period"))?;
            let w = 2.0 * PI * f;
            let cols = vec![x.iter().map(|t| (w * t).cos()).collect(), vec![1.0; x.len()]];
            let (c, _) = lstsq(&cols, y).ok_or_else(|| failed(name, "singular basis"))?;
            Ok(vec![c[0], w, c[1]])
        }
        ModelKind::Debye => {
            let tmax = x[x.len() - 1].max(1.0);
            let (curv, c) = grid_search(
                logspace(1e-2 / (tmax * tmax), 1e2 / (tmax * tmax), 161),
                |g| vec![vec![1.0; x.len()], x.iter().map(|t| (-g * t * t).exp()).collect()],
                y,
            )
            .ok_or_else(|| failed(name, "no separable solution"))?;
            Ok(vec![c[0], c[1], curv])
        }
        ModelKind::Varshni => {
            let (beta, c) = grid_search(
                logspace(1.0, 1e6, 241),
                |b| vec![vec![1.0; x.len()], x.iter().map(|t| -t * t / (b + t)).collect()],
                y,
            )
            .ok_or_else(|| failed(name, "no separable solution"))?;
            Ok(vec![c[0], c[1], beta])
        }
        ModelKind::Poly5 => {
            let cols: Vec<Vec<f64>> = (0..6).map(|n| x.iter().map(|t| t.powi(n)).collect()).collect();
            lstsq(&cols, y).map(|(c, _)| c).ok_or_else(|| failed(name, "singular design matrix"))
        }
        ModelKind::T1Linear => {
            let cols = vec![x.to_vec(), vec![1.0; x.len()]];
            lstsq(&cols, y).map(|(c, _)| c).ok_or_else(|| failed(name, "singular design matrix"))
        }
        ModelKind::T1Raman { dimension_d } => {
            let s = raman_exponent(*dimension_d).map_err(|e| failed(name, &e.to_string()))?;
            let cols: Vec<Vec<f64>> = (0..3).map(|k| x.iter().map(|t| t.powi(s + k)).collect()).collect();
            lstsq(&cols, y).map(|(c, _)| c).ok_or_else(|| failed(name, "singular design matrix"))
        }
        ModelKind::T1CothOrbach => {
            let tmin = x[0].max(1e-3);
            let tmax = x[x.len() - 1];
            let e1 = 0.5 * tmin;
            let (e2, c) = grid_search(
                logspace(0.5 * tmax, 50.0 * tmax, 81),
                |e2| {
                    vec![
                        x.iter().map(|t| 1.0 / (e1 / t).tanh()).collect(),
                        x.iter().map(|t| 1.0 / (e2 / t).exp_m1()).collect(),
                        vec![1.0; x.len()],
                    ]
                },
                y,
            )
            .ok_or_else(|| failed(name, "no separable solution"))?;
            Ok(vec![c[0].max(0.0), e1, c[1].max(0.0), e2, c[2]])
        }
    }
}

fn lorentzian2_guess(x: &[f64], y: &[f64]) -> Result<Vec<f64>, GuessError> {
    let offset = median(y);
    let mut resid: Vec<f64> = y.iter().map(|v| v - offset).collect();
    let mut peaks = Vec::with_capacity(2);
    for _ in 0..2 {
        let (i, &dev) = resid
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .expect("non-empty");
        if dev == 0.0 {
            return Err(failed("lorentzian2", "could not locate two lines"));
        }
        let half = 0.5 * dev.abs();
        let crossing = |range: Box<dyn Iterator<Item = usize>>| {
            let mut prev = i;
            for j in range {
                if resid[j].abs() < half || resid[j].signum() != dev.signum() {
                    let (a, b) = (resid[prev].abs(), resid[j].abs());
                    let frac = if a != b { (a - half) / (a - b) } else { 0.5 };
                    return Some(x[prev] + frac * (x[j] - x[prev]));
                }
                prev = j;
            }
            None
        };
        let left = crossing(Box::new((0..i).rev()));
        let right = crossing(Box::new(i + 1..x.len()));
        let fwhm = match (left, right) {
            (Some(l), Some(r)) => r - l,
            (Some(l), None) => 2.0 * (x[i] - l),
            (None, Some(r)) => 2.0 * (r - x[i]),
            (None, None) => 0.1 * (x[x.len() - 1] - x[0]),
        }
        .max(f64::EPSILON * x[i].abs().max(1.0));
        let peak = [x[i], fwhm, dev];
        for (k, r) in resid.iter_mut().enumerate() {
            *r -= ModelKind::Lorentzian2.eval(x[k], &[peak[0], peak[1], peak[2], 0.0, 1.0, 0.0, 0.0]);
        }
        peaks.push(peak);
    }
    peaks.sort_by(|a, b| a[0].total_cmp(&b[0]));
    Ok(vec![peaks[0][0], peaks[0][1], peaks[0][2], peaks[1][0], peaks[1][1], peaks[1][2], offset])
}

/// Envelope samples: max |y − base| in consecutive windows of `width`.
fn window_envelope(x: &[f64], y: &[f64], base: f64, width: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut start = 0;
    while start < x.len() {
        let mut end = start;
        while end < x.len() && x[end] < x[start] + width {
            end += 1;
        }
        let (k, amp) = (start..end)
            .map(|k| (k, (y[k] - base).abs()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("non-empty window");
        out.push((x[k], amp));
        start = end.max(start + 1);
    }
    out
}

fn ramsey_guess(x: &[f64], y: &[f64]) -> Result<Vec<f64>, GuessError> {
    let freq = dominant_frequency(x, y).ok_or_else(|| failed("ramsey", "fewer than two periods sampled"))?;
    let base = mean(y);
    let span = x[x.len() - 1] - x[0];

    let env = window_envelope(x, y, base, 1.0 / freq);
    let peak_amp = env.iter().map(|e| e.1).fold(0.0, f64::max);
    let pts: Vec<(f64, f64)> = env.iter().filter(|e| e.1 > 0.1 * peak_amp).map(|&(t, a)| (t * t, a.ln())).collect();
    let mut t2_star = 0.5 * span;
    if pts.len() >= 2 {
        let cols = vec![pts.iter().map(|p| p.0).collect(), vec![1.0; pts.len()]];
        let ly: Vec<f64> = pts.iter().map(|p| p.1).collect();
        if let Some((c, _)) = lstsq(&cols, &ly) {
            if c[0] < 0.0 {
                t2_star = (-1.0 / c[0]).sqrt();
            }
        }
    }

    let w = 2.0 * PI * freq;
    let envelope = |t: f64| (-(t / t2_star).powi(2)).exp();
    let cols = vec![
        x.iter().map(|&t| envelope(t) * (w * t).cos()).collect(),
        x.iter().map(|&t| envelope(t) * (w * t).sin()).collect(),
        vec![1.0; x.len()],
    ];
    let (c, _) = lstsq(&cols, y).ok_or_else(|| failed("ramsey", "singular basis"))?;
    // A cos + B sin = a cos(wt + φ) with a = √(A² + B²), φ = atan2(−B, A).
    let a = c[0].hypot(c[1]);
    let phi = (-c[1]).atan2(c[0]);
    Ok(vec![a, t2_star, freq, phi, c[2]])
}

/// ESEEM starting point with known Larmor frequencies `f1`, `f2`: grid over
/// `(T2, b, c)` with `(a, d)` solved linearly.
pub fn eseem_guess(data: &SignalTrace, f1: f64, f2: f64) -> Result<Vec<f64>, GuessError> {
    check_structure("eseem", data, 8)?;
    let (x, y) = (data.x(), data.y());
    let span = x[x.len() - 1] - x[0];
    let depths = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0];
    let mut best: Option<(f64, [f64; 3], Vec<f64>)> = None;
    for t2 in logspace(span / 50.0, span * 5.0, 41) {
        for &b in &depths {
            for &c in &depths {
                let cols = vec![
                    x.iter()
                        .map(|&t| {
                            let s1 = (PI * f1 * t).sin();
                            let s2 = (PI * f2 * t).sin();
                            (-t / t2).exp() * (1.0 - b * s1 * s1) * (1.0 - c * s2 * s2)
                        })
                        .collect(),
                    vec![1.0; x.len()],
                ];
                if let Some((coef, ssr)) = lstsq(&cols, y) {
                    if best.as_ref().is_none_or(|bst| ssr < bst.0) {
                        best = Some((ssr, [t2, b, c], coef));
                    }
                }
            }
        }
    }
    let (_, [t2, b, c], coef) = best.ok_or_else(|| failed("eseem", "no separable solution"))?;
    Ok(vec![coef[0], t2, b, c, f1, f2, coef[1]])
}

fn exponential_guess(x: &[f64], y: &[f64]) -> Result<Vec<f64>, GuessError> {
    let n = x.len();
    let tail_n = (n / 10).max(1);
    let tail = mean(&y[n - tail_n..]);
    let head = y[0] - tail;
    if head == 0.0 {
        return Err(failed("t1", "no decay visible above the tail"));
    }
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(_, v)| (*v - tail) / head > 0.05)
        .map(|(&t, &v)| (t, ((v - tail) / head).ln()))
        .collect();
    let span = x[n - 1] - x[0];
    let mut t1 = span / 3.0;
    if pts.len() >= 2 {
        let cols = vec![pts.iter().map(|p| p.0).collect(), vec![1.0; pts.len()]];
        let ly: Vec<f64> = pts.iter().map(|p| p.1).collect();
        if let Some((c, _)) = lstsq(&cols, &ly) {
            if c[0] < 0.0 {
                t1 = -1.0 / c[0];
            }
        }
    }
    // The tail estimate is biased when the trace has not fully decayed;
    // refine T1 with (a, b) solved linearly.
    let (t1, c) = grid_search(
        logspace(t1 / 5.0, t1 * 5.0, 161),
        |tau| vec![x.iter().map(|t| (-t / tau).exp()).collect(), vec![1.0; n]],
        y,
    )
    .ok_or_else(|| failed("t1", "no separable solution"))?;
    Ok(vec![c[0], t1, c[1]])
}
