//! Closed-form signal shapes.
//!
//! These are the fit models and the ground truth that the density-matrix
//! simulator is checked against. Times are in µs, frequencies in MHz,
//! signals in arbitrary ΔPL units (either sign).

use std::f64::consts::PI;

/// One Lorentzian line, parameterised by full width at half maximum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzianPeak {
    pub center: f64,
    pub fwhm: f64,
    pub amplitude: f64,
}

impl LorentzianPeak {
    pub fn eval(&self, f: f64) -> f64 {
        let hw2 = 0.25 * self.fwhm * self.fwhm;
        let df = f - self.center;
        self.amplitude * hw2 / (df * df + hw2)
    }
}

/// `offset + Σ amplitude·(fwhm/2)² / ((f − center)² + (fwhm/2)²)`.
pub fn lorentzian_spectrum(f: f64, peaks: &[LorentzianPeak], offset: f64) -> f64 {
    offset + peaks.iter().map(|p| p.eval(f)).sum::<f64>()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RamseyParams {
    pub a: f64,
    /// µs
    pub t2_star: f64,
    /// MHz
    pub delta: f64,
    /// rad
    pub phi: f64,
    pub b: f64,
}

/// `a·exp(−(τ/T2*)²)·cos(2πδτ + φ) + b`.
pub fn ramsey_signal(tau: f64, p: &RamseyParams) -> f64 {
    let r = tau / p.t2_star;
    p.a * (-r * r).exp() * (2.0 * PI * p.delta * tau + p.phi).cos() + p.b
}

/// Echo decay with two-nucleus envelope modulation.
///
/// `f1` is the ¹³C and `f2` the ²⁹Si Larmor frequency (`f1 > f2` at a fixed field).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EseemParams {
    pub a: f64,
    /// µs
    pub t2: f64,
    pub b_depth: f64,
    pub c_depth: f64,
    /// MHz
    pub f1: f64,
    /// MHz
    pub f2: f64,
    pub d_offset: f64,
}

impl EseemParams {
    /// `[1 − b·sin²(πf1τ)]·[1 − c·sin²(πf2τ)]`, in `[0, 1]` for depths in `[0, 1]`.
    pub fn modulation(&self, tau: f64) -> f64 {
        let s1 = (PI * self.f1 * tau).sin();
        let s2 = (PI * self.f2 * tau).sin();
        (1.0 - self.b_depth * s1 * s1) * (1.0 - self.c_depth * s2 * s2)
    }
}

/// `a·exp(−τ/T2)·[1 − b·sin²(πf1τ)]·[1 − c·sin²(πf2τ)] + d`.
pub fn eseem_signal(tau: f64, p: &EseemParams) -> f64 {
    p.a * (-tau / p.t2).exp() * p.modulation(tau) + p.d_offset
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct T1DecayParams {
    pub a: f64,
    /// µs
    pub t1: f64,
    pub b: f64,
}

/// `a·exp(−τ/T1) + b`.
pub fn t1_decay_signal(tau: f64, p: &T1DecayParams) -> f64 {
    p.a * (-tau / p.t1).exp() + p.b
}

/// `a·cos(Ω_R·t) + b`, `omega_r` in rad/µs.
pub fn rabi_signal(t: f64, omega_r: f64, a: f64, b: f64) -> f64 {
    a * (omega_r * t).cos() + b
}

/// Nuclear Larmor frequency `γ·B` in MHz.
pub fn larmor_frequency(gyro: f64, b_field: f64) -> f64 {
    gyro * b_field
}
