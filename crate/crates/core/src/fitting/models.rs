use std::fmt;
use std::str::FromStr;

use crate::signals::{self, EseemParams, LorentzianPeak, RamseyParams, T1DecayParams};
use crate::temperature::raman_exponent;

/// A parametric curve `y = f(x; p)`.
pub trait Model: Sync {
    fn name(&self) -> String;
    fn param_names(&self) -> Vec<&'static str>;
    fn eval(&self, x: f64, params: &[f64]) -> f64;

    fn n_params(&self) -> usize {
        self.param_names().len()
    }

    /// True when `eval` is linear in every parameter. The Jacobian is then
    /// built from the basis functions directly instead of finite differences.
    fn is_linear(&self) -> bool {
        false
    }
}

/// The closed-form models available to the fitter and the CLI.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelKind {
    /// Two Lorentzian lines plus a constant offset.
    Lorentzian2,
    Ramsey,
    Eseem,
    T1Decay,
    Rabi,
    Debye,
    Varshni,
    Poly5,
    T1Linear,
    T1Raman { dimension_d: u32 },
    T1CothOrbach,
}

impl ModelKind {
    pub const CLI_NAMES: [&'static str; 11] = [
        "lorentzian2",
        "ramsey",
        "eseem",
        "t1",
        "rabi",
        "debye",
        "varshni",
        "poly5",
        "t1-linear",
        "t1-raman",
        "t1-coth-orbach",
    ];

    pub fn cli_name(&self) -> &'static str {
        match self {
            ModelKind::Lorentzian2 => "lorentzian2",
            ModelKind::Ramsey => "ramsey",
            ModelKind::Eseem => "eseem",
            ModelKind::T1Decay => "t1",
            ModelKind::Rabi => "rabi",
            ModelKind::Debye => "debye",
            ModelKind::Varshni => "varshni",
            ModelKind::Poly5 => "poly5",
            ModelKind::T1Linear => "t1-linear",
            ModelKind::T1Raman { .. } => "t1-raman",
            ModelKind::T1CothOrbach => "t1-coth-orbach",
        }
    }

    /// Parameters held fixed unless the caller frees them.
    ///
    /// ESEEM Larmor frequencies are known from the field, so `f1`, `f2` are fixed.
    pub fn default_fixed(&self) -> Vec<bool> {
        let mut fixed = vec![false; self.n_params()];
        if let ModelKind::Eseem = self {
            fixed[4] = true;
            fixed[5] = true;
        }
        fixed
    }

    /// Physical bounds; infinite limits are unbounded.
    pub fn default_bounds(&self) -> Vec<(f64, f64)> {
        let free = (f64::NEG_INFINITY, f64::INFINITY);
        let positive = (0.0, f64::INFINITY);
        let unit = (0.0, 1.0);
        match self {
            ModelKind::Lorentzian2 => vec![free, positive, free, free, positive, free, free],
            ModelKind::Ramsey => vec![free, positive, free, free, free],
            ModelKind::Eseem => vec![free, positive, unit, unit, positive, positive, free],
            ModelKind::T1Decay => vec![free, positive, free],
            ModelKind::Rabi => vec![free, positive, free],
            ModelKind::Debye => vec![free, positive, positive],
            ModelKind::Varshni => vec![free, free, positive],
            ModelKind::Poly5 => vec![free; 6],
            ModelKind::T1Linear => vec![positive, free],
            ModelKind::T1Raman { .. } => vec![positive, positive, free],
            ModelKind::T1CothOrbach => vec![positive, positive, positive, positive, free],
        }
    }

    /// Abscissa and ordinate unit tags the model expects.
    pub fn units(&self) -> (&'static str, &'static str) {
        match self {
            ModelKind::Lorentzian2 => ("frequency_mhz", "delta_pl"),
            ModelKind::Ramsey | ModelKind::Eseem | ModelKind::T1Decay | ModelKind::Rabi => ("tau_us", "delta_pl"),
            ModelKind::Debye | ModelKind::Varshni | ModelKind::Poly5 => ("temperature_k", "d_mhz"),
            ModelKind::T1Linear | ModelKind::T1Raman { .. } | ModelKind::T1CothOrbach => {
                ("temperature_k", "rate_per_ms")
            }
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.cli_name())
    }
}

impl FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "lorentzian2" => ModelKind::Lorentzian2,
            "ramsey" => ModelKind::Ramsey,
            "eseem" => ModelKind::Eseem,
            "t1" => ModelKind::T1Decay,
            "rabi" => ModelKind::Rabi,
            "debye" => ModelKind::Debye,
            "varshni" => ModelKind::Varshni,
            "poly5" => ModelKind::Poly5,
            "t1-linear" => ModelKind::T1Linear,
            "t1-raman" => ModelKind::T1Raman { dimension_d: 2 },
            "t1-coth-orbach" => ModelKind::T1CothOrbach,
            other => return Err(format!("unknown model `{other}` (expected one of {})", Self::CLI_NAMES.join("|"))),
        })
    }
}

impl Model for ModelKind {
    fn name(&self) -> String {
        self.cli_name().to_string()
    }

    fn param_names(&self) -> Vec<&'static str> {
        match self {
            ModelKind::Lorentzian2 => vec!["center1", "fwhm1", "amplitude1", "center2", "fwhm2", "amplitude2", "offset"],
            ModelKind::Ramsey => vec!["a", "t2_star", "delta", "phi", "b"],
            ModelKind::Eseem => vec!["a", "t2", "b", "c", "f1", "f2", "d"],
            ModelKind::T1Decay => vec!["a", "t1", "b"],
            ModelKind::Rabi => vec!["a", "omega_r", "b"],
            ModelKind::Debye => vec!["d_floor", "amplitude", "curvature"],
            ModelKind::Varshni => vec!["d_zero", "alpha", "beta"],
            ModelKind::Poly5 => vec!["c0", "c1", "c2", "c3", "c4", "c5"],
            ModelKind::T1Linear => vec!["a_prime", "c_prime"],
            ModelKind::T1Raman { .. } => vec!["a", "b", "c"],
            ModelKind::T1CothOrbach => vec!["a", "e1_k", "b", "e2_k", "c"],
        }
    }

    fn eval(&self, x: f64, p: &[f64]) -> f64 {
        match self {
            ModelKind::Lorentzian2 => signals::lorentzian_spectrum(
                x,
                &[
                    LorentzianPeak { center: p[0], fwhm: p[1], amplitude: p[2] },
                    LorentzianPeak { center: p[3], fwhm: p[4], amplitude: p[5] },
                ],
                p[6],
            ),
            ModelKind::Ramsey => signals::ramsey_signal(
                x,
                &RamseyParams { a: p[0], t2_star: p[1], delta: p[2], phi: p[3], b: p[4] },
            ),
            ModelKind::Eseem => signals::eseem_signal(
                x,
                &EseemParams { a: p[0], t2: p[1], b_depth: p[2], c_depth: p[3], f1: p[4], f2: p[5], d_offset: p[6] },
            ),
            ModelKind::T1Decay => signals::t1_decay_signal(x, &T1DecayParams { a: p[0], t1: p[1], b: p[2] }),
            ModelKind::Rabi => signals::rabi_signal(x, p[1], p[0], p[2]),
            ModelKind::Debye => p[0] + p[1] * (-p[2] * x * x).exp(),
            ModelKind::Varshni => p[0] - p[1] * x * x / (p[2] + x),
            ModelKind::Poly5 => p.iter().rev().fold(0.0, |acc, c| acc * x + c),
            ModelKind::T1Linear => p[0] * x + p[1],
            ModelKind::T1Raman { dimension_d } => {
                let s = raman_exponent(*dimension_d).unwrap_or(3);
                x.powi(s) * (p[0] + x * (p[1] + x * p[2]))
            }
            ModelKind::T1CothOrbach => p[0] / (p[1] / x).tanh() + p[2] / (p[3] / x).exp_m1() + p[4],
        }
    }

    fn is_linear(&self) -> bool {
        matches!(self, ModelKind::Poly5 | ModelKind::T1Linear | ModelKind::T1Raman { .. })
    }
}
