//! Flat `key = value` experiment configuration.
//!
//! One assignment per line; blank lines and lines starting with `#` are
//! ignored. Every key is optional and listed in [`CONFIG_KEYS`].

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use super::csv_io::format_number;
use super::{PipelineError, Result};
use crate::constants::{CONSTANTS, EXPERIMENT_B_FIELD, RAMSEY_DETUNING_MHZ};
use crate::par::Execution;
use crate::signals::larmor_frequency;
use crate::spin_model::{transition_frequencies, SpinSystemParams};
use crate::temperature::{evaluate_d, DebyeDParams, PolynomialDParams, VarshniDParams, ZfsModel};

/// `(key, description)` for every recognised configuration key.
pub const CONFIG_KEYS: &[(&str, &str)] = &[
    ("experiment", "ramsey | echo | rabi | odmr | t1 (default ramsey)"),
    ("d_mhz", "zero-field splitting D, MHz (default 1365; exclusive with temperature_k)"),
    ("temperature_k", "derive D from a temperature model at this temperature, K"),
    ("zfs_model", "debye | varshni | poly5, used with temperature_k (default debye)"),
    ("sample", "a | b, coefficient set for zfs_model (default a)"),
    ("e_mhz", "transverse splitting E, MHz (default 0)"),
    ("g_factor", "electron g factor (default 2)"),
    ("b_tesla", "axial magnetic field, T (default 0.018)"),
    ("grid_start", "first grid point: µs for time traces, MHz for odmr"),
    ("grid_stop", "last grid point"),
    ("grid_points", "number of grid points (at least 2)"),
    ("detuning_mhz", "microwave detuning δ for ramsey and rabi, MHz (ramsey default 10, rabi default 0)"),
    ("rabi_rad_per_us", "drive Rabi frequency Ω_R, rad/µs (rabi default 2π·5; pulsed sequences default 1e5)"),
    ("t2_star_us", "quasi-static dephasing time T2*, µs (default none)"),
    ("t2_us", "pure dephasing time, µs (default none)"),
    ("t1_us", "depolarisation time T1, µs (t1 default 567; otherwise none)"),
    ("eseem_b", "13C modulation depth for echo, in [0, 1] (default 0)"),
    ("eseem_c", "29Si modulation depth for echo, in [0, 1] (default 0)"),
    ("eseem_f1_mhz", "13C Larmor frequency, MHz (default from b_tesla)"),
    ("eseem_f2_mhz", "29Si Larmor frequency, MHz (default from b_tesla)"),
    ("linewidth_mhz", "odmr Lorentzian FWHM, MHz (default 4)"),
    ("contrast1", "odmr dip depth at ω1 (default 0.1)"),
    ("contrast2", "odmr dip depth at ω2 (default 0.1)"),
    ("contrast", "t1 signal amplitude (default 1)"),
    ("offset", "t1 signal offset (default 0)"),
    ("readout_sigma", "additive Gaussian noise on each point (default 0)"),
    ("mc_shots", "Monte-Carlo shots per point (default 100000)"),
    ("seed", "RNG seed (default 0)"),
    ("execution", "parallel | sequential (default parallel)"),
    ("output", "output CSV path"),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Ramsey,
    Echo,
    Rabi,
    Odmr,
    T1,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Ramsey => "ramsey",
            ExperimentKind::Echo => "echo",
            ExperimentKind::Rabi => "rabi",
            ExperimentKind::Odmr => "odmr",
            ExperimentKind::T1 => "t1",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        crate::trace::linspace(self.start, self.stop, self.points)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ZfsSource {
    Fixed(f64),
    Temperature { kelvin: f64, model: ZfsModel, sample: char },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub zfs: ZfsSource,
    pub e_mhz: f64,
    pub g_factor: f64,
    pub b_tesla: f64,
    pub grid: Grid,
    pub detuning_mhz: f64,
    pub rabi_rad_per_us: f64,
    pub t2_star_us: Option<f64>,
    pub t2_us: Option<f64>,
    pub t1_us: Option<f64>,
    pub eseem_b: f64,
    pub eseem_c: f64,
    pub eseem_f1_mhz: f64,
    pub eseem_f2_mhz: f64,
    pub linewidth_mhz: f64,
    pub contrasts: (f64, f64),
    pub contrast: f64,
    pub offset: f64,
    pub readout_sigma: f64,
    pub mc_shots: usize,
    pub seed: u64,
    pub execution: Execution,
    pub output: Option<PathBuf>,
}

fn config_error(line: usize, key: &str, message: impl Into<String>) -> PipelineError {
    PipelineError::Config { line, key: key.to_string(), message: message.into() }
}

struct Entry {
    line: usize,
    key: String,
    value: String,
}

struct Entries(Vec<Entry>);

impl Entries {
    fn get(&self, key: &str) -> Option<&Entry> {
        self.0.iter().find(|e| e.key == key)
    }

    fn line_of(&self, key: &str) -> usize {
        self.get(key).map_or(0, |e| e.line)
    }

    fn f64(&self, key: &str) -> Result<Option<f64>> {
        self.get(key)
            .map(|e| {
                e.value
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| config_error(e.line, key, format!("`{}` is not a finite number", e.value)))
            })
            .transpose()
    }

    fn u64(&self, key: &str) -> Result<Option<u64>> {
        self.get(key)
            .map(|e| {
                e.value
                    .parse::<u64>()
                    .map_err(|_| config_error(e.line, key, format!("`{}` is not a non-negative integer", e.value)))
            })
            .transpose()
    }

    fn positive(&self, key: &str) -> Result<Option<f64>> {
        match self.f64(key)? {
            Some(v) if v <= 0.0 => Err(config_error(self.line_of(key), key, "must be positive")),
            v => Ok(v),
        }
    }

    fn non_negative(&self, key: &str, default: f64) -> Result<f64> {
        match self.f64(key)? {
            Some(v) if v < 0.0 => Err(config_error(self.line_of(key), key, "must be non-negative")),
            v => Ok(v.unwrap_or(default)),
        }
    }

    fn unit_interval(&self, key: &str) -> Result<f64> {
        match self.f64(key)? {
            Some(v) if !(0.0..=1.0).contains(&v) => Err(config_error(self.line_of(key), key, "must lie in [0, 1]")),
            v => Ok(v.unwrap_or(0.0)),
        }
    }

    fn choice<T: Copy>(&self, key: &str, options: &[(&str, T)], default: T) -> Result<T> {
        match self.get(key) {
            None => Ok(default),
            Some(e) => options.iter().find(|(n, _)| *n == e.value).map(|(_, v)| *v).ok_or_else(|| {
                let names: Vec<&str> = options.iter().map(|o| o.0).collect();
                config_error(e.line, key, format!("`{}` is not one of {}", e.value, names.join(" | ")))
            }),
        }
    }
}

impl ExperimentConfig {
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| PipelineError::io(path, e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let (key, value) = trimmed
                .split_once('=')
                .ok_or_else(|| config_error(line, trimmed, "expected `key = value`"))?;
            let (key, value) = (key.trim(), value.trim());
            if !CONFIG_KEYS.iter().any(|(k, _)| *k == key) {
                return Err(config_error(line, key, "unknown key"));
            }
            if entries.iter().any(|e: &Entry| e.key == key) {
                return Err(config_error(line, key, "duplicate key"));
            }
            entries.push(Entry { line, key: key.to_string(), value: value.to_string() });
        }
        Self::from_entries(&Entries(entries))
    }

    fn from_entries(e: &Entries) -> Result<Self> {
        use ExperimentKind::*;
        let kind = e.choice(
            "experiment",
            &[("ramsey", Ramsey), ("echo", Echo), ("rabi", Rabi), ("odmr", Odmr), ("t1", T1)],
            Ramsey,
        )?;

        let zfs = match (e.positive("d_mhz")?, e.f64("temperature_k")?) {
            (Some(_), Some(_)) => {
                return Err(config_error(e.line_of("temperature_k"), "temperature_k", "cannot be combined with d_mhz"))
            }
            (Some(d), None) => ZfsSource::Fixed(d),
            (None, None) => ZfsSource::Fixed(1365.0),
            (None, Some(t)) => {
                if !(0.0..=400.0).contains(&t) {
                    return Err(config_error(e.line_of("temperature_k"), "temperature_k", "must lie in [0, 400] K"));
                }
                let sample = e.choice("sample", &[("a", 'a'), ("b", 'b')], 'a')?;
                let model = match e.choice("zfs_model", &[("debye", 0), ("varshni", 1), ("poly5", 2)], 0)? {
                    0 => ZfsModel::from(if sample == 'a' { DebyeDParams::SAMPLE_A } else { DebyeDParams::SAMPLE_B }),
                    1 => ZfsModel::from(if sample == 'a' { VarshniDParams::SAMPLE_A } else { VarshniDParams::SAMPLE_B }),
                    _ => ZfsModel::from(if sample == 'a' {
                        PolynomialDParams::SAMPLE_A
                    } else {
                        PolynomialDParams::SAMPLE_B
                    }),
                };
                ZfsSource::Temperature { kelvin: t, model, sample }
            }
        };
        if matches!(zfs, ZfsSource::Fixed(_)) {
            for key in ["zfs_model", "sample"] {
                if e.get(key).is_some() {
                    return Err(config_error(e.line_of(key), key, "only meaningful with temperature_k"));
                }
            }
        }

        let b_tesla = e.non_negative("b_tesla", EXPERIMENT_B_FIELD)?;
        let mut cfg = ExperimentConfig {
            kind,
            zfs,
            e_mhz: e.non_negative("e_mhz", 0.0)?,
            g_factor: e.positive("g_factor")?.unwrap_or(2.0),
            b_tesla,
            grid: Grid { start: 0.0, stop: 1.0, points: 2 },
            detuning_mhz: e.f64("detuning_mhz")?.unwrap_or(if kind == Ramsey { RAMSEY_DETUNING_MHZ } else { 0.0 }),
            rabi_rad_per_us: e.positive("rabi_rad_per_us")?.unwrap_or(if kind == Rabi { 2.0 * PI * 5.0 } else { 1.0e5 }),
            t2_star_us: e.positive("t2_star_us")?,
            t2_us: e.positive("t2_us")?,
            t1_us: e.positive("t1_us")?.or((kind == T1).then_some(567.0)),
            eseem_b: e.unit_interval("eseem_b")?,
            eseem_c: e.unit_interval("eseem_c")?,
            eseem_f1_mhz: e.non_negative("eseem_f1_mhz", larmor_frequency(CONSTANTS.gyro_c13, b_tesla))?,
            eseem_f2_mhz: e.non_negative("eseem_f2_mhz", larmor_frequency(CONSTANTS.gyro_si29, b_tesla))?,
            linewidth_mhz: e.positive("linewidth_mhz")?.unwrap_or(4.0),
            contrasts: (e.non_negative("contrast1", 0.1)?, e.non_negative("contrast2", 0.1)?),
            contrast: e.f64("contrast")?.unwrap_or(1.0),
            offset: e.f64("offset")?.unwrap_or(0.0),
            readout_sigma: e.non_negative("readout_sigma", 0.0)?,
            mc_shots: e.u64("mc_shots")?.map_or(100_000, |v| v as usize),
            seed: e.u64("seed")?.unwrap_or(0),
            execution: e.choice(
                "execution",
                &[("parallel", Execution::Parallel), ("sequential", Execution::Sequential)],
                Execution::Parallel,
            )?,
            output: e.get("output").map(|o| PathBuf::from(&o.value)),
        };
        if cfg.mc_shots == 0 {
            return Err(config_error(e.line_of("mc_shots"), "mc_shots", "must be at least 1"));
        }

        let spin = cfg.spin().map_err(|err| config_error(0, "d_mhz", err.to_string()))?;
        let default_grid = match kind {
            Ramsey => Grid { start: 0.0, stop: 2.0, points: 401 },
            Echo => Grid { start: 0.0, stop: 100.0, points: 401 },
            Rabi => Grid { start: 0.0, stop: 1.0, points: 201 },
            T1 => Grid { start: 0.0, stop: 3000.0, points: 100 },
            Odmr => {
                let (w1, w2) = transition_frequencies(&spin);
                Grid { start: (w1 - 20.0).max(0.0), stop: w2 + 20.0, points: 4001 }
            }
        };
        let points = match e.u64("grid_points")? {
            Some(n) if n < 2 => return Err(config_error(e.line_of("grid_points"), "grid_points", "must be at least 2")),
            Some(n) => n as usize,
            None => default_grid.points,
        };
        cfg.grid = Grid {
            start: e.f64("grid_start")?.unwrap_or(default_grid.start),
            stop: e.f64("grid_stop")?.unwrap_or(default_grid.stop),
            points,
        };
        if !(cfg.grid.stop > cfg.grid.start) {
            return Err(config_error(e.line_of("grid_stop"), "grid_stop", "must exceed grid_start"));
        }
        if cfg.grid.start < 0.0 {
            return Err(config_error(e.line_of("grid_start"), "grid_start", "must be non-negative"));
        }
        Ok(cfg)
    }

    pub fn d_mhz(&self) -> f64 {
        match self.zfs {
            ZfsSource::Fixed(d) => d,
            ZfsSource::Temperature { kelvin, model, .. } => evaluate_d(model, kelvin).expect("validated temperature"),
        }
    }

    pub fn spin(&self) -> std::result::Result<SpinSystemParams, crate::spin_model::SpinModelError> {
        SpinSystemParams::new(self.d_mhz(), self.e_mhz, self.g_factor, self.b_tesla)
    }

    /// Every resolved setting, for provenance headers.
    pub fn provenance(&self) -> Vec<(String, String)> {
        let opt = |v: Option<f64>| v.map_or_else(|| "none".to_string(), format_number);
        let mut out: Vec<(String, String)> = vec![("experiment".into(), self.kind.name().into())];
        match self.zfs {
            ZfsSource::Fixed(d) => out.push(("d_mhz".into(), format_number(d))),
            ZfsSource::Temperature { kelvin, model, sample } => {
                out.push(("temperature_k".into(), format_number(kelvin)));
                out.push(("zfs_model".into(), model.name().into()));
                out.push(("sample".into(), sample.to_string()));
                out.push(("d_mhz".into(), format_number(self.d_mhz())));
            }
        }
        let nums = [
            ("e_mhz", self.e_mhz),
            ("g_factor", self.g_factor),
            ("b_tesla", self.b_tesla),
            ("grid_start", self.grid.start),
            ("grid_stop", self.grid.stop),
        ];
        out.extend(nums.iter().map(|(k, v)| (k.to_string(), format_number(*v))));
        out.push(("grid_points".into(), self.grid.points.to_string()));
        let nums = [
            ("detuning_mhz", self.detuning_mhz),
            ("rabi_rad_per_us", self.rabi_rad_per_us),
        ];
        out.extend(nums.iter().map(|(k, v)| (k.to_string(), format_number(*v))));
        out.push(("t2_star_us".into(), opt(self.t2_star_us)));
        out.push(("t2_us".into(), opt(self.t2_us)));
        out.push(("t1_us".into(), opt(self.t1_us)));
        let nums = [
            ("eseem_b", self.eseem_b),
            ("eseem_c", self.eseem_c),
            ("eseem_f1_mhz", self.eseem_f1_mhz),
            ("eseem_f2_mhz", self.eseem_f2_mhz),
            ("linewidth_mhz", self.linewidth_mhz),
            ("contrast1", self.contrasts.0),
            ("contrast2", self.contrasts.1),
            ("contrast", self.contrast),
            ("offset", self.offset),
            ("readout_sigma", self.readout_sigma),
        ];
        out.extend(nums.iter().map(|(k, v)| (k.to_string(), format_number(*v))));
        out.push(("mc_shots".into(), self.mc_shots.to_string()));
        out.push(("seed".into(), self.seed.to_string()));
        out
    }
}
