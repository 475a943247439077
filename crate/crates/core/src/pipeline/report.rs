use std::fmt::Write as _;
use std::time::{SystemTime, UNIX_EPOCH};

use sha2::{Digest, Sha256};

use super::csv_io::format_number;
use crate::fitting::FitResult;

/// Hex SHA-256 of the input bytes.
pub fn input_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// Seconds since the Unix epoch, or `SOURCE_DATE_EPOCH` when set.
pub(crate) fn generation_time() -> u64 {
    std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or_else(|| SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()))
}

/// A fit result with the context needed to reproduce it.
#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    pub model: String,
    pub input: String,
    pub input_sha256: String,
    pub generated_unix: u64,
    pub x_unit: String,
    pub y_unit: String,
    pub points: usize,
    pub result: FitResult,
    /// `(name, value, standard error)` for quantities computed from the parameters.
    pub derived: Vec<(String, f64, f64)>,
}

impl FitReport {
    pub fn derived(&self, name: &str) -> Option<f64> {
        self.derived.iter().find(|d| d.0 == name).map(|d| d.1)
    }

    /// Structured text: `key = value` lines, then CSV-style parameter tables.
    pub fn render(&self) -> String {
        let r = &self.result;
        let mut s = String::new();
        let _ = writeln!(s, "# sicspin fit report");
        let _ = writeln!(s, "model = {}", self.model);
        let _ = writeln!(s, "input = {}", self.input);
        let _ = writeln!(s, "input_sha256 = {}", self.input_sha256);
        let _ = writeln!(s, "generated_unix = {}", self.generated_unix);
        let _ = writeln!(s, "x_unit = {}", self.x_unit);
        let _ = writeln!(s, "y_unit = {}", self.y_unit);
        let _ = writeln!(s, "points = {}", self.points);
        let _ = writeln!(s, "converged = {}", r.converged);
        let _ = writeln!(s, "iterations = {}", r.iterations);
        let _ = writeln!(s, "accepted_steps = {}", r.accepted_steps);
        let _ = writeln!(s, "chi_squared = {}", format_number(r.chi_squared));
        let _ = writeln!(s, "r_squared = {}", format_number(r.r_squared));
        let _ = writeln!(s, "\n[parameters]\nname,value,std_error,fixed");
        for i in 0..r.parameters.len() {
            let _ = writeln!(
                s,
                "{},{},{},{}",
                r.param_names[i],
                format_number(r.parameters[i]),
                format_number(r.standard_errors[i]),
                r.fixed[i]
            );
        }
        if !self.derived.is_empty() {
            let _ = writeln!(s, "\n[derived]\nname,value,std_error");
            for (n, v, e) in &self.derived {
                let _ = writeln!(s, "{n},{},{}", format_number(*v), format_number(*e));
            }
        }
        let _ = writeln!(s, "\n[covariance]");
        for row in r.covariance.row_iter() {
            let cells: Vec<String> = row.iter().map(|v| format_number(*v)).collect();
            let _ = writeln!(s, "{}", cells.join(","));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_known_value() {
        assert_eq!(input_digest(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }
}
