//! Spin-1 operator algebra and the ground-state Hamiltonian.
//!
//! All matrices use the basis ordering `{|+1⟩, |0⟩, |−1⟩}` (index 0, 1, 2)
//! and are expressed in MHz. The static field is taken along the defect
//! symmetry axis, so the Zeeman term is `g·(μB/h)·B·Sz`.
//!
//! The Zeeman frequency entering the closed-form transitions is an ordinary
//! frequency, `g·(μB/h)·B`, compared directly against `E` in MHz.

use nalgebra::{Matrix3, SymmetricEigen};
use num_complex::Complex64;
use thiserror::Error;

use crate::constants::CONSTANTS;

pub type CMatrix3 = Matrix3<Complex64>;

/// Index of `|+1⟩` in the fixed basis.
pub const PLUS_ONE: usize = 0;
/// Index of `|0⟩` in the fixed basis.
pub const ZERO: usize = 1;
/// Index of `|−1⟩` in the fixed basis.
pub const MINUS_ONE: usize = 2;

#[derive(Debug, Error, PartialEq)]
pub enum SpinModelError {
    #[error("invalid spin parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("resonances out of order: ω1 = {omega1} MHz > ω2 = {omega2} MHz (swapped?)")]
    SwappedResonances { omega1: f64, omega2: f64 },
}

/// Physical parameters of the ground-state Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinSystemParams {
    d_zfs: f64,
    e_zfs: f64,
    g_factor: f64,
    b_field: f64,
}

impl SpinSystemParams {
    /// `d_zfs`, `e_zfs` in MHz, `b_field` in tesla.
    pub fn new(d_zfs: f64, e_zfs: f64, g_factor: f64, b_field: f64) -> Result<Self, SpinModelError> {
        let check = |name, value: f64, ok: bool, reason| {
            if ok && value.is_finite() {
                Ok(())
            } else {
                Err(SpinModelError::InvalidParameter { name, value, reason })
            }
        };
        check("d_zfs", d_zfs, d_zfs > 0.0, "must be positive")?;
        check("e_zfs", e_zfs, e_zfs >= 0.0, "must be non-negative")?;
        check("g_factor", g_factor, g_factor > 0.0, "must be positive")?;
        check("b_field", b_field, b_field >= 0.0, "must be non-negative")?;
        Ok(Self { d_zfs, e_zfs, g_factor, b_field })
    }

    /// PL6-like defaults: D = 1365 MHz, E = 0, g = 2 at the given field.
    pub fn pl6(b_field: f64) -> Result<Self, SpinModelError> {
        Self::new(1365.0, 0.0, 2.0, b_field)
    }

    pub fn d_zfs(&self) -> f64 {
        self.d_zfs
    }

    pub fn e_zfs(&self) -> f64 {
        self.e_zfs
    }

    pub fn g_factor(&self) -> f64 {
        self.g_factor
    }

    pub fn b_field(&self) -> f64 {
        self.b_field
    }

    pub fn with_d_zfs(self, d_zfs: f64) -> Result<Self, SpinModelError> {
        Self::new(d_zfs, self.e_zfs, self.g_factor, self.b_field)
    }

    /// Electron Zeeman frequency `g·(μB/h)·B` in MHz.
    pub fn zeeman_mhz(&self) -> f64 {
        self.g_factor * CONSTANTS.bohr_magneton_over_h * self.b_field
    }

    /// Human-readable notes for parameters outside the usual regime.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.e_zfs > 0.1 * self.d_zfs {
            out.push(format!(
                "E = {} MHz is not small compared with D = {} MHz",
                self.e_zfs, self.d_zfs
            ));
        }
        if self.zeeman_mhz() > self.d_zfs {
            out.push(format!(
                "Zeeman frequency {:.3} MHz exceeds D; ω1 is past the level crossing and negative",
                self.zeeman_mhz()
            ));
        }
        out
    }
}

/// Spin-1 angular momentum matrices in the `{|+1⟩, |0⟩, |−1⟩}` basis.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinOperators {
    pub sx: CMatrix3,
    pub sy: CMatrix3,
    pub sz: CMatrix3,
}

pub fn spin1_operators() -> SpinOperators {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let re = |x: f64| Complex64::new(x, 0.0);
    let im = |x: f64| Complex64::new(0.0, x);
    let z = Complex64::new(0.0, 0.0);

    let sx = CMatrix3::new(z, re(r), z, re(r), z, re(r), z, re(r), z);
    let sy = CMatrix3::new(z, im(-r), z, im(r), z, im(-r), z, im(r), z);
    let sz = CMatrix3::new(re(1.0), z, z, z, z, z, z, z, re(-1.0));
    SpinOperators { sx, sy, sz }
}

/// `H = D(Sz² − ⅔·I) + E(Sx² − Sy²) + g·(μB/h)·B·Sz`, in MHz.
pub fn build_hamiltonian(p: &SpinSystemParams) -> CMatrix3 {
    let ops = spin1_operators();
    let identity = CMatrix3::identity();
    let sz2 = ops.sz * ops.sz;
    let sx2 = ops.sx * ops.sx;
    let sy2 = ops.sy * ops.sy;
    let c = |x: f64| Complex64::new(x, 0.0);

    (sz2 - identity * c(2.0 / 3.0)) * c(p.d_zfs)
        + (sx2 - sy2) * c(p.e_zfs)
        + ops.sz * c(p.zeeman_mhz())
}

/// Closed-form transition frequencies `(ω1, ω2)` in MHz with `ω1 ≤ ω2`.
///
/// `ω1 = D − √(Z² + E²)` and `ω2 = D + √(Z² + E²)`, `Z = g·(μB/h)·B`.
/// Past the level crossing (`Z > D`) `ω1` is negative.
pub fn transition_frequencies(p: &SpinSystemParams) -> (f64, f64) {
    let split = p.zeeman_mhz().hypot(p.e_zfs);
    (p.d_zfs - split, p.d_zfs + split)
}

/// Transition frequencies from exact diagonalisation of [`build_hamiltonian`].
///
/// The `|0⟩`-like eigenstate is the one with the largest `|0⟩` weight; the
/// two returned values are the other eigenvalues minus its energy, sorted.
pub fn eigen_transition_frequencies(p: &SpinSystemParams) -> (f64, f64) {
    let eig = SymmetricEigen::new(build_hamiltonian(p));
    let zero_idx = (0..3)
        .max_by(|&a, &b| {
            let wa = eig.eigenvectors[(ZERO, a)].norm_sqr();
            let wb = eig.eigenvectors[(ZERO, b)].norm_sqr();
            wa.total_cmp(&wb)
        })
        .expect("three eigenvectors");
    let e0 = eig.eigenvalues[zero_idx];
    let mut others: Vec<f64> = (0..3)
        .filter(|&i| i != zero_idx)
        .map(|i| eig.eigenvalues[i] - e0)
        .collect();
    others.sort_by(f64::total_cmp);
    (others[0], others[1])
}

/// `D = (ω1 + ω2)/2`.
pub fn zfs_from_resonances(omega1: f64, omega2: f64) -> Result<f64, SpinModelError> {
    if !(omega1.is_finite() && omega2.is_finite()) {
        return Err(SpinModelError::InvalidParameter {
            name: "omega",
            value: if omega1.is_finite() { omega2 } else { omega1 },
            reason: "must be finite",
        });
    }
    if omega1 > omega2 {
        return Err(SpinModelError::SwappedResonances { omega1, omega2 });
    }
    Ok(0.5 * (omega1 + omega2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn max_abs(m: &CMatrix3) -> f64 {
        m.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn sz_is_diagonal() {
        let ops = spin1_operators();
        for i in 0..3 {
            for j in 0..3 {
                let expected = if i == j { [1.0, 0.0, -1.0][i] } else { 0.0 };
                assert_eq!(ops.sz[(i, j)], Complex64::new(expected, 0.0));
            }
        }
    }

    #[test]
    fn commutation_relations() {
        let SpinOperators { sx, sy, sz } = spin1_operators();
        let i = Complex64::new(0.0, 1.0);
        assert!(max_abs(&(sx * sy - sy * sx - sz * i)) < 1e-12);
        assert!(max_abs(&(sy * sz - sz * sy - sx * i)) < 1e-12);
        assert!(max_abs(&(sz * sx - sx * sz - sy * i)) < 1e-12);
    }

    #[test]
    fn casimir_and_hermiticity() {
        let SpinOperators { sx, sy, sz } = spin1_operators();
        let casimir = sx * sx + sy * sy + sz * sz;
        assert!(max_abs(&(casimir - CMatrix3::identity() * Complex64::new(2.0, 0.0))) < 1e-12);
        for op in [sx, sy, sz] {
            assert!(max_abs(&(op - op.adjoint())) < 1e-12);
        }
    }

    #[test]
    fn zero_field_eigenvalues() {
        let p = SpinSystemParams::new(1365.0, 0.0, 2.0, 0.0).unwrap();
        let h = build_hamiltonian(&p);
        assert_relative_eq!(h[(0, 0)].re, 455.0, epsilon = 1e-9);
        assert_relative_eq!(h[(1, 1)].re, -910.0, epsilon = 1e-9);
        assert_relative_eq!(h[(2, 2)].re, 455.0, epsilon = 1e-9);
    }

    #[test]
    fn strain_splits_by_two_e() {
        let p = SpinSystemParams::new(1365.0, 5.0, 2.0, 0.0).unwrap();
        let (w1, w2) = eigen_transition_frequencies(&p);
        assert_relative_eq!(w1, 1360.0, epsilon = 1e-9);
        assert_relative_eq!(w2, 1370.0, epsilon = 1e-9);
        assert_eq!(transition_frequencies(&p), (1360.0, 1370.0));
    }

    #[test]
    fn zeeman_split_at_experiment_field() {
        let p = SpinSystemParams::new(1365.0, 0.0, 2.0, 0.018).unwrap();
        let (w1, w2) = transition_frequencies(&p);
        // 2 × 13996.2446 × 0.018 = 503.8648056
        assert_relative_eq!(w1, 1365.0 - 503.8648056, epsilon = 1e-7);
        assert_relative_eq!(w2, 1365.0 + 503.8648056, epsilon = 1e-7);
        assert!((w1 - 861.1).abs() < 0.05 && (w2 - 1868.9).abs() < 0.05);
        let (e1, e2) = eigen_transition_frequencies(&p);
        assert_relative_eq!(e1, w1, max_relative = 1e-9);
        assert_relative_eq!(e2, w2, max_relative = 1e-9);
    }

    #[test]
    fn degenerate_zero_field() {
        let p = SpinSystemParams::new(1365.0, 0.0, 2.0, 0.0).unwrap();
        assert_eq!(transition_frequencies(&p), (1365.0, 1365.0));
    }

    #[test]
    fn zfs_from_resonances_cases() {
        assert_eq!(zfs_from_resonances(1365.0, 1365.0).unwrap(), 1365.0);
        assert_eq!(zfs_from_resonances(1360.0, 1370.0).unwrap(), 1365.0);
        assert_relative_eq!(zfs_from_resonances(861.1, 1868.9).unwrap(), 1365.0, epsilon = 1e-9);
        assert!(matches!(
            zfs_from_resonances(1370.0, 1360.0),
            Err(SpinModelError::SwappedResonances { .. })
        ));
    }

    #[test]
    fn rejects_invalid_params() {
        assert!(SpinSystemParams::new(0.0, 0.0, 2.0, 0.0).is_err());
        assert!(SpinSystemParams::new(1365.0, -1.0, 2.0, 0.0).is_err());
        assert!(SpinSystemParams::new(1365.0, 0.0, 0.0, 0.0).is_err());
        assert!(SpinSystemParams::new(1365.0, 0.0, 2.0, -0.1).is_err());
        assert!(SpinSystemParams::new(f64::NAN, 0.0, 2.0, 0.0).is_err());
    }

    #[test]
    fn hamiltonian_hermitian_and_traceless_on_grid() {
        for d in [1300.0, 1350.0, 1400.0] {
            for e in [0.0, 10.0, 50.0] {
                for b in [0.0, 0.018, 0.05, 0.1] {
                    let p = SpinSystemParams::new(d, e, 2.0, b).unwrap();
                    let h = build_hamiltonian(&p);
                    assert!(max_abs(&(h - h.adjoint())) < 1e-12 * max_abs(&h));
                    assert!(h.trace().norm() < 1e-9);
                }
            }
        }
    }
}
