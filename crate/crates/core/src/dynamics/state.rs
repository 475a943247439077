use nalgebra::{Matrix2, SymmetricEigen};
use num_complex::Complex64;

use super::{DynamicsError, Transition};
use crate::spin_model::{CMatrix3, ZERO};

pub const TRACE_TOLERANCE: f64 = 1e-9;
pub const HERMITICITY_TOLERANCE: f64 = 1e-10;
pub const POSITIVITY_TOLERANCE: f64 = 1e-10;

/// Density matrix of the spin-1 ground state in the `{|+1⟩, |0⟩, |−1⟩}` basis.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinState {
    pub rho: CMatrix3,
}

impl SpinState {
    /// Optically polarised `|0⟩⟨0|`.
    pub fn polarized() -> Self {
        let mut rho = CMatrix3::zeros();
        rho[(ZERO, ZERO)] = Complex64::new(1.0, 0.0);
        Self { rho }
    }

    /// State on the addressed two-level subspace with Bloch vector `(x, y, z)`,
    /// `z = P(|0⟩) − P(|m⟩)`. The spectator level is empty.
    pub fn from_bloch(bloch: [f64; 3], transition: Transition) -> Self {
        let (a, b) = transition.levels();
        let [x, y, z] = bloch;
        let mut rho = CMatrix3::zeros();
        rho[(a, a)] = Complex64::new(0.5 * (1.0 + z), 0.0);
        rho[(b, b)] = Complex64::new(0.5 * (1.0 - z), 0.0);
        rho[(a, b)] = Complex64::new(0.5 * x, -0.5 * y);
        rho[(b, a)] = Complex64::new(0.5 * x, 0.5 * y);
        Self { rho }
    }

    pub fn population(&self, level: usize) -> f64 {
        self.rho[(level, level)].re
    }

    /// `P(|0⟩) − P(|m⟩)` for the addressed transition.
    pub fn polarization(&self, transition: Transition) -> f64 {
        let (a, b) = transition.levels();
        self.population(a) - self.population(b)
    }

    pub fn bloch(&self, transition: Transition) -> [f64; 3] {
        let (a, b) = transition.levels();
        let c = self.rho[(a, b)];
        [2.0 * c.re, -2.0 * c.im, self.polarization(transition)]
    }

    pub fn check_valid(&self) -> Result<(), DynamicsError> {
        let trace = self.rho.trace();
        if (trace.re - 1.0).abs() > TRACE_TOLERANCE || trace.im.abs() > TRACE_TOLERANCE {
            return Err(DynamicsError::InvalidState(format!("trace {trace}")));
        }
        let herm = (self.rho - self.rho.adjoint()).iter().map(|c| c.norm()).fold(0.0, f64::max);
        if herm > HERMITICITY_TOLERANCE {
            return Err(DynamicsError::InvalidState(format!("hermiticity defect {herm:e}")));
        }
        let min_eig = SymmetricEigen::new(self.rho).eigenvalues.min();
        if min_eig < -POSITIVITY_TOLERANCE {
            return Err(DynamicsError::InvalidState(format!("negative eigenvalue {min_eig:e}")));
        }
        Ok(())
    }

    /// `ρ → UρU†` with a 2×2 unitary acting on the addressed subspace.
    pub(crate) fn apply_subspace_unitary(&mut self, u: &Matrix2<Complex64>, transition: Transition) {
        let (a, b) = transition.levels();
        let mut full = CMatrix3::identity();
        full[(a, a)] = u[(0, 0)];
        full[(a, b)] = u[(0, 1)];
        full[(b, a)] = u[(1, 0)];
        full[(b, b)] = u[(1, 1)];
        self.rho = full * self.rho * full.adjoint();
    }

    /// Population relaxation inside the subspace (difference decays with
    /// `pop_factor`) and decay of the subspace coherence by `coh_factor`.
    pub(crate) fn apply_relaxation(&mut self, pop_factor: f64, coh_factor: f64, transition: Transition) {
        let (a, b) = transition.levels();
        let pa = self.rho[(a, a)].re;
        let pb = self.rho[(b, b)].re;
        let mean = 0.5 * (pa + pb);
        self.rho[(a, a)] = Complex64::new(mean + (pa - mean) * pop_factor, 0.0);
        self.rho[(b, b)] = Complex64::new(mean + (pb - mean) * pop_factor, 0.0);
        self.rho[(a, b)] *= coh_factor;
        self.rho[(b, a)] *= coh_factor;
    }

    /// Scales the subspace coherence, e.g. for nuclear envelope modulation.
    pub(crate) fn scale_coherence(&mut self, factor: f64, transition: Transition) {
        self.apply_relaxation(1.0, factor, transition);
    }
}
