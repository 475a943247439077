//! Rotating-frame pulse-sequence simulation of the addressed spin transition.
//!
//! The microwave drives one transition at a time, so the dynamics reduce to
//! the two-level subspace `{|0⟩, |m⟩}` with `m = −1` for ω1 (the lower
//! transition) and `m = +1` for ω2. In that subspace
//!
//! * a Drive segment is the exact rotation generated by
//!   `H = (Ω/2)(cos φ σx + sin φ σy) + (Δ/2) σz`, `Δ = 2π(δ + δ_shot)`;
//! * a FreeEvolution segment precesses at `Δ` (using the detuning of the
//!   most recent drive, i.e. the microwave frame) with exact exponential
//!   population relaxation (`T1`) and coherence decay (`1/(2T1) + 1/T2_pure`).
//!
//! Quasi-static noise is a per-shot Gaussian detuning `δ_shot`, and results
//! are shot averages. Each batch of shots draws from its own ChaCha stream
//! derived from `(rng_seed, batch_index)`, and batch sums are combined by
//! pairwise summation in batch order, so traces are bit-identical whether
//! batches run sequentially or on the rayon pool.
//!
//! Signals are reported as the polarisation `P(|0⟩) − P(|m⟩)` of the
//! addressed transition, the Bloch `z` component.

mod experiments;
mod state;

use std::f64::consts::{PI, SQRT_2};

use nalgebra::Matrix2;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

pub(crate) use experiments::add_readout_noise;
pub use experiments::{simulate_echo, simulate_odmr, simulate_ramsey, simulate_rabi, simulate_t1};
pub use state::SpinState;

use crate::par::{map_indexed, pairwise_sum, Execution};
use crate::spin_model::{transition_frequencies, SpinSystemParams, MINUS_ONE, PLUS_ONE, ZERO};

/// Shots per RNG stream. Fixed so that results do not depend on thread count.
pub const SHOTS_PER_BATCH: usize = 512;

#[derive(Debug, Error, PartialEq)]
pub enum DynamicsError {
    #[error("pulse sequence is empty")]
    EmptySequence,
    #[error("segment {index}: {reason}")]
    InvalidSegment { index: usize, reason: String },
    #[error("sequence addresses both transitions (segment {0} differs); only one resonance can be driven")]
    MixedTransitions(usize),
    #[error("addressed transition frequency {0} MHz is not positive")]
    TransitionBelowZero(f64),
    #[error("invalid noise setting `{name}`: {reason}")]
    InvalidNoise { name: &'static str, reason: String },
    #[error("invalid simulation input: {0}")]
    InvalidInput(String),
    #[error("state left the physical set: {0}")]
    InvalidState(String),
    #[error(transparent)]
    Trace(#[from] crate::trace::TraceError),
}

/// Which resonance a sequence drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Transition {
    /// Lower-frequency resonance, `|0⟩ ↔ |−1⟩`.
    #[default]
    Omega1,
    /// Upper-frequency resonance, `|0⟩ ↔ |+1⟩`.
    Omega2,
}

impl Transition {
    /// Basis indices `(|0⟩, |m⟩)` of the addressed subspace.
    pub fn levels(self) -> (usize, usize) {
        match self {
            Transition::Omega1 => (ZERO, MINUS_ONE),
            Transition::Omega2 => (ZERO, PLUS_ONE),
        }
    }

    pub fn frequency(self, spin: &SpinSystemParams) -> f64 {
        let (w1, w2) = transition_frequencies(spin);
        match self {
            Transition::Omega1 => w1,
            Transition::Omega2 => w2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SegmentKind {
    Drive,
    FreeEvolution,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseSegment {
    pub kind: SegmentKind,
    /// µs
    pub duration: f64,
    /// Ω_R in rad/µs (Drive only).
    pub rabi_frequency: f64,
    /// rad (Drive only).
    pub phase: f64,
    /// Microwave detuning δ in MHz (Drive only).
    pub detuning: f64,
    /// Overrides the sequence target when set.
    pub transition: Option<Transition>,
}

impl PulseSegment {
    pub fn drive(duration: f64, rabi_frequency: f64, phase: f64, detuning: f64) -> Self {
        Self {
            kind: SegmentKind::Drive,
            duration,
            rabi_frequency,
            phase,
            detuning,
            transition: None,
        }
    }

    /// Drive lasting `angle/Ω_R`, e.g. `angle = π/2` for a π/2 pulse.
    pub fn rotation(angle: f64, rabi_frequency: f64, phase: f64, detuning: f64) -> Self {
        Self::drive(angle / rabi_frequency, rabi_frequency, phase, detuning)
    }

    pub fn free(duration: f64) -> Self {
        Self {
            kind: SegmentKind::FreeEvolution,
            duration,
            rabi_frequency: 0.0,
            phase: 0.0,
            detuning: 0.0,
            transition: None,
        }
    }

    pub fn on(mut self, transition: Transition) -> Self {
        self.transition = Some(transition);
        self
    }

    fn validate(&self, index: usize) -> Result<(), DynamicsError> {
        let bad = |reason: &str| Err(DynamicsError::InvalidSegment { index, reason: reason.to_string() });
        if !(self.duration >= 0.0) || !self.duration.is_finite() {
            return bad("duration must be finite and non-negative");
        }
        if self.kind == SegmentKind::Drive {
            if !(self.rabi_frequency > 0.0) || !self.rabi_frequency.is_finite() {
                return bad("drive needs a positive Rabi frequency");
            }
            if !self.phase.is_finite() || !self.detuning.is_finite() {
                return bad("drive phase and detuning must be finite");
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PulseSequence {
    segments: Vec<PulseSegment>,
    target: Transition,
}

impl PulseSequence {
    pub fn new(segments: Vec<PulseSegment>, target: Transition) -> Result<Self, DynamicsError> {
        if segments.is_empty() {
            return Err(DynamicsError::EmptySequence);
        }
        for (i, s) in segments.iter().enumerate() {
            s.validate(i)?;
            if s.transition.is_some_and(|t| t != target) {
                return Err(DynamicsError::MixedTransitions(i));
            }
        }
        Ok(Self { segments, target })
    }

    /// `π/2 − τ − π/2` on ω1.
    pub fn ramsey(tau: f64, omega_r: f64, detuning: f64) -> Result<Self, DynamicsError> {
        let half = PulseSegment::rotation(PI / 2.0, omega_r, 0.0, detuning);
        Self::new(vec![half, PulseSegment::free(tau), half], Transition::Omega1)
    }

    /// `π/2 − τ/2 − π − τ/2 − π/2` on ω1.
    pub fn hahn_echo(tau: f64, omega_r: f64, detuning: f64) -> Result<Self, DynamicsError> {
        let half = PulseSegment::rotation(PI / 2.0, omega_r, 0.0, detuning);
        let pi = PulseSegment::rotation(PI, omega_r, 0.0, detuning);
        let wait = PulseSegment::free(0.5 * tau);
        Self::new(vec![half, wait, pi, wait, half], Transition::Omega1)
    }

    pub fn segments(&self) -> &[PulseSegment] {
        &self.segments
    }

    pub fn target(&self) -> Transition {
        self.target
    }

    pub fn total_duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }
}

/// Dephasing and relaxation channels plus Monte-Carlo settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseChannels {
    /// Standard deviation of the per-shot frozen detuning, MHz.
    pub quasi_static_detuning_sigma: f64,
    /// µs, `f64::INFINITY` to disable.
    pub t1: f64,
    /// µs, `f64::INFINITY` to disable.
    pub t2_pure: f64,
    pub mc_shots: usize,
    pub rng_seed: u64,
    /// Additive Gaussian noise on each reported point (same units as the signal).
    pub readout_sigma: f64,
    pub execution: Execution,
}

impl Default for NoiseChannels {
    fn default() -> Self {
        Self::noiseless()
    }
}

impl NoiseChannels {
    pub fn noiseless() -> Self {
        Self {
            quasi_static_detuning_sigma: 0.0,
            t1: f64::INFINITY,
            t2_pure: f64::INFINITY,
            mc_shots: 1,
            rng_seed: 0,
            readout_sigma: 0.0,
            execution: Execution::default(),
        }
    }

    /// Quasi-static noise producing a Gaussian Ramsey envelope with decay time `t2_star`.
    pub fn quasi_static(t2_star: f64, mc_shots: usize, rng_seed: u64) -> Self {
        Self {
            quasi_static_detuning_sigma: sigma_from_t2_star(t2_star),
            mc_shots,
            rng_seed,
            ..Self::noiseless()
        }
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        let bad = |name, reason: &str| Err(DynamicsError::InvalidNoise { name, reason: reason.to_string() });
        if !(self.quasi_static_detuning_sigma >= 0.0) || !self.quasi_static_detuning_sigma.is_finite() {
            return bad("quasi_static_detuning_sigma", "must be finite and non-negative");
        }
        if !(self.t1 > 0.0) {
            return bad("t1", "must be positive (or infinite)");
        }
        if !(self.t2_pure > 0.0) {
            return bad("t2_pure", "must be positive (or infinite)");
        }
        if self.mc_shots == 0 {
            return bad("mc_shots", "must be at least 1");
        }
        if !(self.readout_sigma >= 0.0) || !self.readout_sigma.is_finite() {
            return bad("readout_sigma", "must be finite and non-negative");
        }
        Ok(())
    }

    /// Shots actually needed: without detuning noise every shot is identical.
    fn effective_shots(&self) -> usize {
        if self.quasi_static_detuning_sigma == 0.0 {
            1
        } else {
            self.mc_shots
        }
    }
}

/// `σ = 1/(√2·π·T2*)`: the Gaussian average of `cos(2πΔτ)` over `Δ ~ N(0, σ²)`
/// is `exp(−2π²σ²τ²)`, which equals `exp(−(τ/T2*)²)` for this σ.
pub fn sigma_from_t2_star(t2_star: f64) -> f64 {
    1.0 / (SQRT_2 * PI * t2_star)
}

pub fn t2_star_from_sigma(sigma: f64) -> f64 {
    1.0 / (SQRT_2 * PI * sigma)
}

/// Internal step list: sequence segments plus optional coherence scaling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Step {
    Segment(PulseSegment),
    ScaleCoherence(f64),
}

fn steps_of(seq: &PulseSequence) -> Vec<Step> {
    seq.segments.iter().copied().map(Step::Segment).collect()
}

type Rot = [[f64; 3]; 3];

/// Rotation about `axis` (not necessarily normalised) by `|axis|·t`, so that
/// `dr/dt = axis × r`.
fn rotation(axis: [f64; 3], t: f64) -> Rot {
    let w = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
    if w * t == 0.0 {
        return [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    }
    let [x, y, z] = [axis[0] / w, axis[1] / w, axis[2] / w];
    let (s, c) = (w * t).sin_cos();
    let k = 1.0 - c;
    [
        [c + x * x * k, x * y * k - z * s, x * z * k + y * s],
        [y * x * k + z * s, c + y * y * k, y * z * k - x * s],
        [z * x * k - y * s, z * y * k + x * s, c + z * z * k],
    ]
}

fn rotate(m: &Rot, v: [f64; 3]) -> [f64; 3] {
    [
        m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
        m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
        m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
    ]
}

fn drive_axis(seg: &PulseSegment, shot_detuning: f64) -> [f64; 3] {
    let delta = 2.0 * PI * (seg.detuning + shot_detuning);
    let (s, c) = seg.phase.sin_cos();
    [seg.rabi_frequency * c, seg.rabi_frequency * s, delta]
}

fn decay_factors(duration: f64, noise: &NoiseChannels) -> (f64, f64) {
    let pop = (-duration / noise.t1).exp();
    let coh = (-duration / (2.0 * noise.t1) - duration / noise.t2_pure).exp();
    (pop, coh)
}

/// Bloch-vector evolution of one shot. Drive rotations are cached per shot
/// in `cache`, keyed by segment, so repeated pulses cost one rotation build.
fn run_bloch(steps: &[Step], shot_detuning: f64, noise: &NoiseChannels, cache: &mut Vec<(PulseSegment, Rot)>) -> [f64; 3] {
    let mut r = [0.0, 0.0, 1.0];
    let mut frame = 0.0;
    for step in steps {
        match step {
            Step::Segment(seg) => match seg.kind {
                SegmentKind::Drive => {
                    frame = seg.detuning;
                    let rot = match cache.iter().find(|(s, _)| s == seg) {
                        Some((_, rot)) => *rot,
                        None => {
                            let rot = rotation(drive_axis(seg, shot_detuning), seg.duration);
                            cache.push((*seg, rot));
                            rot
                        }
                    };
                    r = rotate(&rot, r);
                }
                SegmentKind::FreeEvolution => {
                    let angle = 2.0 * PI * (frame + shot_detuning) * seg.duration;
                    let (s, c) = angle.sin_cos();
                    let (pop, coh) = decay_factors(seg.duration, noise);
                    r = [coh * (c * r[0] - s * r[1]), coh * (s * r[0] + c * r[1]), pop * r[2]];
                }
            },
            Step::ScaleCoherence(f) => {
                r[0] *= f;
                r[1] *= f;
            }
        }
    }
    r
}

/// Exact 2×2 propagator `exp(−iHt)` for `H = ½ axis·σ` (axis in rad/µs).
fn subspace_unitary(axis: [f64; 3], t: f64) -> Matrix2<Complex64> {
    let w = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
    let (s, c) = (0.5 * w * t).sin_cos();
    if w == 0.0 {
        return Matrix2::identity();
    }
    let [nx, ny, nz] = [axis[0] / w, axis[1] / w, axis[2] / w];
    let i = Complex64::new(0.0, 1.0);
    let one = Complex64::new(1.0, 0.0);
    // c·I − i·s·(n·σ)
    Matrix2::new(
        one * c - i * s * nz,
        -i * s * Complex64::new(nx, -ny),
        -i * s * Complex64::new(nx, ny),
        one * c + i * s * nz,
    )
}

/// Density-matrix evolution of one shot; returns the state after every step.
pub(crate) fn run_density_matrix(steps: &[Step], shot_detuning: f64, noise: &NoiseChannels, transition: Transition) -> Vec<SpinState> {
    let mut state = SpinState::polarized();
    let mut frame = 0.0;
    let mut history = Vec::with_capacity(steps.len());
    for step in steps {
        match step {
            Step::Segment(seg) => match seg.kind {
                SegmentKind::Drive => {
                    frame = seg.detuning;
                    let u = subspace_unitary(drive_axis(seg, shot_detuning), seg.duration);
                    state.apply_subspace_unitary(&u, transition);
                }
                SegmentKind::FreeEvolution => {
                    let u = subspace_unitary([0.0, 0.0, 2.0 * PI * (frame + shot_detuning)], seg.duration);
                    state.apply_subspace_unitary(&u, transition);
                    let (pop, coh) = decay_factors(seg.duration, noise);
                    state.apply_relaxation(pop, coh, transition);
                }
            },
            Step::ScaleCoherence(f) => state.scale_coherence(*f, transition),
        }
        history.push(state.clone());
    }
    history
}

/// Single noise realisation through the full density-matrix path, returning
/// the state after each segment. Used for validity checks and cross-checks.
pub fn propagate_shot_history(
    sequence: &PulseSequence,
    shot_detuning: f64,
    noise: &NoiseChannels,
) -> Result<Vec<SpinState>, DynamicsError> {
    noise.validate()?;
    Ok(run_density_matrix(&steps_of(sequence), shot_detuning, noise, sequence.target))
}

/// Compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
struct Kahan {
    sum: f64,
    comp: f64,
}

impl Kahan {
    fn add(&mut self, v: f64) {
        let y = v - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }
}

/// Shot-averaged Bloch vectors for a batch of step lists sharing the same
/// noise realisations. Returns one averaged vector per step list.
pub(crate) fn monte_carlo_bloch(programs: &[Vec<Step>], noise: &NoiseChannels) -> Vec<[f64; 3]> {
    let shots = noise.effective_shots();
    let n_batches = shots.div_ceil(SHOTS_PER_BATCH);
    let sigma = noise.quasi_static_detuning_sigma;

    let batch_sums: Vec<Vec<[f64; 3]>> = map_indexed(n_batches, noise.execution, |batch| {
        let mut rng = ChaCha8Rng::seed_from_u64(noise.rng_seed);
        rng.set_stream(batch as u64);
        let first = batch * SHOTS_PER_BATCH;
        let count = SHOTS_PER_BATCH.min(shots - first);
        let mut acc = vec![[Kahan::default(); 3]; programs.len()];
        let mut cache = Vec::new();
        for _ in 0..count {
            let z: f64 = StandardNormal.sample(&mut rng);
            let shot_detuning = sigma * z;
            cache.clear();
            for (program, slot) in programs.iter().zip(acc.iter_mut()) {
                let r = run_bloch(program, shot_detuning, noise, &mut cache);
                for k in 0..3 {
                    slot[k].add(r[k]);
                }
            }
        }
        acc.into_iter().map(|s| [s[0].sum, s[1].sum, s[2].sum]).collect()
    });

    let mut column = Vec::with_capacity(n_batches);
    (0..programs.len())
        .map(|p| {
            let mut out = [0.0; 3];
            for (k, o) in out.iter_mut().enumerate() {
                column.clear();
                column.extend(batch_sums.iter().map(|b| b[p][k]));
                *o = pairwise_sum(&column) / shots as f64;
            }
            out
        })
        .collect()
}

fn check_target(sequence: &PulseSequence, spin: &SpinSystemParams) -> Result<(), DynamicsError> {
    let freq = sequence.target.frequency(spin);
    if freq <= 0.0 {
        return Err(DynamicsError::TransitionBelowZero(freq));
    }
    Ok(())
}

/// Runs `sequence` from `|0⟩⟨0|` and returns the shot-averaged final state.
pub fn propagate(
    sequence: &PulseSequence,
    spin: &SpinSystemParams,
    noise: &NoiseChannels,
) -> Result<SpinState, DynamicsError> {
    noise.validate()?;
    check_target(sequence, spin)?;
    let bloch = monte_carlo_bloch(&[steps_of(sequence)], noise)[0];
    Ok(SpinState::from_bloch(bloch, sequence.target))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spin() -> SpinSystemParams {
        SpinSystemParams::pl6(0.018).unwrap()
    }

    #[test]
    fn resonant_pi_pulse_empties_zero() {
        let omega = 2.0 * PI * 20.0;
        let seq = PulseSequence::new(vec![PulseSegment::rotation(PI, omega, 0.0, 0.0)], Transition::Omega1).unwrap();
        let s = propagate(&seq, &spin(), &NoiseChannels::noiseless()).unwrap();
        assert!(s.population(ZERO).abs() < 1e-9);
        assert!((s.population(MINUS_ONE) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn two_half_pulses_compose_to_pi() {
        let omega = 2.0 * PI * 20.0;
        let half = PulseSegment::rotation(PI / 2.0, omega, 0.0, 0.0);
        let seq = PulseSequence::new(vec![half, half], Transition::Omega1).unwrap();
        let s = propagate(&seq, &spin(), &NoiseChannels::noiseless()).unwrap();
        assert!(s.population(ZERO).abs() < 1e-9);
    }

    #[test]
    fn omega2_addresses_plus_one() {
        let omega = 2.0 * PI * 20.0;
        let seq = PulseSequence::new(vec![PulseSegment::rotation(PI, omega, 0.0, 0.0)], Transition::Omega2).unwrap();
        let s = propagate(&seq, &spin(), &NoiseChannels::noiseless()).unwrap();
        assert!((s.population(PLUS_ONE) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn mixed_transitions_rejected() {
        let omega = 10.0;
        let segs = vec![
            PulseSegment::rotation(PI, omega, 0.0, 0.0),
            PulseSegment::rotation(PI, omega, 0.0, 0.0).on(Transition::Omega2),
        ];
        assert_eq!(PulseSequence::new(segs, Transition::Omega1), Err(DynamicsError::MixedTransitions(1)));
        assert_eq!(PulseSequence::new(vec![], Transition::Omega1), Err(DynamicsError::EmptySequence));
        assert!(PulseSequence::new(vec![PulseSegment::drive(1.0, 0.0, 0.0, 0.0)], Transition::Omega1).is_err());
        assert!(PulseSequence::new(vec![PulseSegment::free(-1.0)], Transition::Omega1).is_err());
    }

    #[test]
    fn past_level_crossing_rejected() {
        let spin = SpinSystemParams::new(1365.0, 0.0, 2.0, 0.1).unwrap();
        let seq = PulseSequence::ramsey(0.1, 100.0, 0.0).unwrap();
        assert!(matches!(
            propagate(&seq, &spin, &NoiseChannels::noiseless()),
            Err(DynamicsError::TransitionBelowZero(_))
        ));
    }

    #[test]
    fn bloch_and_density_matrix_paths_agree() {
        let noise = NoiseChannels { t1: 50.0, t2_pure: 7.0, ..NoiseChannels::noiseless() };
        let omega = 2.0 * PI * 3.0;
        let seq = PulseSequence::new(
            vec![
                PulseSegment::rotation(1.1, omega, 0.4, 1.3),
                PulseSegment::free(0.37),
                PulseSegment::rotation(2.0, omega, -1.2, 0.6),
                PulseSegment::free(2.5),
                PulseSegment::drive(0.05, omega, 2.0, -0.8),
            ],
            Transition::Omega1,
        )
        .unwrap();
        let steps = steps_of(&seq);
        for shot in [0.0, 0.21, -0.5] {
            let bloch = run_bloch(&steps, shot, &noise, &mut Vec::new());
            let history = run_density_matrix(&steps, shot, &noise, Transition::Omega1);
            for state in &history {
                state.check_valid().unwrap();
            }
            let from_rho = history.last().unwrap().bloch(Transition::Omega1);
            for k in 0..3 {
                assert!((bloch[k] - from_rho[k]).abs() < 1e-12, "{bloch:?} vs {from_rho:?}");
            }
        }
    }

    #[test]
    fn seed_determinism_and_execution_independence() {
        let seq = PulseSequence::ramsey(0.37, 500.0, 10.0).unwrap();
        let mut noise = NoiseChannels::quasi_static(1.0, 3000, 42);
        noise.execution = Execution::Sequential;
        let a = propagate(&seq, &spin(), &noise).unwrap();
        noise.execution = Execution::Parallel;
        let b = propagate(&seq, &spin(), &noise).unwrap();
        assert_eq!(a, b);
        noise.rng_seed = 43;
        let c = propagate(&seq, &spin(), &noise).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn sigma_t2_star_mapping() {
        let s = sigma_from_t2_star(1.0);
        assert!((s - 0.225_079_079).abs() < 1e-8);
        assert!((t2_star_from_sigma(s) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_noise() {
        let mut n = NoiseChannels::noiseless();
        n.mc_shots = 0;
        assert!(n.validate().is_err());
        let n = NoiseChannels { quasi_static_detuning_sigma: -1.0, ..NoiseChannels::noiseless() };
        assert!(n.validate().is_err());
        let n = NoiseChannels { t1: 0.0, ..NoiseChannels::noiseless() };
        assert!(n.validate().is_err());
    }
}
