//! Synthetic measurement traces built on the propagator.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{check_target, monte_carlo_bloch, steps_of, DynamicsError, NoiseChannels, PulseSegment, PulseSequence, Step, Transition};
use crate::signals::{lorentzian_spectrum, EseemParams, LorentzianPeak};
use crate::spin_model::{transition_frequencies, SpinSystemParams};
use crate::trace::SignalTrace;

/// RNG stream reserved for readout noise; Monte-Carlo batches use low stream ids.
const READOUT_STREAM: u64 = u64::MAX;

pub(crate) fn add_readout_noise(y: &mut [f64], sigma: f64, seed: u64) {
    if sigma == 0.0 {
        return;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(READOUT_STREAM);
    let normal = Normal::new(0.0, sigma).expect("validated sigma");
    for v in y.iter_mut() {
        *v += normal.sample(&mut rng);
    }
}

fn check_grid(xs: &[f64], name: &str) -> Result<(), DynamicsError> {
    if xs.is_empty() {
        return Err(DynamicsError::InvalidInput(format!("{name} grid is empty")));
    }
    if xs.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
        return Err(DynamicsError::InvalidInput(format!("{name} values must be finite and non-negative")));
    }
    Ok(())
}

fn polarization_trace(
    xs: &[f64],
    programs: &[Vec<Step>],
    noise: &NoiseChannels,
    x_unit: &str,
) -> Result<SignalTrace, DynamicsError> {
    let mut y: Vec<f64> = monte_carlo_bloch(programs, noise).into_iter().map(|r| r[2]).collect();
    add_readout_noise(&mut y, noise.readout_sigma, noise.rng_seed);
    Ok(SignalTrace::new(xs.to_vec(), y, None, x_unit, "delta_pl")?)
}

/// Ramsey `π/2 − τ − π/2` traces on ω1, averaged over quasi-static noise.
///
/// The reported signal is `P(|0⟩) − P(|−1⟩)`, which for ideal pulses is
/// `−exp(−(τ/T2*)²)·cos(2πδτ)`. A τ spacing above `1/(2δ)` aliases the fringes.
pub fn simulate_ramsey(
    taus: &[f64],
    spin: &SpinSystemParams,
    noise: &NoiseChannels,
    delta: f64,
    omega_r: f64,
) -> Result<SignalTrace, DynamicsError> {
    noise.validate()?;
    check_grid(taus, "tau")?;
    let programs = taus
        .iter()
        .map(|&tau| PulseSequence::ramsey(tau, omega_r, delta).map(|s| steps_of(&s)))
        .collect::<Result<Vec<_>, _>>()?;
    check_target(&PulseSequence::ramsey(0.0, omega_r, delta)?, spin)?;
    polarization_trace(taus, &programs, noise, "tau_us")
}

/// Hahn echo `π/2 − τ/2 − π − τ/2 − π/2` on ω1.
///
/// When `eseem` is given, its modulation factor
/// `[1 − b·sin²(πf1τ)]·[1 − c·sin²(πf2τ)]` scales the coherence before the
/// final π/2 pulse; its `a`, `t2` and `d_offset` fields are not used.
pub fn simulate_echo(
    taus: &[f64],
    spin: &SpinSystemParams,
    noise: &NoiseChannels,
    omega_r: f64,
    eseem: Option<&EseemParams>,
) -> Result<SignalTrace, DynamicsError> {
    noise.validate()?;
    check_grid(taus, "tau")?;
    if let Some(p) = eseem {
        let depth_ok = |d: f64| (0.0..=1.0).contains(&d);
        if !depth_ok(p.b_depth) || !depth_ok(p.c_depth) || p.f1 < 0.0 || p.f2 < 0.0 {
            return Err(DynamicsError::InvalidInput("ESEEM depths must lie in [0, 1] and frequencies be non-negative".into()));
        }
    }
    let mut programs = Vec::with_capacity(taus.len());
    for &tau in taus {
        let mut steps = steps_of(&PulseSequence::hahn_echo(tau, omega_r, 0.0)?);
        if let Some(p) = eseem {
            let last = steps.len() - 1;
            steps.insert(last, Step::ScaleCoherence(p.modulation(tau)));
        }
        programs.push(steps);
    }
    check_target(&PulseSequence::hahn_echo(0.0, omega_r, 0.0)?, spin)?;
    polarization_trace(taus, &programs, noise, "tau_us")
}

/// Resonant (or detuned) Rabi nutation: drive of duration `t` for each `t` in `times`.
pub fn simulate_rabi(
    times: &[f64],
    spin: &SpinSystemParams,
    noise: &NoiseChannels,
    omega_r: f64,
    delta: f64,
) -> Result<SignalTrace, DynamicsError> {
    noise.validate()?;
    check_grid(times, "time")?;
    let mut programs = Vec::with_capacity(times.len());
    for &t in times {
        let seq = PulseSequence::new(vec![PulseSegment::drive(t, omega_r, 0.0, delta)], Transition::Omega1)?;
        check_target(&seq, spin)?;
        programs.push(steps_of(&seq));
    }
    polarization_trace(times, &programs, noise, "tau_us")
}

/// Two Lorentzian dips at `(ω1, ω2)` of `spin`, each with FWHM `linewidth`
/// and depth `contrasts.0`, `contrasts.1`.
pub fn simulate_odmr(
    freqs: &[f64],
    spin: &SpinSystemParams,
    linewidth: f64,
    contrasts: (f64, f64),
) -> Result<SignalTrace, DynamicsError> {
    if !(linewidth > 0.0) || !linewidth.is_finite() {
        return Err(DynamicsError::InvalidInput(format!("linewidth must be positive, got {linewidth}")));
    }
    let (w1, w2) = transition_frequencies(spin);
    let peaks = [
        LorentzianPeak { center: w1, fwhm: linewidth, amplitude: -contrasts.0 },
        LorentzianPeak { center: w2, fwhm: linewidth, amplitude: -contrasts.1 },
    ];
    let y = freqs.iter().map(|&f| lorentzian_spectrum(f, &peaks, 0.0)).collect();
    Ok(SignalTrace::new(freqs.to_vec(), y, None, "frequency_mhz", "delta_pl")?)
}

/// Depolarisation measurement: the difference of `|0⟩` populations after
/// waiting `τ` with and without an initial π pulse, scaled to
/// `contrast·exp(−τ/T1) + offset`, plus optional Gaussian readout noise.
pub fn simulate_t1(
    taus: &[f64],
    t1: f64,
    contrast: f64,
    offset: f64,
    readout_sigma: f64,
    seed: u64,
) -> Result<SignalTrace, DynamicsError> {
    if !(t1 > 0.0) {
        return Err(DynamicsError::InvalidInput(format!("t1 must be positive, got {t1}")));
    }
    check_grid(taus, "tau")?;
    let noise = NoiseChannels { t1, rng_seed: seed, readout_sigma, ..NoiseChannels::noiseless() };
    noise.validate()?;
    let pi = PulseSegment::rotation(PI, 2.0 * PI * 10.0, 0.0, 0.0);
    let mut programs = Vec::with_capacity(2 * taus.len());
    for &tau in taus {
        programs.push(steps_of(&PulseSequence::new(vec![PulseSegment::free(tau)], Transition::Omega1)?));
        programs.push(steps_of(&PulseSequence::new(vec![pi, PulseSegment::free(tau)], Transition::Omega1)?));
    }
    let bloch = monte_carlo_bloch(&programs, &noise);
    let mut y: Vec<f64> = bloch
        .chunks(2)
        .map(|pair| {
            // P0 = (1 + z)/2 for each branch.
            let diff = 0.5 * (pair[0][2] - pair[1][2]);
            contrast * diff + offset
        })
        .collect();
    add_readout_noise(&mut y, readout_sigma, seed);
    Ok(SignalTrace::new(taus.to_vec(), y, None, "tau_us", "delta_pl")?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signals::eseem_signal;
    use crate::trace::linspace;

    fn spin() -> SpinSystemParams {
        SpinSystemParams::pl6(0.018).unwrap()
    }

    #[test]
    fn noiseless_ramsey_fringes_undamped() {
        let taus = linspace(0.0, 1.0, 201);
        let trace = simulate_ramsey(&taus, &spin(), &NoiseChannels::noiseless(), 10.0, 1.0e5).unwrap();
        for (&tau, &y) in trace.x().iter().zip(trace.y()) {
            let ideal = -(2.0 * PI * 10.0 * tau).cos();
            assert!((y - ideal).abs() < 5e-3, "tau {tau}: {y} vs {ideal}");
        }
    }

    #[test]
    fn echo_refocuses_quasi_static_noise_exactly_for_single_realisation() {
        let taus = linspace(0.0, 20.0, 11);
        let noise = NoiseChannels::quasi_static(0.5, 600, 7);
        let trace = simulate_echo(&taus, &spin(), &noise, 2.0 * PI * 200.0, None).unwrap();
        for &y in trace.y() {
            assert!((y - 1.0).abs() < 3.0 / (600f64).sqrt());
        }
    }

    #[test]
    fn echo_with_eseem_matches_closed_form() {
        let taus = linspace(0.0, 60.0, 121);
        let p = EseemParams { a: 1.0, t2: 30.7, b_depth: 0.5, c_depth: 0.3, f1: 0.19275, f2: 0.15238, d_offset: 0.0 };
        let noise = NoiseChannels { t2_pure: 30.7, ..NoiseChannels::noiseless() };
        let trace = simulate_echo(&taus, &spin(), &noise, 2.0 * PI * 1000.0, Some(&p)).unwrap();
        for (&tau, &y) in trace.x().iter().zip(trace.y()) {
            assert!((y - eseem_signal(tau, &p)).abs() < 1e-3);
        }
    }

    #[test]
    fn odmr_extrema_at_transitions() {
        let (w1, _) = transition_frequencies(&spin());
        let freqs = vec![w1 - 1.0, w1, w1 + 1.0];
        let t = simulate_odmr(&freqs, &spin(), 4.0, (0.1, 0.1)).unwrap();
        assert!(t.y()[1] < t.y()[0] && t.y()[1] < t.y()[2]);
        assert!(simulate_odmr(&freqs, &spin(), 0.0, (0.1, 0.1)).is_err());
    }

    #[test]
    fn t1_trace_shape() {
        let taus = vec![0.0, 567.0, 2000.0];
        let t = simulate_t1(&taus, 567.0, 0.8, 0.05, 0.0, 1).unwrap();
        assert!((t.y()[0] - 0.85).abs() < 1e-12);
        assert!((t.y()[1] - (0.8 / std::f64::consts::E + 0.05)).abs() < 1e-12);
        assert!(simulate_t1(&taus, 0.0, 1.0, 0.0, 0.0, 1).is_err());
    }

    #[test]
    fn readout_noise_is_seeded() {
        let taus = linspace(0.0, 1000.0, 50);
        let a = simulate_t1(&taus, 567.0, 1.0, 0.0, 0.01, 5).unwrap();
        let b = simulate_t1(&taus, 567.0, 1.0, 0.0, 0.01, 5).unwrap();
        let c = simulate_t1(&taus, 567.0, 1.0, 0.0, 0.01, 6).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
