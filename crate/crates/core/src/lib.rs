//! Simulation and analysis toolkit for spin-1 divacancy defects (PL6) in 4H-SiC.
//!
//! The crate is organised bottom-up:
//!
//! * [`spin_model`] builds the ground-state spin Hamiltonian and its exact
//!   transition frequencies.
//! * [`temperature`] evaluates and inverts the zero-field-splitting models
//!   `D(T)` and evaluates the relaxation-rate models `1/T1(T)`.
//! * [`signals`] holds the closed-form signal shapes (Lorentzian ODMR lines,
//!   Ramsey fringes, ESEEM echo decay, exponential depolarisation, Rabi).
//! * [`dynamics`] propagates rotating-frame density matrices through pulse
//!   sequences with Monte-Carlo quasi-static noise.
//! * [`fitting`] is a damped least-squares engine with covariance and R².
//! * [`pipeline`] is the CSV / config / report plumbing behind the `sicspin`
//!   command-line tool.
//!
//! All frequencies are ordinary frequencies in MHz, all times are in
//! microseconds, temperatures in kelvin and relaxation rates in 1/ms.

pub mod constants;
pub mod dynamics;
pub mod fitting;
pub mod par;
pub mod pipeline;
pub mod signals;
pub mod spin_model;
pub mod temperature;
pub mod trace;

pub use constants::PhysicalConstants;
pub use dynamics::{NoiseChannels, PulseSegment, PulseSequence, SpinState, Transition};
pub use fitting::{fit, FitProblem, FitResult, ModelKind};
pub use par::Execution;
pub use spin_model::SpinSystemParams;
pub use temperature::{DebyeDParams, PolynomialDParams, T1RateModel, VarshniDParams, ZfsModel};
pub use trace::SignalTrace;
