//! Fixed physical constants, expressed in the crate's frequency units.

/// Physical constants used throughout the crate.
///
/// Energies are folded into ordinary frequency units (MHz), so the Bohr
/// magneton appears as `μB/h` and the Boltzmann constant as `kB/h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    /// `μB/h` in MHz per tesla.
    pub bohr_magneton_over_h: f64,
    /// `kB/h` in MHz per kelvin.
    pub boltzmann_constant: f64,
    /// ¹³C nuclear gyromagnetic ratio `γ/2π` in MHz per tesla.
    pub gyro_c13: f64,
    /// Magnitude of the ²⁹Si nuclear gyromagnetic ratio `|γ|/2π` in MHz per tesla.
    pub gyro_si29: f64,
}

pub const CONSTANTS: PhysicalConstants = PhysicalConstants {
    bohr_magneton_over_h: 13996.2446,
    boltzmann_constant: 20836.6191,
    gyro_c13: 10.7084,
    gyro_si29: 8.4655,
};

impl Default for PhysicalConstants {
    fn default() -> Self {
        CONSTANTS
    }
}

/// Static field used in the measurements, tesla.
pub const EXPERIMENT_B_FIELD: f64 = 1.80e-2;

/// Microwave detuning used for Ramsey interference, MHz.
pub const RAMSEY_DETUNING_MHZ: f64 = 10.0;
