//! Temperature dependence of the zero-field splitting `D(T)` and of the
//! spin-lattice relaxation rate `1/T1(T)`.
//!
//! `D` is in MHz and `T` in kelvin. Relaxation rates are in 1/ms. The energy
//! scales of the coth+Orbach model are stored as temperatures (`E/kB` in K).

use thiserror::Error;

/// Inversion stops once the bracketing interval is narrower than this, kelvin.
pub const INVERSION_TOLERANCE_K: f64 = 1e-4;

/// Temperature span accepted by [`invert_d_to_temperature`], kelvin.
pub const INVERSION_LIMITS_K: (f64, f64) = (0.0, 400.0);

#[derive(Debug, Error, PartialEq)]
pub enum TemperatureError {
    #[error("temperature {0} K is negative")]
    NegativeTemperature(f64),
    #[error("temperature {0} K must be strictly positive for relaxation-rate models")]
    NonPositiveTemperature(f64),
    #[error("D = {target} MHz outside the achievable interval [{d_min:.4}, {d_max:.4}] MHz on [{t_min}, {t_max}] K")]
    OutOfRange {
        target: f64,
        d_min: f64,
        d_max: f64,
        t_min: f64,
        t_max: f64,
    },
    #[error("invalid temperature window [{0}, {1}] K (must be increasing and within [0, 400] K)")]
    InvalidWindow(f64, f64),
    #[error("invalid model parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("sample dimension must be 1, 2 or 3, got {0}")]
    InvalidDimension(u32),
}

fn check_param(name: &'static str, value: f64, ok: bool, reason: &'static str) -> Result<(), TemperatureError> {
    if ok && value.is_finite() {
        Ok(())
    } else {
        Err(TemperatureError::InvalidParameter { name, value, reason })
    }
}

/// `D(T) = d_floor + amplitude·exp(−curvature·T²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DebyeDParams {
    pub d_floor: f64,
    pub amplitude: f64,
    /// K⁻²
    pub curvature: f64,
}

impl DebyeDParams {
    pub fn new(d_floor: f64, amplitude: f64, curvature: f64) -> Result<Self, TemperatureError> {
        check_param("d_floor", d_floor, true, "must be finite")?;
        check_param("amplitude", amplitude, amplitude > 0.0, "must be positive")?;
        check_param("curvature", curvature, curvature > 0.0, "must be positive")?;
        Ok(Self { d_floor, amplitude, curvature })
    }

    /// Coefficients reported for the high-fluence sample (A).
    pub const SAMPLE_A: Self = Self { d_floor: 1304.1, amplitude: 60.6, curvature: 2.7e-6 };
    /// Coefficients reported for the low-fluence sample (B).
    pub const SAMPLE_B: Self = Self { d_floor: 1301.3, amplitude: 64.3, curvature: 2.5e-6 };

    pub fn eval(&self, t: f64) -> f64 {
        self.d_floor + self.amplitude * (-self.curvature * t * t).exp()
    }

    pub fn derivative(&self, t: f64) -> f64 {
        -2.0 * self.amplitude * self.curvature * t * (-self.curvature * t * t).exp()
    }
}

/// `D(T) = d_zero − alpha·T²/(beta + T)`, alpha in MHz/K, beta in K.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarshniDParams {
    pub d_zero: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl VarshniDParams {
    pub fn new(d_zero: f64, alpha: f64, beta: f64) -> Result<Self, TemperatureError> {
        check_param("d_zero", d_zero, true, "must be finite")?;
        check_param("alpha", alpha, true, "must be finite")?;
        check_param("beta", beta, beta > 0.0, "must be positive")?;
        Ok(Self { d_zero, alpha, beta })
    }

    pub const SAMPLE_A: Self = Self { d_zero: 1364.7, alpha: 0.2, beta: 1348.2 };
    pub const SAMPLE_B: Self = Self { d_zero: 1365.6, alpha: 0.2, beta: 1268.3 };

    pub fn eval(&self, t: f64) -> f64 {
        self.d_zero - self.alpha * t * t / (self.beta + t)
    }
}

/// `D(T) = Σ c_n·Tⁿ`, n = 0..5.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolynomialDParams {
    pub coefficients: [f64; 6],
}

impl PolynomialDParams {
    pub fn new(coefficients: &[f64]) -> Result<Self, TemperatureError> {
        let coefficients: [f64; 6] = coefficients.try_into().map_err(|_| TemperatureError::InvalidParameter {
            name: "coefficients",
            value: coefficients.len() as f64,
            reason: "exactly six coefficients required",
        })?;
        for c in coefficients {
            check_param("coefficients", c, true, "must be finite")?;
        }
        Ok(Self { coefficients })
    }

    pub const SAMPLE_A: Self = Self {
        coefficients: [1364.6, 3.5e-3, -1.8e-4, -1.5e-7, 1.6e-9, -2.7e-12],
    };
    pub const SAMPLE_B: Self = Self {
        coefficients: [1365.4, 1.2e-2, -3.5e-4, 8.8e-7, -4.2e-10, -2.2e-12],
    };

    pub fn eval(&self, t: f64) -> f64 {
        self.coefficients.iter().rev().fold(0.0, |acc, c| acc * t + c)
    }
}

/// One of the `D(T)` model families.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ZfsModel {
    Debye(DebyeDParams),
    Varshni(VarshniDParams),
    Polynomial(PolynomialDParams),
}

impl From<DebyeDParams> for ZfsModel {
    fn from(p: DebyeDParams) -> Self {
        ZfsModel::Debye(p)
    }
}

impl From<VarshniDParams> for ZfsModel {
    fn from(p: VarshniDParams) -> Self {
        ZfsModel::Varshni(p)
    }
}

impl From<PolynomialDParams> for ZfsModel {
    fn from(p: PolynomialDParams) -> Self {
        ZfsModel::Polynomial(p)
    }
}

impl ZfsModel {
    pub fn name(&self) -> &'static str {
        match self {
            ZfsModel::Debye(_) => "debye",
            ZfsModel::Varshni(_) => "varshni",
            ZfsModel::Polynomial(_) => "poly5",
        }
    }

    fn eval_unchecked(&self, t: f64) -> f64 {
        match self {
            ZfsModel::Debye(p) => p.eval(t),
            ZfsModel::Varshni(p) => p.eval(t),
            ZfsModel::Polynomial(p) => p.eval(t),
        }
    }
}

/// Evaluates `D(T)` in MHz.
pub fn evaluate_d(model: impl Into<ZfsModel>, t: f64) -> Result<f64, TemperatureError> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(TemperatureError::NegativeTemperature(t));
    }
    Ok(model.into().eval_unchecked(t))
}

/// Finds `T` in `t_range` with `D(T) = d_target` by bisection.
///
/// The model is assumed monotone on `t_range` (always true for the Debye form);
/// for other forms the endpoints must still bracket the target.
pub fn invert_d_to_temperature(
    model: impl Into<ZfsModel>,
    d_target: f64,
    t_range: (f64, f64),
) -> Result<f64, TemperatureError> {
    let model = model.into();
    let (t_min, t_max) = t_range;
    if !(t_min < t_max && t_min >= INVERSION_LIMITS_K.0 && t_max <= INVERSION_LIMITS_K.1) {
        return Err(TemperatureError::InvalidWindow(t_min, t_max));
    }
    let d_at_min = model.eval_unchecked(t_min);
    let d_at_max = model.eval_unchecked(t_max);
    let (d_min, d_max) = (d_at_min.min(d_at_max), d_at_min.max(d_at_max));
    if !(d_target >= d_min && d_target <= d_max) {
        return Err(TemperatureError::OutOfRange { target: d_target, d_min, d_max, t_min, t_max });
    }

    // g(lo) and g(hi) have opposite signs (or one is zero).
    let g = |t: f64| model.eval_unchecked(t) - d_target;
    let (mut lo, mut hi) = (t_min, t_max);
    let g_lo = g(lo);
    if g_lo == 0.0 {
        return Ok(lo);
    }
    if g(hi) == 0.0 {
        return Ok(hi);
    }
    let lo_positive = g_lo > 0.0;
    while hi - lo > INVERSION_TOLERANCE_K {
        let mid = 0.5 * (lo + hi);
        let g_mid = g(mid);
        if g_mid == 0.0 {
            return Ok(mid);
        }
        if (g_mid > 0.0) == lo_positive {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `s = 2d − 1`.
pub fn raman_exponent(dimension_d: u32) -> Result<i32, TemperatureError> {
    match dimension_d {
        1..=3 => Ok(2 * dimension_d as i32 - 1),
        d => Err(TemperatureError::InvalidDimension(d)),
    }
}

/// Temperature models for the relaxation rate `1/T1`, in 1/ms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum T1RateModel {
    /// `a·coth(E1/kBT) + b/(exp(E2/kBT) − 1) + c` with `e1_k = E1/kB`, `e2_k = E2/kB`.
    CothOrbach { a: f64, e1_k: f64, b: f64, e2_k: f64, c: f64 },
    /// `a′·T + c′`.
    Linear { a_prime: f64, c_prime: f64 },
    /// `a·Tˢ + b·Tˢ⁺¹ + c·Tˢ⁺²` with `s = 2d − 1`.
    Raman { a: f64, b: f64, c: f64, dimension_d: u32 },
}

impl T1RateModel {
    pub fn validate(&self) -> Result<(), TemperatureError> {
        match *self {
            T1RateModel::CothOrbach { a, e1_k, b, e2_k, c } => {
                check_param("a", a, a >= 0.0, "must be non-negative")?;
                check_param("b", b, b >= 0.0, "must be non-negative")?;
                check_param("e1", e1_k, e1_k > 0.0, "must be positive")?;
                check_param("e2", e2_k, e2_k > 0.0, "must be positive")?;
                check_param("c", c, true, "must be finite")
            }
            T1RateModel::Linear { a_prime, c_prime } => {
                check_param("a_prime", a_prime, a_prime >= 0.0, "must be non-negative")?;
                check_param("c_prime", c_prime, true, "must be finite")
            }
            T1RateModel::Raman { a, b, c, dimension_d } => {
                raman_exponent(dimension_d)?;
                check_param("a", a, a >= 0.0, "must be non-negative")?;
                check_param("b", b, b >= 0.0, "must be non-negative")?;
                check_param("c", c, true, "must be finite")
            }
        }
    }
}

/// Evaluates `1/T1` in 1/ms at temperature `t` (kelvin, strictly positive).
pub fn evaluate_t1_rate(model: &T1RateModel, t: f64) -> Result<f64, TemperatureError> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(TemperatureError::NonPositiveTemperature(t));
    }
    model.validate()?;
    Ok(match *model {
        T1RateModel::CothOrbach { a, e1_k, b, e2_k, c } => {
            let x = e1_k / t;
            a / x.tanh() + b / (e2_k / t).exp_m1() + c
        }
        T1RateModel::Linear { a_prime, c_prime } => a_prime * t + c_prime,
        T1RateModel::Raman { a, b, c, dimension_d } => {
            let s = raman_exponent(dimension_d)?;
            let ts = t.powi(s);
            ts * (a + t * (b + t * c))
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn debye_sample_a_endpoints() {
        let d5 = evaluate_d(DebyeDParams::SAMPLE_A, 5.0).unwrap();
        let d300 = evaluate_d(DebyeDParams::SAMPLE_A, 300.0).unwrap();
        assert!((d5 - 1364.70).abs() < 0.005);
        assert!((d300 - 1351.63).abs() < 0.005);
        assert!((d300 - d5 + 13.07).abs() < 0.005);
    }

    #[test]
    fn varshni_at_zero() {
        assert_eq!(evaluate_d(VarshniDParams::SAMPLE_A, 0.0).unwrap(), 1364.7);
    }

    #[test]
    fn polynomial_horner_matches_powers() {
        let p = PolynomialDParams::SAMPLE_B;
        let t: f64 = 173.0;
        let direct: f64 = p.coefficients.iter().enumerate().map(|(n, c)| c * t.powi(n as i32)).sum();
        assert_relative_eq!(p.eval(t), direct, max_relative = 1e-14);
    }

    #[test]
    fn negative_temperature_rejected() {
        assert_eq!(
            evaluate_d(DebyeDParams::SAMPLE_A, -1.0),
            Err(TemperatureError::NegativeTemperature(-1.0))
        );
    }

    #[test]
    fn debye_strictly_decreasing() {
        for p in [DebyeDParams::SAMPLE_A, DebyeDParams::SAMPLE_B] {
            let mut prev = p.eval(1.0);
            for t in 2..=350 {
                let d = p.eval(t as f64);
                assert!(d < prev, "not decreasing at {t} K");
                assert!(p.derivative(t as f64) < 0.0);
                prev = d;
            }
        }
    }

    #[test]
    fn inversion_examples() {
        let model = DebyeDParams::SAMPLE_A;
        let d300 = model.eval(300.0);
        let d5 = model.eval(5.0);
        assert!((invert_d_to_temperature(model, d300, (5.0, 300.0)).unwrap() - 300.0).abs() < 1e-4);
        assert!((invert_d_to_temperature(model, d5, (5.0, 300.0)).unwrap() - 5.0).abs() < 1e-4);
        // Two-decimal reading of D(300 K).
        assert!((invert_d_to_temperature(model, 1351.63, (5.0, 300.0)).unwrap() - 300.0).abs() < 0.1);
        match invert_d_to_temperature(model, 1380.0, (5.0, 300.0)) {
            Err(TemperatureError::OutOfRange { d_min, d_max, .. }) => {
                assert_relative_eq!(d_min, d300);
                assert_relative_eq!(d_max, d5);
            }
            other => panic!("expected out-of-range, got {other:?}"),
        }
        assert!(matches!(
            invert_d_to_temperature(model, 1360.0, (5.0, 500.0)),
            Err(TemperatureError::InvalidWindow(..))
        ));
    }

    #[test]
    fn inversion_round_trip_grid() {
        for model in [DebyeDParams::SAMPLE_A, DebyeDParams::SAMPLE_B] {
            for t in 5..=300 {
                let t = t as f64;
                let back = invert_d_to_temperature(model, model.eval(t), (5.0, 300.0)).unwrap();
                assert!((back - t).abs() < 0.01, "{t} -> {back}");
            }
        }
    }

    #[test]
    fn t1_rate_examples() {
        let lin = T1RateModel::Linear { a_prime: 0.004, c_prime: 0.0 };
        assert_relative_eq!(evaluate_t1_rate(&lin, 250.0).unwrap(), 1.0, max_relative = 1e-12);

        let raman = T1RateModel::Raman { a: 1.0, b: 0.0, c: 0.0, dimension_d: 2 };
        let ratio = evaluate_t1_rate(&raman, 300.0).unwrap() / evaluate_t1_rate(&raman, 250.0).unwrap();
        assert_relative_eq!(ratio, 1.728, max_relative = 1e-12);

        assert!(evaluate_t1_rate(&lin, 0.0).is_err());
        assert!(evaluate_t1_rate(&lin, -3.0).is_err());
    }

    #[test]
    fn coth_orbach_high_temperature_limit() {
        let e1_k = 0.05;
        let model = T1RateModel::CothOrbach { a: 0.3, e1_k, b: 0.0, e2_k: 1000.0, c: 0.1 };
        for t in [50.0 * e1_k, 10.0, 100.0, 300.0] {
            let rate = evaluate_t1_rate(&model, t).unwrap();
            let linear = 0.3 * t / e1_k + 0.1;
            assert!(((rate - linear) / linear).abs() < 1e-3);
        }
    }

    #[test]
    fn raman_exponents() {
        assert_eq!(raman_exponent(1), Ok(1));
        assert_eq!(raman_exponent(2), Ok(3));
        assert_eq!(raman_exponent(3), Ok(5));
        assert_eq!(raman_exponent(0), Err(TemperatureError::InvalidDimension(0)));
        assert_eq!(raman_exponent(4), Err(TemperatureError::InvalidDimension(4)));
    }

    #[test]
    fn invalid_rate_parameters() {
        let bad = T1RateModel::CothOrbach { a: 1.0, e1_k: 0.0, b: 0.0, e2_k: 10.0, c: 0.0 };
        assert!(evaluate_t1_rate(&bad, 10.0).is_err());
        let bad = T1RateModel::Raman { a: 1.0, b: 0.0, c: 0.0, dimension_d: 4 };
        assert!(evaluate_t1_rate(&bad, 10.0).is_err());
    }
}
