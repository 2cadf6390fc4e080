use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::SsmError;

/// Distinguished value a coordinate is pinned to once it blows up.
pub const INF_STATE: Complex64 = Complex64::new(f64::INFINITY, f64::INFINITY);

pub fn is_inf(z: Complex64) -> bool {
    z.re == f64::INFINITY && z.im == f64::INFINITY
}

/// The executable finite-precision regime.
///
/// After every update each coordinate is rounded to `round_digits` decimal
/// places per real/imaginary part. With `renormalize_unit` set, a coordinate
/// whose rounded modulus misses 1 by more than one grid step but no more than
/// `decode_tolerance` is first projected back onto the unit circle. Magnitudes
/// beyond `inf_threshold` pin the coordinate to [`INF_STATE`] for good.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FinitePrecisionConfig {
    pub round_digits: u32,
    pub renormalize_unit: bool,
    pub decode_tolerance: f64,
    pub inf_threshold: f64,
}

impl Default for FinitePrecisionConfig {
    fn default() -> Self {
        FinitePrecisionConfig {
            round_digits: 12,
            renormalize_unit: true,
            decode_tolerance: 1e-6,
            inf_threshold: 1e12,
        }
    }
}

/// What quantizing one coordinate did, for drift diagnostics.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct Quantized {
    pub value: Complex64,
    /// `| |z| - 1 |` of the raw value, before any projection or rounding.
    pub raw_deviation: f64,
}

impl FinitePrecisionConfig {
    pub const MIN_DIGITS: u32 = 4;
    pub const MAX_DIGITS: u32 = 15;

    pub fn validate(&self) -> Result<(), SsmError> {
        if !(Self::MIN_DIGITS..=Self::MAX_DIGITS).contains(&self.round_digits) {
            return Err(SsmError::InvalidPrecision(format!(
                "round_digits must lie in [{}, {}], got {}",
                Self::MIN_DIGITS,
                Self::MAX_DIGITS,
                self.round_digits
            )));
        }
        if !(self.decode_tolerance.is_finite() && self.decode_tolerance >= 0.0) {
            return Err(SsmError::InvalidPrecision("decode_tolerance must be finite and >= 0".into()));
        }
        if !(self.inf_threshold.is_finite() && self.inf_threshold > 1.0) {
            return Err(SsmError::InvalidPrecision("inf_threshold must be finite and > 1".into()));
        }
        Ok(())
    }

    pub fn with_digits(self, round_digits: u32) -> Result<Self, SsmError> {
        let out = FinitePrecisionConfig { round_digits, ..self };
        out.validate()?;
        Ok(out)
    }

    fn grid(&self) -> f64 {
        10f64.powi(-(self.round_digits as i32))
    }

    fn round_component(&self, x: f64) -> f64 {
        let scale = 10f64.powi(self.round_digits as i32);
        let y = x * scale;
        // Beyond 2^52 every float is already an integer multiple of the grid.
        if y.abs() >= 4_503_599_627_370_496.0 {
            return x;
        }
        let r = y.round() / scale;
        if r == 0.0 {
            0.0
        } else {
            r
        }
    }

    fn round(&self, z: Complex64) -> Complex64 {
        Complex64::new(self.round_component(z.re), self.round_component(z.im))
    }

    pub fn quantize(&self, z: Complex64) -> Complex64 {
        self.quantize_traced(z).value
    }

    /// Idempotent: a rounded value whose modulus is within one grid step of 1
    /// is left alone, and a projected value always lands there.
    pub fn quantize_traced(&self, z: Complex64) -> Quantized {
        if is_inf(z) || !z.is_finite() || z.norm() > self.inf_threshold {
            return Quantized { value: INF_STATE, raw_deviation: f64::INFINITY };
        }
        let modulus = z.norm();
        let raw_deviation = (modulus - 1.0).abs();
        let rounded = self.round(z);
        let value = if self.renormalize_unit {
            let dev = (rounded.norm() - 1.0).abs();
            if dev > self.grid() && dev <= self.decode_tolerance {
                self.round(z / modulus)
            } else {
                rounded
            }
        } else {
            rounded
        };
        Quantized { value, raw_deviation }
    }
}
