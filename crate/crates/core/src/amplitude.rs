//! Complex amplitudes in log-polar form.
//!
//! A collapsed marble keeps a tail whose squared modulus can sit hundreds of
//! orders of magnitude below `f64::MIN_POSITIVE`. Storing `ln |z|` and
//! `arg z` separately keeps those tails finite through products, sums and
//! renormalization.

use std::f64::consts::PI;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, Mul};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Wrap an angle into `[-π, π)`.
pub fn wrap_phase(phase: f64) -> f64 {
    let wrapped = (phase + PI).rem_euclid(2.0 * PI) - PI;
    // rem_euclid can round up to exactly 2π for tiny negative inputs
    if wrapped >= PI {
        wrapped - 2.0 * PI
    } else {
        wrapped
    }
}

/// `ln(Σ exp(xᵢ))`, shifted by the maximum so nothing overflows.
///
/// Returns `-inf` for an empty iterator or when every term is `-inf`.
pub fn log_sum_exp<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let values: Vec<f64> = values.into_iter().collect();
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    let sum: f64 = values.iter().map(|v| (v - max).exp()).sum();
    max + sum.ln()
}

/// `ln(exp(a) + exp(b))`.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// A complex number stored as `(ln |z|, arg z)`.
///
/// `log_magnitude = -inf` encodes exact zero; its phase is then `0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Amplitude {
    log_magnitude: f64,
    phase: f64,
}

impl Amplitude {
    pub const ZERO: Amplitude = Amplitude {
        log_magnitude: f64::NEG_INFINITY,
        phase: 0.0,
    };

    pub const ONE: Amplitude = Amplitude {
        log_magnitude: 0.0,
        phase: 0.0,
    };

    pub fn from_log_polar(log_magnitude: f64, phase: f64) -> Self {
        assert!(!log_magnitude.is_nan(), "log-magnitude is NaN");
        if log_magnitude == f64::NEG_INFINITY {
            return Self::ZERO;
        }
        Amplitude {
            log_magnitude,
            phase: wrap_phase(phase),
        }
    }

    pub fn from_real(x: f64) -> Self {
        if x == 0.0 {
            Self::ZERO
        } else if x > 0.0 {
            Self::from_log_polar(x.ln(), 0.0)
        } else {
            Self::from_log_polar((-x).ln(), PI)
        }
    }

    pub fn from_complex(z: Complex64) -> Self {
        if z.re == 0.0 && z.im == 0.0 {
            return Self::ZERO;
        }
        Self::from_log_polar(z.norm().ln(), z.arg())
    }

    /// Real, non-negative amplitude whose squared modulus is `mass`.
    pub fn from_mass(mass: f64) -> Self {
        assert!(mass >= 0.0, "negative mass {mass}");
        if mass == 0.0 {
            Self::ZERO
        } else {
            Self::from_log_polar(0.5 * mass.ln(), 0.0)
        }
    }

    pub fn log_magnitude(&self) -> f64 {
        self.log_magnitude
    }

    pub fn phase(&self) -> f64 {
        self.phase
    }

    pub fn is_zero(&self) -> bool {
        self.log_magnitude == f64::NEG_INFINITY
    }

    /// `ln |z|²`.
    pub fn log_norm_sqr(&self) -> f64 {
        2.0 * self.log_magnitude
    }

    /// `|z|²`; underflows to `0.0` for deep tails.
    pub fn norm_sqr(&self) -> f64 {
        self.log_norm_sqr().exp()
    }

    pub fn to_complex(&self) -> Complex64 {
        if self.is_zero() {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::from_polar(self.log_magnitude.exp(), self.phase)
    }

    pub fn conj(&self) -> Self {
        if self.is_zero() {
            return *self;
        }
        Self::from_log_polar(self.log_magnitude, -self.phase)
    }

    /// Multiply the modulus by `exp(delta)`.
    pub fn scale_log(&self, delta: f64) -> Self {
        if self.is_zero() {
            return *self;
        }
        Self::from_log_polar(self.log_magnitude + delta, self.phase)
    }
}

impl Default for Amplitude {
    fn default() -> Self {
        Self::ZERO
    }
}

impl Mul for Amplitude {
    type Output = Amplitude;

    fn mul(self, rhs: Amplitude) -> Amplitude {
        if self.is_zero() || rhs.is_zero() {
            return Amplitude::ZERO;
        }
        Amplitude::from_log_polar(
            self.log_magnitude + rhs.log_magnitude,
            self.phase + rhs.phase,
        )
    }
}

impl Add for Amplitude {
    type Output = Amplitude;

    fn add(self, rhs: Amplitude) -> Amplitude {
        if rhs.is_zero() {
            return self;
        }
        if self.is_zero() {
            return rhs;
        }
        let (big, small) = if self.log_magnitude >= rhs.log_magnitude {
            (self, rhs)
        } else {
            (rhs, self)
        };
        // big · (1 + r·e^{iθ}) with r ≤ 1
        let r = (small.log_magnitude - big.log_magnitude).exp();
        let theta = small.phase - big.phase;
        let (sin, cos) = theta.sin_cos();
        let re = 1.0 + r * cos;
        let im = r * sin;
        let s = 2.0 * r * cos + r * r;
        let log_mod = if s > -0.5 {
            0.5 * s.ln_1p()
        } else {
            re.hypot(im).ln()
        };
        if log_mod == f64::NEG_INFINITY {
            return Amplitude::ZERO;
        }
        Amplitude::from_log_polar(big.log_magnitude + log_mod, big.phase + im.atan2(re))
    }
}

impl Sum for Amplitude {
    fn sum<I: Iterator<Item = Amplitude>>(iter: I) -> Amplitude {
        iter.fold(Amplitude::ZERO, |acc, a| acc + a)
    }
}

impl fmt::Display for Amplitude {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.log_magnitude, self.phase)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_is_absorbing_for_mul_and_neutral_for_add() {
        let a = Amplitude::from_real(0.3);
        assert!((a * Amplitude::ZERO).is_zero());
        assert_eq!(a + Amplitude::ZERO, a);
        assert_eq!(Amplitude::ZERO + a, a);
    }

    #[test]
    fn phases_wrap_into_half_open_interval() {
        assert_eq!(wrap_phase(PI), -PI);
        assert!((wrap_phase(3.0 * PI) + PI).abs() < 1e-12);
        assert!((wrap_phase(-0.25) + 0.25).abs() < 1e-15);
        let a = Amplitude::from_log_polar(0.0, 7.0);
        assert!(a.phase() >= -PI && a.phase() < PI);
    }

    #[test]
    fn exact_cancellation_gives_zero() {
        let a = Amplitude::from_real(0.5);
        let b = Amplitude::from_real(-0.5);
        assert!((a + b).is_zero() || (a + b).log_magnitude() < -30.0);
    }

    #[test]
    fn deep_tails_survive_addition() {
        let a = Amplitude::from_log_polar(-1000.0, 0.0);
        let s = a + a;
        assert!((s.log_magnitude() - (-1000.0 + 2f64.ln())).abs() < 1e-12);
        let tiny = Amplitude::from_log_polar(-1.0e5, 0.0);
        let sum = Amplitude::ONE + tiny;
        assert_eq!(sum.log_magnitude(), 0.0);
    }

    #[test]
    fn log_sum_exp_handles_empty_and_infinite() {
        assert_eq!(log_sum_exp(Vec::<f64>::new()), f64::NEG_INFINITY);
        assert_eq!(log_sum_exp([f64::NEG_INFINITY; 3]), f64::NEG_INFINITY);
        assert!((log_sum_exp([-1000.0, -1000.0]) - (-1000.0 + 2f64.ln())).abs() < 1e-12);
        assert!((log_add_exp(0.0, 0.0) - 2f64.ln()).abs() < 1e-15);
    }
}
