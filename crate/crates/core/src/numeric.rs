//! Scalar helpers shared by every module: the genericity guard, relative
//! error, and a scaled complex number for long products.

use num_complex::Complex64;

use crate::error::{Result, SosError};

pub type C64 = Complex64;

pub const DEFAULT_GUARD_TOL: f64 = 1e-6;

/// Environment variable that overrides the default guard tolerance.
pub const GUARD_ENV: &str = "SOS_GUARD_TOL";

/// Floor used in relative-error denominators.
pub const REL_FLOOR: f64 = 1e-300;

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn sh(z: C64) -> C64 {
    z.sinh()
}

/// Genericity guard: every denominator `sinh(d)` must satisfy `|sinh(d)| > tol`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Guard(pub f64);

impl Default for Guard {
    fn default() -> Self {
        Guard(DEFAULT_GUARD_TOL)
    }
}

impl Guard {
    /// Reads `SOS_GUARD_TOL`, falling back to the default when unset or unparsable.
    pub fn from_env() -> Self {
        std::env::var(GUARD_ENV)
            .ok()
            .and_then(|s| s.trim().parse::<f64>().ok())
            .filter(|v| v.is_finite() && *v >= 0.0)
            .map(Guard)
            .unwrap_or_default()
    }

    pub fn tol(&self) -> f64 {
        self.0
    }

    /// Returns `sinh(arg)` if it clears the guard.
    pub fn sinh<F: FnOnce() -> String>(&self, arg: C64, what: F) -> Result<C64> {
        let s = arg.sinh();
        let modulus = s.norm();
        if modulus > self.0 && modulus.is_finite() {
            Ok(s)
        } else {
            Err(SosError::NearSingular {
                what: what(),
                modulus,
                guard: self.0,
            })
        }
    }

    pub fn is_clear(&self, arg: C64) -> bool {
        let m = arg.sinh().norm();
        m > self.0 && m.is_finite()
    }
}

/// `|a - b| / max(|a|, |b|, 1e-300)`.
pub fn rel_err(a: C64, b: C64) -> f64 {
    let scale = a.norm().max(b.norm()).max(REL_FLOOR);
    (a - b).norm() / scale
}

/// Complex number stored as `mantissa * 2^exp`, for products whose
/// magnitude leaves the f64 range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledComplex {
    mantissa: C64,
    exp: i64,
}

impl Default for ScaledComplex {
    fn default() -> Self {
        Self::one()
    }
}

impl ScaledComplex {
    pub fn one() -> Self {
        ScaledComplex {
            mantissa: C64::new(1.0, 0.0),
            exp: 0,
        }
    }

    pub fn from_c64(z: C64) -> Self {
        let mut s = ScaledComplex { mantissa: z, exp: 0 };
        s.normalize();
        s
    }

    /// Keeps `|mantissa|` in `[1, 2)` by moving powers of two into `exp`.
    fn normalize(&mut self) {
        let m = self.mantissa.norm();
        if m == 0.0 || !m.is_finite() {
            return;
        }
        let e = m.log2().floor() as i64;
        if e != 0 {
            self.mantissa *= pow2(-e);
            self.exp += e;
        }
    }

    pub fn mul(&mut self, z: C64) {
        self.mul_scaled(ScaledComplex::from_c64(z));
    }

    pub fn div(&mut self, z: C64) {
        let d = ScaledComplex::from_c64(z);
        self.mantissa /= d.mantissa;
        self.exp -= d.exp;
        self.normalize();
    }

    pub fn mul_scaled(&mut self, other: ScaledComplex) {
        self.mantissa *= other.mantissa;
        self.exp += other.exp;
        self.normalize();
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa == C64::new(0.0, 0.0)
    }

    /// Natural log of the modulus.
    pub fn ln_abs(&self) -> f64 {
        self.mantissa.norm().ln() + self.exp as f64 * std::f64::consts::LN_2
    }

    /// Collapses to an ordinary complex number; may overflow to infinity or
    /// underflow to zero.
    pub fn to_c64(&self) -> C64 {
        let mut m = self.mantissa;
        let mut e = self.exp;
        while e > 1000 {
            m *= pow2(1000);
            e -= 1000;
        }
        while e < -1000 {
            m *= pow2(-1000);
            e += 1000;
        }
        m * pow2(e)
    }
}

/// `2^e` for `|e| <= 1000`.
fn pow2(e: i64) -> f64 {
    2f64.powi(e as i32)
}
