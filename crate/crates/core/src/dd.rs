//! Complex numbers with double-double parts. Used by the brute-force
//! contraction, whose sum over height configurations can cancel many
//! digits once N reaches 7 or 8.

use std::ops::{Add, Div, Mul, Neg, Sub};

use twofloat::{consts, TwoFloat};

use crate::numeric::C64;

pub type DdMat4 = [[DdComplex; 4]; 4];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DdComplex {
    pub re: TwoFloat,
    pub im: TwoFloat,
}

const EXP_SCALE_STEPS: i32 = 10;
const EXP_TERMS: usize = 12;
const TRIG_TERMS: usize = 16;

/// `a / b` by long division on the high words. The quotient operators of
/// `TwoFloat` drop the low word of the reciprocal residual.
pub fn div(a: TwoFloat, b: TwoFloat) -> TwoFloat {
    let q1 = a.hi() / b.hi();
    let r = a - b * q1;
    let q2 = r.hi() / b.hi();
    let r = r - b * q2;
    let q3 = r.hi() / b.hi();
    TwoFloat::new_add(q1, q2) + q3
}

/// `(k, e)` with `exp(x) = 2^k (1 + e)`; `e` keeps full relative accuracy
/// when `k = 0`.
fn exp_parts(x: TwoFloat) -> (i32, TwoFloat) {
    let k = (x.hi() / consts::LN_2.hi()).round();
    let r = (x - consts::LN_2 * k) * 2f64.powi(-EXP_SCALE_STEPS);
    let mut term = r;
    let mut e = r;
    for i in 2..=EXP_TERMS {
        term = term * r / i as f64;
        e += term;
    }
    // (1+e)² - 1 = e(e+2)
    for _ in 0..EXP_SCALE_STEPS {
        e = e * (e + 2.0);
    }
    (k as i32, e)
}

pub fn exp(x: TwoFloat) -> TwoFloat {
    let (k, e) = exp_parts(x);
    (e + 1.0) * 2f64.powi(k)
}

/// `(sinh x, cosh x)`.
pub fn sinh_cosh(x: TwoFloat) -> (TwoFloat, TwoFloat) {
    let (k, e) = exp_parts(x);
    if k == 0 {
        // e^{-x} - 1 = -e/(1+e)
        let f = div(e, e + 1.0);
        ((e + f) / 2.0, (e - f) / 2.0 + 1.0)
    } else {
        let ex = (e + 1.0) * 2f64.powi(k);
        let inv = div(TwoFloat::from(1.0), ex);
        ((ex - inv) / 2.0, (ex + inv) / 2.0)
    }
}

/// `(sin y, cos y)`.
pub fn sin_cos(y: TwoFloat) -> (TwoFloat, TwoFloat) {
    let k = (y.hi() / consts::FRAC_PI_2.hi()).round();
    let r = y - consts::FRAC_PI_2 * k;
    let r2 = r * r;
    let (mut s, mut c) = (r, TwoFloat::from(1.0));
    let (mut ts, mut tc) = (r, TwoFloat::from(1.0));
    for i in 1..=TRIG_TERMS {
        let j = 2.0 * i as f64;
        tc = -tc * r2 / (j * (j - 1.0));
        ts = -ts * r2 / (j * (j + 1.0));
        c += tc;
        s += ts;
    }
    match (k as i64).rem_euclid(4) {
        0 => (s, c),
        1 => (c, -s),
        2 => (-s, -c),
        _ => (-c, s),
    }
}

impl DdComplex {
    pub fn from_c64(z: C64) -> Self {
        DdComplex {
            re: TwoFloat::from(z.re),
            im: TwoFloat::from(z.im),
        }
    }

    pub fn zero() -> Self {
        Self::from_c64(C64::new(0.0, 0.0))
    }

    pub fn to_c64(self) -> C64 {
        C64::new(f64::from(self.re), f64::from(self.im))
    }

    pub fn sinh(self) -> Self {
        let (sx, cx) = sinh_cosh(self.re);
        let (sy, cy) = sin_cos(self.im);
        DdComplex {
            re: sx * cy,
            im: cx * sy,
        }
    }
}

impl From<C64> for DdComplex {
    fn from(z: C64) -> Self {
        Self::from_c64(z)
    }
}

impl Add for DdComplex {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        DdComplex {
            re: self.re + o.re,
            im: self.im + o.im,
        }
    }
}

impl Sub for DdComplex {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        DdComplex {
            re: self.re - o.re,
            im: self.im - o.im,
        }
    }
}

impl Neg for DdComplex {
    type Output = Self;
    fn neg(self) -> Self {
        DdComplex {
            re: -self.re,
            im: -self.im,
        }
    }
}

impl Mul for DdComplex {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        DdComplex {
            re: self.re * o.re - self.im * o.im,
            im: self.re * o.im + self.im * o.re,
        }
    }
}

impl Mul<f64> for DdComplex {
    type Output = Self;
    fn mul(self, k: f64) -> Self {
        DdComplex {
            re: self.re * k,
            im: self.im * k,
        }
    }
}

impl Div for DdComplex {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let d = o.re * o.re + o.im * o.im;
        DdComplex {
            re: div(self.re * o.re + self.im * o.im, d),
            im: div(self.im * o.re - self.re * o.im, d),
        }
    }
}
