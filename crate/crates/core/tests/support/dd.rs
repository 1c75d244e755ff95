//! Double-double arithmetic (about 32 significant digits), used only to
//! evaluate finite-difference oracles with negligible rounding error.

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DD {
    pub hi: f64,
    pub lo: f64,
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

const LN2: DD = DD {
    hi: std::f64::consts::LN_2,
    lo: 2.319_046_813_846_299_6e-17,
};
pub const PI: DD = DD {
    hi: std::f64::consts::PI,
    lo: 1.224_646_799_147_353_2e-16,
};

impl DD {
    pub const ZERO: DD = DD { hi: 0.0, lo: 0.0 };
    pub const ONE: DD = DD { hi: 1.0, lo: 0.0 };

    pub fn from(v: f64) -> DD {
        DD { hi: v, lo: 0.0 }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn is_finite(self) -> bool {
        self.hi.is_finite() && self.lo.is_finite()
    }

    fn scale(self, s: f64) -> DD {
        // exact for powers of two
        DD {
            hi: self.hi * s,
            lo: self.lo * s,
        }
    }

    pub fn abs(self) -> DD {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    pub fn sqrt(self) -> DD {
        if self.hi == 0.0 {
            return DD::ZERO;
        }
        let x = self.hi.sqrt();
        let q = DD::from(x);
        let r = self - q * q;
        q + DD::from(r.hi / (2.0 * x))
    }

    pub fn exp(self) -> DD {
        let k = (self.hi / LN2.hi).round();
        let r = (self - LN2 * DD::from(k)).scale(1.0 / 1024.0);
        // Taylor series of exp(r) − 1 for |r| < 4e-4
        let mut term = r;
        let mut sum = r;
        for n in 2..20 {
            term = term * r / DD::from(n as f64);
            sum = sum + term;
            if term.hi.abs() < 1e-36 {
                break;
            }
        }
        // (1 + s)^2 − 1 = s(2 + s), repeated, keeps the small part exact
        for _ in 0..10 {
            sum = sum * (sum + DD::from(2.0));
        }
        (sum + DD::ONE).scale(2f64.powi(k as i32))
    }

    pub fn ln(self) -> DD {
        let y = DD::from(self.hi.ln());
        // one Newton step on exp(y) = x doubles the digits
        y + self * (-y).exp() - DD::ONE
    }

    /// Reduces to `|r| ≤ π` and sums the Taylor series for (sin, cos).
    pub fn sin_cos(self) -> (DD, DD) {
        let two_pi = PI.scale(2.0);
        let k = (self.hi / two_pi.hi).round();
        let r = self - two_pi * DD::from(k);
        let r2 = r * r;
        let mut s = r;
        let mut c = DD::ONE;
        let mut ts = r;
        let mut tc = DD::ONE;
        for n in 1..40 {
            let n = n as f64;
            ts = -(ts * r2) / DD::from((2.0 * n) * (2.0 * n + 1.0));
            tc = -(tc * r2) / DD::from((2.0 * n - 1.0) * (2.0 * n));
            s = s + ts;
            c = c + tc;
            if ts.hi.abs() < 1e-36 && tc.hi.abs() < 1e-36 {
                break;
            }
        }
        (s, c)
    }

    pub fn powi(self, n: i32) -> DD {
        let mut base = if n < 0 { DD::ONE / self } else { self };
        let mut e = n.unsigned_abs();
        let mut acc = DD::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        acc
    }
}

impl Add for DD {
    type Output = DD;
    fn add(self, b: DD) -> DD {
        let (s, e) = two_sum(self.hi, b.hi);
        let (t, f) = two_sum(self.lo, b.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        DD { hi, lo }
    }
}

impl Neg for DD {
    type Output = DD;
    fn neg(self) -> DD {
        DD {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Sub for DD {
    type Output = DD;
    fn sub(self, b: DD) -> DD {
        self + (-b)
    }
}

impl Mul for DD {
    type Output = DD;
    fn mul(self, b: DD) -> DD {
        let (p, e) = two_prod(self.hi, b.hi);
        let (hi, lo) = quick_two_sum(p, e + (self.hi * b.lo + self.lo * b.hi));
        DD { hi, lo }
    }
}

impl Div for DD {
    type Output = DD;
    fn div(self, b: DD) -> DD {
        let q1 = self.hi / b.hi;
        let r = self - b * DD::from(q1);
        let q2 = r.hi / b.hi;
        let r = r - b * DD::from(q2);
        let q3 = r.hi / b.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        DD { hi, lo } + DD::from(q3)
    }
}
