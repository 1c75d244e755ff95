//! Number types the expression evaluator is generic over.
//!
//! [`Dual`] is the classic forward-mode dual number `a + b ε` with `ε² = 0`.
//! Nesting it (`Dual<Dual<f64>>`) carries two independent infinitesimals and
//! yields exact mixed second partials. [`Hyper`] is the same idea with a
//! number of infinitesimals chosen at runtime, needed for iterated Lie
//! brackets whose depth is only known when the query arrives.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Arithmetic plus the elementary functions of the expression grammar.
///
/// `re` is the real (non-infinitesimal) part, used for domain decisions.
pub trait Scalar:
    Clone
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn constant(c: f64) -> Self;
    fn re(&self) -> f64;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn exp(&self) -> Self;
    fn ln(&self) -> Self;
    fn sqrt(&self) -> Self;
    fn sinh(&self) -> Self;
    fn cosh(&self) -> Self;

    fn tan(&self) -> Self {
        self.sin() / self.cos()
    }

    /// `|x|` for `x.re() != 0`; the caller rules out the kink.
    fn abs(&self) -> Self {
        if self.re() < 0.0 {
            -self.clone()
        } else {
            self.clone()
        }
    }

    fn scale(&self, c: f64) -> Self {
        self.clone() * Self::constant(c)
    }

    /// Integer power by repeated squaring. Negative exponents take a
    /// reciprocal, so the caller must rule out a zero base.
    fn powi(&self, n: i64) -> Self {
        let mut base = self.clone();
        let mut k = n.unsigned_abs();
        let mut acc = Self::constant(1.0);
        while k > 0 {
            if k & 1 == 1 {
                acc = acc * base.clone();
            }
            k >>= 1;
            if k > 0 {
                base = base.clone() * base;
            }
        }
        if n < 0 {
            Self::constant(1.0) / acc
        } else {
            acc
        }
    }
}

impl Scalar for f64 {
    fn constant(c: f64) -> Self {
        c
    }
    fn re(&self) -> f64 {
        *self
    }
    fn sin(&self) -> Self {
        f64::sin(*self)
    }
    fn cos(&self) -> Self {
        f64::cos(*self)
    }
    fn tan(&self) -> Self {
        f64::tan(*self)
    }
    fn exp(&self) -> Self {
        f64::exp(*self)
    }
    fn ln(&self) -> Self {
        f64::ln(*self)
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    fn sinh(&self) -> Self {
        f64::sinh(*self)
    }
    fn cosh(&self) -> Self {
        f64::cosh(*self)
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
}

/// `re + eps·ε` with `ε² = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dual<T> {
    pub re: T,
    pub eps: T,
}

impl<T: Scalar> Dual<T> {
    pub fn new(re: T, eps: T) -> Self {
        Dual { re, eps }
    }

    /// A value whose derivative along the seeded direction is one.
    pub fn variable(re: T) -> Self {
        Dual {
            re,
            eps: T::constant(1.0),
        }
    }

    fn chain(&self, value: T, derivative: T) -> Self {
        Dual {
            re: value,
            eps: self.eps.clone() * derivative,
        }
    }
}

impl<T: Scalar> Add for Dual<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Dual::new(self.re + rhs.re, self.eps + rhs.eps)
    }
}

impl<T: Scalar> Sub for Dual<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Dual::new(self.re - rhs.re, self.eps - rhs.eps)
    }
}

impl<T: Scalar> Mul for Dual<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let eps = self.re.clone() * rhs.eps + self.eps * rhs.re.clone();
        Dual::new(self.re * rhs.re, eps)
    }
}

impl<T: Scalar> Div for Dual<T> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        let re = self.re.clone() / rhs.re.clone();
        let eps = (self.eps - re.clone() * rhs.eps) / rhs.re;
        Dual::new(re, eps)
    }
}

impl<T: Scalar> Neg for Dual<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Dual::new(-self.re, -self.eps)
    }
}

impl<T: Scalar> Scalar for Dual<T> {
    fn constant(c: f64) -> Self {
        Dual::new(T::constant(c), T::constant(0.0))
    }
    fn re(&self) -> f64 {
        self.re.re()
    }
    fn sin(&self) -> Self {
        self.chain(self.re.sin(), self.re.cos())
    }
    fn cos(&self) -> Self {
        self.chain(self.re.cos(), -self.re.sin())
    }
    fn tan(&self) -> Self {
        let t = self.re.tan();
        let dt = T::constant(1.0) + t.clone() * t.clone();
        self.chain(t, dt)
    }
    fn exp(&self) -> Self {
        let e = self.re.exp();
        self.chain(e.clone(), e)
    }
    fn ln(&self) -> Self {
        self.chain(self.re.ln(), T::constant(1.0) / self.re.clone())
    }
    fn sqrt(&self) -> Self {
        let s = self.re.sqrt();
        let ds = T::constant(0.5) / s.clone();
        self.chain(s, ds)
    }
    fn sinh(&self) -> Self {
        self.chain(self.re.sinh(), self.re.cosh())
    }
    fn cosh(&self) -> Self {
        self.chain(self.re.cosh(), self.re.sinh())
    }
}

/// Multi-dual number with `k` nilpotent generators `ε_0..ε_{k-1}`
/// (`ε_i² = 0`, generators commute).
///
/// Coefficient `c[mask]` multiplies the product of the generators whose bits
/// are set in `mask`; `c.len()` is always a power of two and a shorter vector
/// means the higher generators have zero coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyper {
    c: Vec<f64>,
}

impl Hyper {
    pub fn coefficients(&self) -> &[f64] {
        &self.c
    }

    fn padded(&self, len: usize) -> Vec<f64> {
        let mut v = self.c.clone();
        v.resize(len.max(v.len()), 0.0);
        v
    }

    /// `self + ε_level · direction`, where neither operand may already use
    /// generator `level` or any above it.
    pub fn perturb(&self, level: usize, direction: &Hyper) -> Hyper {
        let half = 1usize << level;
        debug_assert!(self.c.len() <= half && direction.c.len() <= half);
        let mut c = self.padded(half);
        c.extend(direction.padded(half));
        Hyper { c }
    }

    /// Splits off the coefficient of `ε_level`: returns `(value, derivative)`
    /// with both parts free of generators from `level` upward.
    pub fn split(&self, level: usize) -> (Hyper, Hyper) {
        let half = 1usize << level;
        let c = self.padded(2 * half);
        (
            Hyper {
                c: c[..half].to_vec(),
            },
            Hyper {
                c: c[half..2 * half].to_vec(),
            },
        )
    }

    fn halves(&self) -> Option<(Hyper, Hyper)> {
        if self.c.len() == 1 {
            return None;
        }
        let level = self.c.len().trailing_zeros() as usize - 1;
        Some(self.split(level))
    }

    fn join(lo: Hyper, hi: Hyper) -> Hyper {
        let half = lo.c.len().max(hi.c.len());
        let mut c = lo.padded(half);
        c.extend(hi.padded(half));
        Hyper { c }
    }

    /// `f(lo + ε hi) = f(lo) + ε · hi · f'(lo)`, recursing on the top
    /// generator until only the real part is left.
    fn lift(&self, f: fn(f64) -> f64, df: fn(&Hyper) -> Hyper) -> Hyper {
        match self.halves() {
            None => Hyper {
                c: vec![f(self.c[0])],
            },
            Some((lo, hi)) => {
                let value = lo.lift(f, df);
                let slope = hi * df(&lo);
                Hyper::join(value, slope)
            }
        }
    }

    fn recip(&self) -> Hyper {
        self.lift(|v| 1.0 / v, |lo| {
            let r = lo.recip();
            -(r.clone() * r)
        })
    }
}

impl Add for Hyper {
    type Output = Hyper;
    fn add(self, rhs: Hyper) -> Hyper {
        let len = self.c.len().max(rhs.c.len());
        let (a, b) = (self.padded(len), rhs.padded(len));
        Hyper {
            c: a.iter().zip(&b).map(|(x, y)| x + y).collect(),
        }
    }
}

impl Sub for Hyper {
    type Output = Hyper;
    fn sub(self, rhs: Hyper) -> Hyper {
        self + (-rhs)
    }
}

impl Neg for Hyper {
    type Output = Hyper;
    fn neg(self) -> Hyper {
        Hyper {
            c: self.c.iter().map(|v| -v).collect(),
        }
    }
}

impl Mul for Hyper {
    type Output = Hyper;
    fn mul(self, rhs: Hyper) -> Hyper {
        let len = self.c.len().max(rhs.c.len());
        let (a, b) = (self.padded(len), rhs.padded(len));
        let mut c = vec![0.0; len];
        for (mask, out) in c.iter_mut().enumerate() {
            // subset convolution: sum over sub ⊆ mask of a[sub]·b[mask∖sub]
            let mut sub = mask;
            loop {
                *out += a[sub] * b[mask ^ sub];
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & mask;
            }
        }
        Hyper { c }
    }
}

impl Div for Hyper {
    type Output = Hyper;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: Hyper) -> Hyper {
        self * rhs.recip()
    }
}

impl Scalar for Hyper {
    fn constant(c: f64) -> Self {
        Hyper { c: vec![c] }
    }
    fn re(&self) -> f64 {
        self.c[0]
    }
    fn sin(&self) -> Self {
        self.lift(f64::sin, |lo| lo.cos())
    }
    fn cos(&self) -> Self {
        self.lift(f64::cos, |lo| -lo.sin())
    }
    fn exp(&self) -> Self {
        self.lift(f64::exp, |lo| lo.exp())
    }
    fn ln(&self) -> Self {
        self.lift(f64::ln, |lo| lo.recip())
    }
    fn sqrt(&self) -> Self {
        self.lift(f64::sqrt, |lo| lo.sqrt().recip().scale(0.5))
    }
    fn sinh(&self) -> Self {
        self.lift(f64::sinh, |lo| lo.cosh())
    }
    fn cosh(&self) -> Self {
        self.lift(f64::cosh, |lo| lo.sinh())
    }
}
