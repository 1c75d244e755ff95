//! Independent oracles shared by the integration tests: a double-double
//! expression evaluator, central finite differences on top of it, and a
//! random expression generator.
#![allow(dead_code)]

pub mod dd;

use dd::DD;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use subriem::expr::{BinOp, Expr, Func};

/// Finite-difference step for every oracle in the test suite.
pub const FD_STEP: f64 = 1e-5;

/// Arguments closer than this to a singularity are rejected, so the
/// difference stencil never straddles a pole or kink.
const GUARD: f64 = 0.05;

pub fn coords(d: usize) -> Vec<String> {
    ["x", "y", "z", "w"][..d].iter().map(|s| s.to_string()).collect()
}

/// Evaluates `e` in double-double. `None` marks a domain error or an
/// argument too close to a singularity.
pub fn eval_dd(e: &Expr, x: &[DD]) -> Option<DD> {
    let v = match e {
        Expr::Const(c) => DD::from(*c),
        Expr::Var { index, .. } => x[*index],
        Expr::Neg(a) => -eval_dd(a, x)?,
        Expr::Binary { op, lhs, rhs } => {
            let a = eval_dd(lhs, x)?;
            match op {
                BinOp::Add => a + eval_dd(rhs, x)?,
                BinOp::Sub => a - eval_dd(rhs, x)?,
                BinOp::Mul => a * eval_dd(rhs, x)?,
                BinOp::Div => {
                    let b = eval_dd(rhs, x)?;
                    if b.hi.abs() < GUARD {
                        return None;
                    }
                    a / b
                }
                BinOp::Pow => {
                    if rhs.is_constant() {
                        let n = rhs.value(&[]).ok()?;
                        if n.fract() == 0.0 && n.abs() < 64.0 {
                            if n < 0.0 && a.hi.abs() < GUARD {
                                return None;
                            }
                            return finite(a.powi(n as i32));
                        }
                    }
                    if a.hi < GUARD {
                        return None;
                    }
                    (eval_dd(rhs, x)? * a.ln()).exp()
                }
            }
        }
        Expr::Call { func, arg } => {
            let a = eval_dd(arg, x)?;
            match func {
                Func::Sin => a.sin_cos().0,
                Func::Cos => a.sin_cos().1,
                Func::Tan => {
                    let (s, c) = a.sin_cos();
                    if c.hi.abs() < GUARD {
                        return None;
                    }
                    s / c
                }
                Func::Exp => a.exp(),
                Func::Log => {
                    if a.hi < GUARD {
                        return None;
                    }
                    a.ln()
                }
                Func::Sqrt => {
                    if a.hi < GUARD {
                        return None;
                    }
                    a.sqrt()
                }
                Func::Sinh => (a.exp() - (-a).exp()) * DD::from(0.5),
                Func::Cosh => (a.exp() + (-a).exp()) * DD::from(0.5),
                Func::Abs => {
                    if a.hi.abs() < GUARD {
                        return None;
                    }
                    a.abs()
                }
            }
        }
    };
    finite(v)
}

fn finite(v: DD) -> Option<DD> {
    (v.is_finite() && v.hi.abs() < 1e12).then_some(v)
}

/// Value, gradient and Hessian from central differences.
#[derive(Debug, Clone)]
pub struct FdJet {
    pub value: f64,
    pub grad: Vec<f64>,
    pub hess: Vec<Vec<f64>>,
}

/// Central differences of `f` at `x` with step [`FD_STEP`], all arithmetic
/// in double-double.
pub fn fd_jet(f: impl Fn(&[DD]) -> Option<DD>, x: &[f64]) -> Option<FdJet> {
    let d = x.len();
    let h = DD::from(FD_STEP);
    let base: Vec<DD> = x.iter().map(|&v| DD::from(v)).collect();
    let at = |shifts: &[(usize, f64)]| {
        let mut p = base.clone();
        for &(i, s) in shifts {
            p[i] = p[i] + h * DD::from(s);
        }
        f(&p)
    };
    let f0 = at(&[])?;
    let mut grad = vec![0.0; d];
    let mut hess = vec![vec![0.0; d]; d];
    let h2 = h * h;
    for i in 0..d {
        let fp = at(&[(i, 1.0)])?;
        let fm = at(&[(i, -1.0)])?;
        grad[i] = ((fp - fm) / (h * DD::from(2.0))).to_f64();
        hess[i][i] = ((fp - f0 * DD::from(2.0) + fm) / h2).to_f64();
        for j in 0..i {
            let pp = at(&[(i, 1.0), (j, 1.0)])?;
            let pm = at(&[(i, 1.0), (j, -1.0)])?;
            let mp = at(&[(i, -1.0), (j, 1.0)])?;
            let mm = at(&[(i, -1.0), (j, -1.0)])?;
            let v = ((pp - pm - mp + mm) / (h2 * DD::from(4.0))).to_f64();
            hess[i][j] = v;
            hess[j][i] = v;
        }
    }
    Some(FdJet {
        value: f0.to_f64(),
        grad,
        hess,
    })
}

pub fn fd_expr(e: &Expr, x: &[f64]) -> Option<FdJet> {
    fd_jet(|p| eval_dd(e, p), x)
}

/// `|a − b| / max(1, |b|)`.
pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

/// Largest relative error of the dual-number jet of `e` against the
/// finite-difference oracle, or `None` when either side rejects the point.
pub fn jet_vs_fd(e: &Expr, x: &[f64]) -> Option<f64> {
    let fd = fd_expr(e, x)?;
    let jet = e.eval_jet2(x).ok()?;
    let d = x.len();
    let mut worst = rel_err(jet.value, fd.value);
    for i in 0..d {
        worst = worst.max(rel_err(jet.grad[i], fd.grad[i]));
        for j in 0..d {
            worst = worst.max(rel_err(jet.hess(i, j), fd.hess[i][j]));
        }
    }
    Some(worst)
}

/// Random expression trees over `d` coordinates.
pub struct ExprGen {
    rng: ChaCha8Rng,
    names: Vec<String>,
}

impl ExprGen {
    pub fn new(d: usize, seed: u64) -> ExprGen {
        ExprGen {
            rng: ChaCha8Rng::seed_from_u64(seed),
            names: coords(d),
        }
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn expr(&mut self, depth: usize) -> Expr {
        if depth == 0 || self.rng.random_bool(0.25) {
            return self.leaf();
        }
        match self.rng.random_range(0..10) {
            0..=3 => {
                let op = [BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div][self.rng.random_range(0..4)];
                Expr::binary(op, self.expr(depth - 1), self.expr(depth - 1))
            }
            4 => {
                let n = [-2.0, -1.0, 2.0, 3.0, 0.5, 1.5][self.rng.random_range(0..6)];
                Expr::binary(BinOp::Pow, self.expr(depth - 1), Expr::Const(n))
            }
            5 => Expr::Neg(Box::new(self.expr(depth - 1))),
            _ => {
                let func = Func::ALL[self.rng.random_range(0..Func::ALL.len())];
                Expr::Call {
                    func,
                    arg: Box::new(self.expr(depth - 1)),
                }
            }
        }
    }

    fn leaf(&mut self) -> Expr {
        if self.rng.random_bool(0.7) {
            let index = self.rng.random_range(0..self.names.len());
            Expr::Var {
                index,
                name: self.names[index].clone(),
            }
        } else {
            Expr::Const([0.5, 1.0, 2.0, 3.0, 1.25][self.rng.random_range(0..5)])
        }
    }

    pub fn point(&mut self) -> Vec<f64> {
        (0..self.names.len()).map(|_| self.rng.random_range(0.5..1.5)).collect()
    }

    /// Next (expression, point) pair whose value and derivatives stay below
    /// `1e3` in magnitude and whose oracle accepts the point.
    pub fn admissible_pair(&mut self, depth: usize) -> (Expr, Vec<f64>) {
        loop {
            let e = self.expr(depth);
            let x = self.point();
            let Some(fd) = fd_expr(&e, &x) else { continue };
            let tame = fd.value.abs() < 1e3
                && fd.grad.iter().all(|g| g.abs() < 1e3)
                && fd.hess.iter().flatten().all(|h| h.abs() < 1e3);
            if tame && e.eval_jet2(&x).is_ok() {
                return (e, x);
            }
        }
    }
}
