//! Scalar expressions over chart coordinates.
//!
//! Expressions are parsed once into an immutable [`Expr`] tree and then
//! evaluated over any [`Scalar`]: plain `f64` for values, [`Dual`] for first
//! partials and `Dual<Dual<f64>>` for exact second partials.
//!
//! ```
//! use subriem::expr::parse;
//! let coords = ["x".to_string(), "y".to_string(), "z".to_string()];
//! let e = parse("(x^2+y^2)/4", &coords).unwrap();
//! let jet = e.eval_jet2(&[2.0, 0.0, 0.0]).unwrap();
//! assert_eq!(jet.value, 1.0);
//! assert_eq!(jet.grad[0], 1.0);
//! assert_eq!(jet.hess(0, 0), 0.5);
//! ```

mod dual;
mod jet;
mod parser;

use std::fmt;

pub use dual::{Dual, Hyper, Scalar};
pub use jet::{Jet1, Jet2};

use crate::error::{DomainError, ParseError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
            BinOp::Pow => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Sinh,
    Cosh,
    Abs,
}

impl Func {
    pub const ALL: [Func; 9] = [
        Func::Sin,
        Func::Cos,
        Func::Tan,
        Func::Exp,
        Func::Log,
        Func::Sqrt,
        Func::Sinh,
        Func::Cosh,
        Func::Abs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Abs => "abs",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }
}

/// Parsed arithmetic expression. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    /// Coordinate number `index` of the chart the expression was parsed in.
    Var { index: usize, name: String },
    Neg(Box<Expr>),
    Binary {
        op: BinOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    Call { func: Func, arg: Box<Expr> },
}

/// Parses `source` with `coords` as the only admissible variable names.
pub fn parse(source: &str, coords: &[String]) -> Result<Expr, ParseError> {
    parser::Parser::new(source, coords)?.parse_all()
}

/// Names that cannot be used as coordinates.
pub fn is_reserved(name: &str) -> bool {
    name == "pi" || Func::from_name(name).is_some()
}

impl Expr {
    pub fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Binary {
            op,
            lhs: Box::new(lhs),
            rhs: Box::new(rhs),
        }
    }

    /// True when no coordinate occurs in the tree.
    pub fn is_constant(&self) -> bool {
        match self {
            Expr::Const(_) => true,
            Expr::Var { .. } => false,
            Expr::Neg(e) => e.is_constant(),
            Expr::Binary { lhs, rhs, .. } => lhs.is_constant() && rhs.is_constant(),
            Expr::Call { arg, .. } => arg.is_constant(),
        }
    }

    /// Largest coordinate index referenced, if any.
    pub fn max_variable(&self) -> Option<usize> {
        match self {
            Expr::Const(_) => None,
            Expr::Var { index, .. } => Some(*index),
            Expr::Neg(e) | Expr::Call { arg: e, .. } => e.max_variable(),
            Expr::Binary { lhs, rhs, .. } => lhs.max_variable().max(rhs.max_variable()),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Const(v) if *v < 0.0 => 3,
            Expr::Neg(_) => 3,
            Expr::Binary { op, .. } => op.precedence(),
            _ => 5,
        }
    }

    /// Evaluates at `x`, one entry per chart coordinate.
    pub fn eval<S: Scalar>(&self, x: &[S]) -> Result<S, DomainError> {
        let value = match self {
            Expr::Const(c) => S::constant(*c),
            Expr::Var { index, .. } => x[*index].clone(),
            Expr::Neg(e) => -e.eval(x)?,
            Expr::Binary { op, lhs, rhs } => {
                let a = lhs.eval(x)?;
                match op {
                    BinOp::Add => a + rhs.eval(x)?,
                    BinOp::Sub => a - rhs.eval(x)?,
                    BinOp::Mul => a * rhs.eval(x)?,
                    BinOp::Div => {
                        let b = rhs.eval(x)?;
                        if b.re() == 0.0 {
                            return Err(self.domain_error(x, "division by zero"));
                        }
                        a / b
                    }
                    BinOp::Pow => self.eval_pow(a, rhs, x)?,
                }
            }
            Expr::Call { func, arg } => {
                let a = arg.eval(x)?;
                let r = a.re();
                match func {
                    Func::Sin => a.sin(),
                    Func::Cos => a.cos(),
                    Func::Tan => {
                        if r.cos() == 0.0 {
                            return Err(self.domain_error(x, "tangent pole"));
                        }
                        a.tan()
                    }
                    Func::Exp => a.exp(),
                    Func::Log => {
                        if r <= 0.0 {
                            return Err(self.domain_error(x, "log of a non-positive value"));
                        }
                        a.ln()
                    }
                    Func::Sqrt => {
                        if r <= 0.0 {
                            return Err(self.domain_error(x, "sqrt of a non-positive value"));
                        }
                        a.sqrt()
                    }
                    Func::Sinh => a.sinh(),
                    Func::Cosh => a.cosh(),
                    Func::Abs => {
                        if r == 0.0 {
                            return Err(self.domain_error(x, "abs is not differentiable at 0"));
                        }
                        a.abs()
                    }
                }
            }
        };
        if !value.re().is_finite() {
            return Err(self.domain_error(x, "non-finite value"));
        }
        Ok(value)
    }

    /// Constant integer exponents use repeated multiplication and accept any
    /// base; everything else goes through `exp(b·log a)` and needs `a > 0`.
    fn eval_pow<S: Scalar>(&self, base: S, exponent: &Expr, x: &[S]) -> Result<S, DomainError> {
        if exponent.is_constant() {
            let n: f64 = exponent.eval::<f64>(&[])?;
            if n.fract() == 0.0 && n.abs() <= i32::MAX as f64 {
                let n = n as i64;
                if n < 0 && base.re() == 0.0 {
                    return Err(self.domain_error(x, "negative power of zero"));
                }
                return Ok(base.powi(n));
            }
        }
        if base.re() <= 0.0 {
            return Err(self.domain_error(x, "non-integer power of a non-positive base"));
        }
        let b = exponent.eval(x)?;
        Ok((b * base.ln()).exp())
    }

    fn domain_error<S: Scalar>(&self, x: &[S], reason: &str) -> DomainError {
        DomainError {
            expr: self.to_string(),
            point: x.iter().map(Scalar::re).collect(),
            reason: reason.to_string(),
        }
    }

    pub fn value(&self, x: &[f64]) -> Result<f64, DomainError> {
        self.eval(x)
    }

    /// Value and gradient, one dual-number pass per coordinate.
    pub fn eval_jet1(&self, x: &[f64]) -> Result<Jet1, DomainError> {
        let d = x.len();
        let mut grad = vec![0.0; d];
        let mut value = self.value(x)?;
        for (l, g) in grad.iter_mut().enumerate() {
            let seeded: Vec<Dual<f64>> = (0..d)
                .map(|k| Dual::new(x[k], if k == l { 1.0 } else { 0.0 }))
                .collect();
            let r = self.eval(&seeded)?;
            value = r.re;
            *g = r.eps;
        }
        Ok(Jet1 { value, grad })
    }

    /// Exact value, gradient and Hessian via nested dual numbers: one
    /// `Dual<Dual<f64>>` pass per index pair `i ≤ j`.
    pub fn eval_jet2(&self, x: &[f64]) -> Result<Jet2, DomainError> {
        let d = x.len();
        let mut jet = Jet2::constant(self.value(x)?, d);
        for i in 0..d {
            for j in i..d {
                let r = self.eval(&seed_pair(x, i, j))?;
                jet.grad[j] = r.re.eps;
                jet.grad[i] = r.eps.re;
                jet.set_hess(i, j, r.eps.eps);
            }
        }
        if !jet.is_finite() {
            return Err(self.domain_error(x, "non-finite derivative"));
        }
        Ok(jet)
    }

    /// `∂²/∂x^outer ∂x^inner` with `outer` carried by the outer dual layer.
    /// Swapping the arguments swaps the nesting order.
    pub fn mixed_partial(&self, x: &[f64], outer: usize, inner: usize) -> Result<f64, DomainError> {
        Ok(self.eval(&seed_pair(x, outer, inner))?.eps.eps)
    }
}

fn seed_pair(x: &[f64], outer: usize, inner: usize) -> Vec<Dual<Dual<f64>>> {
    (0..x.len())
        .map(|k| {
            let a = if k == inner { 1.0 } else { 0.0 };
            let b = if k == outer { 1.0 } else { 0.0 };
            Dual::new(Dual::new(x[k], a), Dual::new(b, 0.0))
        })
        .collect()
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn child(f: &mut fmt::Formatter<'_>, e: &Expr, min: u8) -> fmt::Result {
            if e.precedence() < min {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        }
        match self {
            Expr::Const(v) if *v == std::f64::consts::PI => write!(f, "pi"),
            Expr::Const(v) if *v < 0.0 => write!(f, "-{}", -v),
            Expr::Const(v) => write!(f, "{v}"),
            Expr::Var { name, .. } => write!(f, "{name}"),
            Expr::Neg(e) => {
                write!(f, "-")?;
                child(f, e, 3)
            }
            Expr::Binary { op, lhs, rhs } => {
                let p = op.precedence();
                match op {
                    BinOp::Pow => {
                        child(f, lhs, 5)?;
                        write!(f, "^")?;
                        child(f, rhs, 3)
                    }
                    _ => {
                        child(f, lhs, p)?;
                        write!(f, " {} ", op.symbol())?;
                        child(f, rhs, p + 1)
                    }
                }
            }
            Expr::Call { func, arg } => write!(f, "{}({arg})", func.name()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xyz() -> Vec<String> {
        ["x", "y", "z"].iter().map(|s| s.to_string()).collect()
    }

    fn var(i: usize, n: &str) -> Expr {
        Expr::Var {
            index: i,
            name: n.into(),
        }
    }

    #[test]
    fn parses_function_call() {
        let coords: Vec<String> = ["theta", "phi", "psi"].iter().map(|s| s.to_string()).collect();
        let e = parse("cos(psi)", &coords).unwrap();
        assert_eq!(
            e,
            Expr::Call {
                func: Func::Cos,
                arg: Box::new(var(2, "psi"))
            }
        );
    }

    #[test]
    fn unary_minus_binds_tighter_than_division() {
        let e = parse("-y/2", &xyz()).unwrap();
        assert_eq!(
            e,
            Expr::binary(BinOp::Div, Expr::Neg(Box::new(var(1, "y"))), Expr::Const(2.0))
        );
    }

    #[test]
    fn heisenberg_cometric_entry() {
        let e = parse("(x^2+y^2)/4", &xyz()).unwrap();
        let sq = |i, n| Expr::binary(BinOp::Pow, var(i, n), Expr::Const(2.0));
        let expected = Expr::binary(
            BinOp::Div,
            Expr::binary(BinOp::Add, sq(0, "x"), sq(1, "y")),
            Expr::Const(4.0),
        );
        assert_eq!(e, expected);
    }

    #[test]
    fn power_is_right_associative_and_above_negation() {
        let e = parse("-x^2^3", &xyz()).unwrap();
        let inner = Expr::binary(BinOp::Pow, Expr::Const(2.0), Expr::Const(3.0));
        assert_eq!(
            e,
            Expr::Neg(Box::new(Expr::binary(BinOp::Pow, var(0, "x"), inner)))
        );
        let e = parse("x^-2", &xyz()).unwrap();
        assert_eq!(
            e,
            Expr::binary(BinOp::Pow, var(0, "x"), Expr::Neg(Box::new(Expr::Const(2.0))))
        );
    }

    #[test]
    fn scientific_numbers_and_pi() {
        let e = parse("1.5e-3 + .25E2 * pi", &xyz()).unwrap();
        assert!((e.value(&[0.0; 3]).unwrap() - (1.5e-3 + 25.0 * std::f64::consts::PI)).abs() < 1e-12);
    }

    #[test]
    fn parse_errors_carry_positions() {
        let c = xyz();
        match parse("x + w", &c) {
            Err(ParseError::UnknownIdentifier { name, position }) => {
                assert_eq!(name, "w");
                assert_eq!(position, 4);
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse("foo(x)", &c),
            Err(ParseError::UnknownFunction { position: 0, .. })
        ));
        assert!(matches!(parse("(x + 1", &c), Err(ParseError::Syntax { position: 6, .. })));
        assert!(matches!(parse("x * * y", &c), Err(ParseError::Syntax { position: 4, .. })));
        assert!(matches!(parse("", &c), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse("   ", &c), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse("1e", &c), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse("x y", &c), Err(ParseError::Syntax { position: 2, .. })));
        assert!(matches!(parse("sin x", &c), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse("1e999", &c), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse("x # 1", &c), Err(ParseError::Syntax { position: 2, .. })));
    }

    #[test]
    fn display_reparses_to_same_tree() {
        let c = xyz();
        for src in [
            "-y/2",
            "(x^2+y^2)/4",
            "x - (y - z)",
            "x / (y * z)",
            "(-x)^2",
            "-x^2",
            "(x^y)^z",
            "x^y^z",
            "2^-1",
            "--x",
            "sin(x)*cos(-y) - exp(z)/sqrt(x)",
            "1.5e-300 + pi",
        ] {
            let e = parse(src, &c).unwrap();
            let again = parse(&e.to_string(), &c).unwrap();
            assert_eq!(e, again, "{src} -> {e}");
        }
    }

    #[test]
    fn jet_of_sine_at_origin() {
        let coords = vec!["theta".to_string()];
        let j = parse("sin(theta)", &coords).unwrap().eval_jet2(&[0.0]).unwrap();
        assert_eq!((j.value, j.grad[0], j.hess(0, 0)), (0.0, 1.0, 0.0));
    }

    #[test]
    fn jet_of_inverse_square_sine() {
        let coords = vec!["theta".to_string()];
        let e = parse("1/sin(theta)^2", &coords).unwrap();
        let t = std::f64::consts::FRAC_PI_2;
        let j = e.eval_jet2(&[t]).unwrap();
        assert!((j.value - 1.0).abs() < 1e-15);
        assert!(j.grad[0].abs() < 1e-15);
        // central difference oracle, h = 1e-5
        let h = 1e-5;
        let fd = (e.value(&[t + h]).unwrap() - e.value(&[t - h]).unwrap()) / (2.0 * h);
        assert!((fd - j.grad[0]).abs() < 1e-8);
    }

    #[test]
    fn jet_of_polynomial() {
        let j = parse("x^2/4", &xyz()).unwrap().eval_jet2(&[2.0, 0.0, 0.0]).unwrap();
        assert_eq!((j.value, j.grad[0], j.hess(0, 0)), (1.0, 1.0, 0.5));
        assert_eq!(j.grad[1], 0.0);
        assert_eq!(j.hess(0, 1), 0.0);
    }

    #[test]
    fn mixed_partials_of_product() {
        let e = parse("x*y*z + sin(x*z)", &xyz()).unwrap();
        let p = [0.3, -1.2, 0.8];
        let j = e.eval_jet2(&p).unwrap();
        let expect_xz = p[1] + (0.3f64 * 0.8).cos() - 0.3 * 0.8 * (0.3f64 * 0.8).sin();
        assert!((j.hess(0, 2) - expect_xz).abs() < 1e-14);
        assert_eq!(j.hess(0, 2), j.hess(2, 0));
        assert_eq!(e.mixed_partial(&p, 0, 2).unwrap(), e.mixed_partial(&p, 2, 0).unwrap());
    }

    #[test]
    fn integer_power_of_negative_base() {
        let e = parse("x^3 + x^-2", &xyz()).unwrap();
        let j = e.eval_jet2(&[-2.0, 0.0, 0.0]).unwrap();
        assert!((j.value - (-8.0 + 0.25)).abs() < 1e-15);
        assert!((j.grad[0] - (12.0 + 0.25)).abs() < 1e-14);
    }

    #[test]
    fn domain_errors_name_the_subexpression() {
        let c = xyz();
        let err = parse("1 + log(y)", &c).unwrap().value(&[1.0, -1.0, 0.0]).unwrap_err();
        assert_eq!(err.expr, "log(y)");
        assert_eq!(err.point, vec![1.0, -1.0, 0.0]);
        assert!(parse("1/x", &c).unwrap().eval_jet2(&[0.0, 1.0, 1.0]).is_err());
        assert!(parse("sqrt(x)", &c).unwrap().value(&[0.0, 0.0, 0.0]).is_err());
        assert!(parse("x^0.5", &c).unwrap().value(&[-1.0, 0.0, 0.0]).is_err());
        assert!(parse("x^y", &c).unwrap().value(&[-1.0, 2.0, 0.0]).is_err());
        assert!(parse("abs(x)", &c).unwrap().eval_jet2(&[0.0, 0.0, 0.0]).is_err());
        assert!(parse("exp(exp(x))", &c).unwrap().value(&[10.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn jet1_agrees_with_jet2_gradient() {
        let e = parse("exp(x)*cosh(y) - tan(z)/sinh(x) + abs(y)", &xyz()).unwrap();
        let p = [0.4, -0.7, 0.3];
        let j1 = e.eval_jet1(&p).unwrap();
        let j2 = e.eval_jet2(&p).unwrap();
        assert_eq!(j1.value, j2.value);
        for l in 0..3 {
            assert!((j1.grad[l] - j2.grad[l]).abs() < 1e-14);
        }
    }
}
