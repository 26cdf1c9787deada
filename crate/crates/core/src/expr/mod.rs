//! Arithmetic expressions in the parameters `(u, v)` with exact second-order jets.

mod jet;
mod parse;

use std::fmt;
use std::ops;

use thiserror::Error;

pub use jet::{atan2 as jet_atan2, Jet2};
pub use parse::{parse, ParseError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Var {
    U,
    V,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Sinh,
    Cosh,
    Tanh,
    Atan2,
}

impl Func {
    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            "tanh" => Func::Tanh,
            "atan2" => Func::Atan2,
            _ => return None,
        })
    }

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
            Func::Tanh => "tanh",
            Func::Atan2 => "atan2",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Func::Atan2 => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(Var),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("{reason} in `{subexpr}`")]
pub struct EvalError {
    pub subexpr: String,
    pub reason: &'static str,
}

/// Integer exponents are evaluated with `powi` and accept any base.
fn integer_exponent(e: &Expr) -> Option<i32> {
    match e {
        Expr::Num(x) if x.fract() == 0.0 && x.abs() <= i32::MAX as f64 => Some(*x as i32),
        _ => None,
    }
}

impl Expr {
    pub fn num(x: f64) -> Expr {
        Expr::Num(x)
    }

    pub fn u() -> Expr {
        Expr::Var(Var::U)
    }

    pub fn v() -> Expr {
        Expr::Var(Var::V)
    }

    pub fn call(f: Func, args: Vec<Expr>) -> Expr {
        debug_assert_eq!(args.len(), f.arity());
        Expr::Call(f, args)
    }

    pub fn apply(self, f: Func) -> Expr {
        Expr::call(f, vec![self])
    }

    pub fn pow(self, exponent: Expr) -> Expr {
        Expr::Bin(BinOp::Pow, Box::new(self), Box::new(exponent))
    }

    pub fn powi(self, n: i32) -> Expr {
        let exponent = if n < 0 {
            Expr::Neg(Box::new(Expr::Num(-(n as f64))))
        } else {
            Expr::Num(n as f64)
        };
        self.pow(exponent)
    }

    pub fn uses_var(&self, var: Var) -> bool {
        match self {
            Expr::Num(_) => false,
            Expr::Var(v) => *v == var,
            Expr::Neg(a) => a.uses_var(var),
            Expr::Bin(_, a, b) => a.uses_var(var) || b.uses_var(var),
            Expr::Call(_, args) => args.iter().any(|a| a.uses_var(var)),
        }
    }

    /// Every occurrence of `u` replaced by `replacement`.
    pub fn substitute_u(&self, replacement: &Expr) -> Expr {
        match self {
            Expr::Var(Var::U) => replacement.clone(),
            Expr::Num(_) | Expr::Var(Var::V) => self.clone(),
            Expr::Neg(a) => Expr::Neg(Box::new(a.substitute_u(replacement))),
            Expr::Bin(op, a, b) => Expr::Bin(
                *op,
                Box::new(a.substitute_u(replacement)),
                Box::new(b.substitute_u(replacement)),
            ),
            Expr::Call(f, args) => Expr::Call(
                *f,
                args.iter().map(|a| a.substitute_u(replacement)).collect(),
            ),
        }
    }

    fn fail<T>(&self, reason: &'static str) -> Result<T, EvalError> {
        Err(EvalError {
            subexpr: self.to_string(),
            reason,
        })
    }

    fn check(&self, x: f64) -> Result<f64, EvalError> {
        if x.is_finite() {
            Ok(x)
        } else {
            self.fail("non-finite result")
        }
    }

    /// Plain value at `(u, v)`.
    pub fn eval(&self, u: f64, v: f64) -> Result<f64, EvalError> {
        let out = match self {
            Expr::Num(x) => *x,
            Expr::Var(Var::U) => u,
            Expr::Var(Var::V) => v,
            Expr::Neg(a) => -a.eval(u, v)?,
            Expr::Bin(op, a, b) => {
                let x = a.eval(u, v)?;
                match op {
                    BinOp::Add => x + b.eval(u, v)?,
                    BinOp::Sub => x - b.eval(u, v)?,
                    BinOp::Mul => x * b.eval(u, v)?,
                    BinOp::Div => {
                        let y = b.eval(u, v)?;
                        if y == 0.0 {
                            return self.fail("division by zero");
                        }
                        x / y
                    }
                    BinOp::Pow => match integer_exponent(b) {
                        Some(n) => {
                            if x == 0.0 && n < 0 {
                                return self.fail("zero to a negative power");
                            }
                            x.powi(n)
                        }
                        None => {
                            if x <= 0.0 {
                                return self.fail("non-positive base with real exponent");
                            }
                            x.powf(b.eval(u, v)?)
                        }
                    },
                }
            }
            Expr::Call(f, args) => {
                let x = args[0].eval(u, v)?;
                match f {
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Tan => x.tan(),
                    Func::Exp => x.exp(),
                    Func::Log => {
                        if x <= 0.0 {
                            return self.fail("log of non-positive value");
                        }
                        x.ln()
                    }
                    Func::Sqrt => {
                        if x < 0.0 {
                            return self.fail("sqrt of negative value");
                        }
                        x.sqrt()
                    }
                    Func::Sinh => x.sinh(),
                    Func::Cosh => x.cosh(),
                    Func::Tanh => x.tanh(),
                    Func::Atan2 => {
                        let y = x;
                        let xx = args[1].eval(u, v)?;
                        if y == 0.0 && xx == 0.0 {
                            return self.fail("atan2 at the origin");
                        }
                        y.atan2(xx)
                    }
                }
            }
        };
        self.check(out)
    }

    /// Value, gradient and Hessian at `(u, v)`, exact up to round-off.
    pub fn eval_jet2(&self, u: f64, v: f64) -> Result<Jet2, EvalError> {
        let out = match self {
            Expr::Num(x) => Jet2::constant(*x),
            Expr::Var(Var::U) => Jet2::variable(u, 0),
            Expr::Var(Var::V) => Jet2::variable(v, 1),
            Expr::Neg(a) => -a.eval_jet2(u, v)?,
            Expr::Bin(op, a, b) => {
                let x = a.eval_jet2(u, v)?;
                match op {
                    BinOp::Add => x + b.eval_jet2(u, v)?,
                    BinOp::Sub => x - b.eval_jet2(u, v)?,
                    BinOp::Mul => x * b.eval_jet2(u, v)?,
                    BinOp::Div => {
                        let y = b.eval_jet2(u, v)?;
                        if y.value == 0.0 {
                            return self.fail("division by zero");
                        }
                        x / y
                    }
                    BinOp::Pow => match integer_exponent(b) {
                        Some(n) => {
                            if x.value == 0.0 && n < 0 {
                                return self.fail("zero to a negative power");
                            }
                            x.powi(n)
                        }
                        None => {
                            if x.value <= 0.0 {
                                return self.fail("non-positive base with real exponent");
                            }
                            let l =
                                x.compose(x.value.ln(), 1.0 / x.value, -1.0 / (x.value * x.value));
                            let p = b.eval_jet2(u, v)? * l;
                            let ev = p.value.exp();
                            p.compose(ev, ev, ev)
                        }
                    },
                }
            }
            Expr::Call(f, args) => {
                let x = args[0].eval_jet2(u, v)?;
                let a = x.value;
                match f {
                    Func::Sin => x.compose(a.sin(), a.cos(), -a.sin()),
                    Func::Cos => x.compose(a.cos(), -a.sin(), -a.cos()),
                    Func::Tan => {
                        if a.cos() == 0.0 {
                            return self.fail("tan at a pole");
                        }
                        let t = a.tan();
                        let s = 1.0 + t * t;
                        x.compose(t, s, 2.0 * t * s)
                    }
                    Func::Exp => {
                        let ea = a.exp();
                        x.compose(ea, ea, ea)
                    }
                    Func::Log => {
                        if a <= 0.0 {
                            return self.fail("log of non-positive value");
                        }
                        x.compose(a.ln(), 1.0 / a, -1.0 / (a * a))
                    }
                    Func::Sqrt => {
                        if a <= 0.0 {
                            return self.fail("sqrt of non-positive value");
                        }
                        let s = a.sqrt();
                        x.compose(s, 0.5 / s, -0.25 / (s * s * s))
                    }
                    Func::Sinh => x.compose(a.sinh(), a.cosh(), a.sinh()),
                    Func::Cosh => x.compose(a.cosh(), a.sinh(), a.cosh()),
                    Func::Tanh => {
                        let t = a.tanh();
                        let s = 1.0 - t * t;
                        x.compose(t, s, -2.0 * t * s)
                    }
                    Func::Atan2 => {
                        let xx = args[1].eval_jet2(u, v)?;
                        if a == 0.0 && xx.value == 0.0 {
                            return self.fail("atan2 at the origin");
                        }
                        jet::atan2(x, xx)
                    }
                }
            }
        };
        debug_assert!(out.is_symmetric());
        self.check(out.value)?;
        for g in out.d.iter().chain(out.h.iter().flatten()) {
            self.check(*g)?;
        }
        Ok(out)
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Bin(BinOp::Add | BinOp::Sub, ..) => 1,
            Expr::Bin(BinOp::Mul | BinOp::Div, ..) => 2,
            Expr::Neg(_) => 3,
            Expr::Num(x) if x.is_sign_negative() => 3,
            Expr::Bin(BinOp::Pow, ..) => 4,
            _ => 5,
        }
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, e: &Expr, parens: bool) -> fmt::Result {
    if parens {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(x) if x.is_sign_negative() => write!(f, "(-{})", -x),
            Expr::Num(x) => write!(f, "{x}"),
            Expr::Var(Var::U) => write!(f, "u"),
            Expr::Var(Var::V) => write!(f, "v"),
            Expr::Neg(a) => {
                write!(f, "-")?;
                write_child(f, a, a.precedence() < 3)
            }
            Expr::Bin(op, a, b) => {
                let p = self.precedence();
                let (sym, lp, rp) = match op {
                    BinOp::Add => (" + ", a.precedence() < p, b.precedence() <= p),
                    BinOp::Sub => (" - ", a.precedence() < p, b.precedence() <= p),
                    BinOp::Mul => ("*", a.precedence() < p, b.precedence() <= p),
                    BinOp::Div => ("/", a.precedence() < p, b.precedence() <= p),
                    BinOp::Pow => ("^", a.precedence() <= p, b.precedence() < 3),
                };
                write_child(f, a, lp)?;
                write!(f, "{sym}")?;
                write_child(f, b, rp)
            }
            Expr::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

macro_rules! bin_impl {
    ($tr:ident, $m:ident, $op:expr) => {
        impl ops::$tr for Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                Expr::Bin($op, Box::new(self), Box::new(rhs))
            }
        }
        impl ops::$tr<f64> for Expr {
            type Output = Expr;
            fn $m(self, rhs: f64) -> Expr {
                Expr::Bin($op, Box::new(self), Box::new(Expr::Num(rhs)))
            }
        }
        impl ops::$tr<Expr> for f64 {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                Expr::Bin($op, Box::new(Expr::Num(self)), Box::new(rhs))
            }
        }
    };
}

bin_impl!(Add, add, BinOp::Add);
bin_impl!(Sub, sub, BinOp::Sub);
bin_impl!(Mul, mul, BinOp::Mul);
bin_impl!(Div, div, BinOp::Div);

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::Neg(Box::new(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn b(e: Expr) -> Box<Expr> {
        Box::new(e)
    }

    #[test]
    fn parses_precedence() {
        let e = parse("u*v + sin(u)").unwrap();
        assert_eq!(
            e,
            Expr::Bin(
                BinOp::Add,
                b(Expr::Bin(BinOp::Mul, b(Expr::u()), b(Expr::v()))),
                b(Expr::Call(Func::Sin, vec![Expr::u()]))
            )
        );
        assert_eq!(parse("-u^2").unwrap(), -(Expr::u().powi(2)));
        assert_eq!(
            parse("2^3^u").unwrap(),
            Expr::num(2.0).pow(Expr::num(3.0).pow(Expr::u()))
        );
        assert_eq!(parse("u - v - 1").unwrap(), (Expr::u() - Expr::v()) - 1.0);
        assert_eq!(parse("2^-u").unwrap(), Expr::num(2.0).pow(-Expr::u()));
        assert_eq!(parse("-u*v").unwrap(), (-Expr::u()) * Expr::v());
    }

    #[test]
    fn parses_catalog_component() {
        let e = parse("exp(u/2) + 0.75*exp(-u/2)").unwrap();
        let j = e.eval_jet2(0.0, 0.0).unwrap();
        assert!((j.value - 1.75).abs() < 1e-15);
        assert!((j.d[0] - (0.5 - 0.375)).abs() < 1e-15);
    }

    #[test]
    fn syntax_errors_carry_offsets() {
        let err = parse("u + * v").unwrap_err();
        assert_eq!(err.offset(), 4);
        assert!(matches!(err, ParseError::Syntax { .. }));
        assert!(matches!(
            parse("w + 1").unwrap_err(),
            ParseError::UnknownIdentifier { offset: 0, .. }
        ));
        assert!(matches!(
            parse("atan2(u)").unwrap_err(),
            ParseError::Arity {
                expected: 2,
                found: 1,
                ..
            }
        ));
        assert!(matches!(
            parse("(u + v").unwrap_err(),
            ParseError::Syntax { offset: 6, .. }
        ));
        assert!(matches!(
            parse("u + v)").unwrap_err(),
            ParseError::Syntax { offset: 5, .. }
        ));
        assert!(parse("").is_err());
    }

    #[test]
    fn jet_examples() {
        let j = parse("u*v").unwrap().eval_jet2(2.0, 3.0).unwrap();
        assert_eq!(j.value, 6.0);
        assert_eq!(j.d, [3.0, 2.0]);
        assert_eq!(j.h, [[0.0, 1.0], [1.0, 0.0]]);
        let j = parse("exp(u)*cos(v)").unwrap().eval_jet2(0.0, 0.0).unwrap();
        assert_eq!(j.value, 1.0);
        assert_eq!(j.d, [1.0, 0.0]);
        assert_eq!(j.h, [[1.0, 0.0], [0.0, -1.0]]);
    }

    #[test]
    fn domain_errors_name_the_subexpression() {
        let err = parse("1 + log(u - 3)")
            .unwrap()
            .eval_jet2(1.0, 0.0)
            .unwrap_err();
        assert_eq!(err.subexpr, "log(u - 3)");
        assert!(parse("sqrt(u)").unwrap().eval_jet2(-1.0, 0.0).is_err());
        assert!(parse("u/v").unwrap().eval_jet2(1.0, 0.0).is_err());
        assert!(parse("u^0.5").unwrap().eval_jet2(-1.0, 0.0).is_err());
        assert!(parse("u^-1").unwrap().eval(0.0, 0.0).is_err());
        assert_eq!(parse("u^2").unwrap().eval(-3.0, 0.0).unwrap(), 9.0);
    }

    #[test]
    fn printer_examples() {
        for src in [
            "u*v + sin(u)",
            "-(u + v)*2",
            "(-u)^2",
            "u^v^2",
            "(u^v)^2",
            "u - (v - 1)",
            "u/(v*2)",
            "atan2(v, u - 1)",
            "2^-u",
            "--u",
        ] {
            let e = parse(src).unwrap();
            assert_eq!(parse(&e.to_string()).unwrap(), e, "{src} -> {e}");
        }
    }

    fn arb_expr() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            (0.0f64..10.0).prop_map(Expr::Num),
            Just(Expr::u()),
            Just(Expr::v()),
        ];
        leaf.prop_recursive(5, 40, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(|a| -a),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a + b),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a - b),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a * b),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a / b),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a.pow(b)),
                inner.clone().prop_map(|a| a.apply(Func::Sin)),
                inner.clone().prop_map(|a| a.apply(Func::Exp)),
                (inner.clone(), inner).prop_map(|(a, b)| Expr::call(Func::Atan2, vec![a, b])),
            ]
        })
    }

    /// Smooth expressions without domain restrictions, for derivative checks.
    fn arb_smooth() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            (-2.0f64..2.0).prop_map(|x| if x < 0.0 {
                -Expr::Num(-x)
            } else {
                Expr::Num(x)
            }),
            Just(Expr::u()),
            Just(Expr::v()),
        ];
        leaf.prop_recursive(4, 24, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a + b),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a * b),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a / (b.powi(2) + 1.0)),
                inner.clone().prop_map(|a| a.apply(Func::Sin)),
                inner.clone().prop_map(|a| a.apply(Func::Cos)),
                inner.clone().prop_map(|a| a.apply(Func::Tanh)),
                inner
                    .clone()
                    .prop_map(|a| (a.apply(Func::Sin)).apply(Func::Exp)),
                inner
                    .clone()
                    .prop_map(|a| (a.powi(2) + 1.0).apply(Func::Log)),
                inner
                    .clone()
                    .prop_map(|a| (a.powi(2) + 1.0).apply(Func::Sqrt)),
                inner.prop_map(|a| a.powi(3)),
            ]
        })
    }

    /// Central-difference gradient and Hessian of the plain evaluator.
    fn fd_oracle(e: &Expr, u: f64, v: f64, h: f64) -> ([f64; 2], [[f64; 2]; 2]) {
        let f = |a: f64, b: f64| e.eval(a, b).unwrap();
        let f0 = f(u, v);
        let d = [
            (f(u + h, v) - f(u - h, v)) / (2.0 * h),
            (f(u, v + h) - f(u, v - h)) / (2.0 * h),
        ];
        let huu = (f(u + h, v) - 2.0 * f0 + f(u - h, v)) / (h * h);
        let hvv = (f(u, v + h) - 2.0 * f0 + f(u, v - h)) / (h * h);
        let huv =
            (f(u + h, v + h) - f(u + h, v - h) - f(u - h, v + h) + f(u - h, v - h)) / (4.0 * h * h);
        (d, [[huu, huv], [huv, hvv]])
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn print_parse_round_trip(e in arb_expr()) {
            let printed = e.to_string();
            let reparsed = parse(&printed).unwrap();
            prop_assert_eq!(&reparsed, &e);
            prop_assert_eq!(parse(&reparsed.to_string()).unwrap(), reparsed);
        }

        #[test]
        fn jets_agree_with_finite_differences(e in arb_smooth(), u in -1.0f64..1.0, v in -1.0f64..1.0) {
            let j = e.eval_jet2(u, v).unwrap();
            let (d, h) = fd_oracle(&e, u, v, 1e-4);
            let scale = 1.0 + j.value.abs() + j.d[0].abs() + j.d[1].abs()
                + j.h.iter().flatten().map(|x| x.abs()).sum::<f64>();
            for a in 0..2 {
                prop_assert!((j.d[a] - d[a]).abs() <= 1e-6 * scale, "grad {:?} vs {:?}", j.d, d);
                for b in 0..2 {
                    prop_assert!((j.h[a][b] - h[a][b]).abs() <= 1e-6 * scale, "hess {:?} vs {:?}", j.h, h);
                }
            }
        }

        #[test]
        fn jets_obey_linearity_and_leibniz(a in arb_smooth(), c in arb_smooth(), u in -1.0f64..1.0, v in -1.0f64..1.0) {
            let ja = a.eval_jet2(u, v).unwrap();
            let jc = c.eval_jet2(u, v).unwrap();
            let sum = (a.clone() + c.clone()).eval_jet2(u, v).unwrap();
            let prod = (a * c).eval_jet2(u, v).unwrap();
            let lin = ja + jc;
            let leib = ja * jc;
            let close = |x: f64, y: f64| (x - y).abs() <= 1e-12 * (1.0 + x.abs().max(y.abs()));
            prop_assert!(close(sum.value, lin.value));
            prop_assert!(close(prod.value, leib.value));
            for i in 0..2 {
                prop_assert!(close(sum.d[i], lin.d[i]));
                prop_assert!(close(prod.d[i], leib.d[i]));
                for k in 0..2 {
                    prop_assert!(close(sum.h[i][k], lin.h[i][k]));
                    prop_assert!(close(prod.h[i][k], leib.h[i][k]));
                }
            }
        }
    }
}
