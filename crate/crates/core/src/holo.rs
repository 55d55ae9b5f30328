//! Closed-form analytic functions of one complex variable.
//!
//! A [`HoloExpr`] evaluates over ℂ and over A3. Evaluating at `z + ρ`
//! yields the second-order jet `(F, F′, F″/2)` of the function at `z`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use thiserror::Error;

use crate::algebra::{AlgebraError, A3, ABS_SINGULAR_FLOOR};

mod parse;

pub use parse::{parse_expr, ParseError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("singular evaluation: {what} at z = {at}")]
    SingularEvaluation { what: &'static str, at: Complex64 },
    #[error(transparent)]
    NotInvertible(#[from] AlgebraError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Sin,
    Cos,
    Log,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Log => "log",
        }
    }

    pub fn from_name(s: &str) -> Option<Func> {
        Some(match s {
            "exp" => Func::Exp,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "log" => Func::Log,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum HoloExpr {
    Const(Complex64),
    Var,
    Neg(Arc<HoloExpr>),
    Add(Arc<HoloExpr>, Arc<HoloExpr>),
    Sub(Arc<HoloExpr>, Arc<HoloExpr>),
    Mul(Arc<HoloExpr>, Arc<HoloExpr>),
    Div(Arc<HoloExpr>, Arc<HoloExpr>),
    Pow(Arc<HoloExpr>, i32),
    Call(Func, Arc<HoloExpr>),
}

/// `(F(z), F′(z), F″(z))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JetValue {
    pub v0: Complex64,
    pub v1: Complex64,
    pub v2: Complex64,
}

fn singular(what: &'static str, at: Complex64) -> EvalError {
    EvalError::SingularEvaluation { what, at }
}

fn finite_or(z: Complex64, what: &'static str, at: Complex64) -> Result<Complex64, EvalError> {
    if z.is_finite() {
        Ok(z)
    } else {
        Err(singular(what, at))
    }
}

impl HoloExpr {
    pub fn constant(z: Complex64) -> Self {
        HoloExpr::Const(z)
    }

    pub fn real(x: f64) -> Self {
        HoloExpr::Const(Complex64::new(x, 0.0))
    }

    pub fn var() -> Self {
        HoloExpr::Var
    }

    pub fn pow(self, k: i32) -> Self {
        HoloExpr::Pow(Arc::new(self), k)
    }

    pub fn call(func: Func, arg: HoloExpr) -> Self {
        HoloExpr::Call(func, Arc::new(arg))
    }

    pub fn exp(self) -> Self {
        Self::call(Func::Exp, self)
    }

    pub fn sin(self) -> Self {
        Self::call(Func::Sin, self)
    }

    pub fn cos(self) -> Self {
        Self::call(Func::Cos, self)
    }

    pub fn ln(self) -> Self {
        Self::call(Func::Log, self)
    }

    /// Polynomial `Σ coeffs[k] zᵏ` in Horner-free expanded form.
    pub fn polynomial(coeffs: &[Complex64]) -> Self {
        let mut acc: Option<HoloExpr> = None;
        for (k, &ck) in coeffs.iter().enumerate() {
            let term = match k {
                0 => HoloExpr::Const(ck),
                1 => HoloExpr::Const(ck) * HoloExpr::Var,
                _ => HoloExpr::Const(ck) * HoloExpr::Var.pow(k as i32),
            };
            acc = Some(match acc {
                None => term,
                Some(a) => a + term,
            });
        }
        acc.unwrap_or(HoloExpr::real(0.0))
    }

    pub fn is_zero_const(&self) -> bool {
        matches!(self, HoloExpr::Const(z) if *z == Complex64::new(0.0, 0.0))
    }

    pub fn eval_c(&self, z: Complex64) -> Result<Complex64, EvalError> {
        use HoloExpr::*;
        Ok(match self {
            Const(c) => *c,
            Var => z,
            Neg(e) => -e.eval_c(z)?,
            Add(l, r) => l.eval_c(z)? + r.eval_c(z)?,
            Sub(l, r) => l.eval_c(z)? - r.eval_c(z)?,
            Mul(l, r) => l.eval_c(z)? * r.eval_c(z)?,
            Div(l, r) => {
                let den = r.eval_c(z)?;
                if !(den.norm() > ABS_SINGULAR_FLOOR) {
                    return Err(singular("division by zero", z));
                }
                finite_or(l.eval_c(z)? * den.inv(), "overflow in division", z)?
            }
            Pow(e, k) => {
                let base = e.eval_c(z)?;
                if *k < 0 && !(base.norm() > ABS_SINGULAR_FLOOR) {
                    return Err(singular("negative power of zero", z));
                }
                finite_or(powi_complex(base, *k), "overflow in power", z)?
            }
            Call(f, e) => {
                let w = e.eval_c(z)?;
                match f {
                    Func::Exp => finite_or(w.exp(), "overflow in exp", z)?,
                    Func::Sin => w.sin(),
                    Func::Cos => w.cos(),
                    Func::Log => {
                        if !(w.norm() > ABS_SINGULAR_FLOOR) {
                            return Err(singular("log of zero", z));
                        }
                        w.ln()
                    }
                }
            }
        })
    }

    pub fn eval_a3(&self, zeta: &A3) -> Result<A3, EvalError> {
        use HoloExpr::*;
        let at = zeta.f();
        let out = match self {
            Const(c) => A3::scalar(*c),
            Var => *zeta,
            Neg(e) => -e.eval_a3(zeta)?,
            Add(l, r) => l.eval_a3(zeta)? + r.eval_a3(zeta)?,
            Sub(l, r) => l.eval_a3(zeta)? - r.eval_a3(zeta)?,
            Mul(l, r) => l.eval_a3(zeta)? * r.eval_a3(zeta)?,
            Div(l, r) => l.eval_a3(zeta)? * r.eval_a3(zeta)?.invert()?,
            Pow(e, k) => e.eval_a3(zeta)?.powi(*k)?,
            Call(f, e) => {
                let w = e.eval_a3(zeta)?;
                match f {
                    Func::Exp => w.exp(),
                    Func::Sin => w.sin(),
                    Func::Cos => w.cos(),
                    Func::Log => w.ln()?,
                }
            }
        };
        if out.is_finite() {
            Ok(out)
        } else {
            Err(singular("non-finite value", at))
        }
    }

    /// Value and first two derivatives, read off `eval_a3(z + ρ)`.
    pub fn jet(&self, z: Complex64) -> Result<JetValue, EvalError> {
        let v = self.eval_a3(&(A3::scalar(z) + A3::RHO))?;
        Ok(JetValue { v0: v.a, v1: v.b, v2: 2.0 * v.c })
    }

    /// Symbolic `d/dz`, with folding of zero and one constants only.
    pub fn derivative(&self) -> HoloExpr {
        use HoloExpr::*;
        match self {
            Const(_) => HoloExpr::real(0.0),
            Var => HoloExpr::real(1.0),
            Neg(e) => neg(e.derivative()),
            Add(l, r) => add(l.derivative(), r.derivative()),
            Sub(l, r) => sub(l.derivative(), r.derivative()),
            Mul(l, r) => add(
                mul(l.derivative(), (**r).clone()),
                mul((**l).clone(), r.derivative()),
            ),
            Div(l, r) => {
                // (l′r − lr′)/r²
                let num = sub(
                    mul(l.derivative(), (**r).clone()),
                    mul((**l).clone(), r.derivative()),
                );
                if num.is_zero_const() {
                    HoloExpr::real(0.0)
                } else {
                    Div(Arc::new(num), Arc::new((**r).clone().pow(2)))
                }
            }
            Pow(e, k) => match *k {
                0 => HoloExpr::real(0.0),
                1 => e.derivative(),
                _ => mul(
                    mul(HoloExpr::real(*k as f64), (**e).clone().pow(k - 1)),
                    e.derivative(),
                ),
            },
            Call(f, e) => {
                let inner = e.derivative();
                let outer = match f {
                    Func::Exp => self.clone(),
                    Func::Sin => (**e).clone().cos(),
                    Func::Cos => neg((**e).clone().sin()),
                    Func::Log => (**e).clone().pow(-1),
                };
                mul(outer, inner)
            }
        }
    }

    /// Affine form `m·z + q` when the expression is syntactically affine.
    pub fn as_affine(&self) -> Option<(Complex64, Complex64)> {
        use HoloExpr::*;
        let zero = Complex64::new(0.0, 0.0);
        Some(match self {
            Const(c) => (zero, *c),
            Var => (Complex64::new(1.0, 0.0), zero),
            Neg(e) => {
                let (m, q) = e.as_affine()?;
                (-m, -q)
            }
            Add(l, r) => {
                let ((m1, q1), (m2, q2)) = (l.as_affine()?, r.as_affine()?);
                (m1 + m2, q1 + q2)
            }
            Sub(l, r) => {
                let ((m1, q1), (m2, q2)) = (l.as_affine()?, r.as_affine()?);
                (m1 - m2, q1 - q2)
            }
            Mul(l, r) => {
                let ((m1, q1), (m2, q2)) = (l.as_affine()?, r.as_affine()?);
                if m1 == zero {
                    (q1 * m2, q1 * q2)
                } else if m2 == zero {
                    (m1 * q2, q1 * q2)
                } else {
                    return None;
                }
            }
            Div(l, r) => {
                let ((m1, q1), (m2, q2)) = (l.as_affine()?, r.as_affine()?);
                if m2 != zero || q2 == zero {
                    return None;
                }
                (m1 / q2, q1 / q2)
            }
            Pow(e, 0) => {
                let _ = e;
                (zero, Complex64::new(1.0, 0.0))
            }
            Pow(e, 1) => e.as_affine()?,
            _ => return None,
        })
    }

    /// Distance from `z` to the nearest singularity the expression declares
    /// syntactically: zeros of affine denominators or of affine bases with
    /// negative exponent, and the branch cut of `log` of an affine argument.
    /// `None` when no such singularity exists.
    pub fn singularity_distance(&self, z: Complex64) -> Option<f64> {
        use HoloExpr::*;
        let zero_of = |e: &HoloExpr| -> Option<f64> {
            let (m, q) = e.as_affine()?;
            if m == Complex64::new(0.0, 0.0) {
                return None;
            }
            Some((z - (-q / m)).norm())
        };
        let own = match self {
            Div(_, r) => zero_of(r),
            Pow(e, k) if *k < 0 => zero_of(e),
            Call(Func::Log, e) => e.as_affine().and_then(|(m, q)| {
                if m == Complex64::new(0.0, 0.0) {
                    return None;
                }
                // Distance in the w = m·z + q plane to the ray (−∞, 0].
                let w = m * z + q;
                let d = if w.re >= 0.0 { w.norm() } else { w.im.abs() };
                Some(d / m.norm())
            }),
            _ => None,
        };
        let children = match self {
            Const(_) | Var => None,
            Neg(e) | Pow(e, _) | Call(_, e) => e.singularity_distance(z),
            Add(l, r) | Sub(l, r) | Mul(l, r) | Div(l, r) => {
                min_opt(l.singularity_distance(z), r.singularity_distance(z))
            }
        };
        min_opt(own, children)
    }
}

/// Repeated squaring in the same order as [`A3::powi`], so that the scalar
/// part of an A3 evaluation reproduces the complex evaluation bit for bit.
fn powi_complex(z: Complex64, k: i32) -> Complex64 {
    let base = if k < 0 { z.inv() } else { z };
    let mut e = k.unsigned_abs();
    let mut acc = Complex64::new(1.0, 0.0);
    let mut sq = base;
    while e > 0 {
        if e & 1 == 1 {
            acc *= sq;
        }
        e >>= 1;
        if e > 0 {
            sq *= sq;
        }
    }
    acc
}

fn min_opt(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

fn is_one(e: &HoloExpr) -> bool {
    matches!(e, HoloExpr::Const(z) if *z == Complex64::new(1.0, 0.0))
}

fn neg(e: HoloExpr) -> HoloExpr {
    match e {
        HoloExpr::Const(z) => HoloExpr::Const(-z),
        e => HoloExpr::Neg(Arc::new(e)),
    }
}

fn add(l: HoloExpr, r: HoloExpr) -> HoloExpr {
    if l.is_zero_const() {
        r
    } else if r.is_zero_const() {
        l
    } else {
        HoloExpr::Add(Arc::new(l), Arc::new(r))
    }
}

fn sub(l: HoloExpr, r: HoloExpr) -> HoloExpr {
    if r.is_zero_const() {
        l
    } else if l.is_zero_const() {
        neg(r)
    } else {
        HoloExpr::Sub(Arc::new(l), Arc::new(r))
    }
}

fn mul(l: HoloExpr, r: HoloExpr) -> HoloExpr {
    if l.is_zero_const() || r.is_zero_const() {
        HoloExpr::real(0.0)
    } else if is_one(&l) {
        r
    } else if is_one(&r) {
        l
    } else {
        HoloExpr::Mul(Arc::new(l), Arc::new(r))
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $variant:ident) => {
        impl std::ops::$trait for HoloExpr {
            type Output = HoloExpr;
            fn $method(self, rhs: HoloExpr) -> HoloExpr {
                HoloExpr::$variant(Arc::new(self), Arc::new(rhs))
            }
        }
    };
}

binop!(Add, add, Add);
binop!(Sub, sub, Sub);
binop!(Mul, mul, Mul);
binop!(Div, div, Div);

impl std::ops::Neg for HoloExpr {
    type Output = HoloExpr;
    fn neg(self) -> HoloExpr {
        HoloExpr::Neg(Arc::new(self))
    }
}

fn fmt_real(x: f64) -> String {
    format!("{x}")
}

fn fmt_const(z: Complex64) -> String {
    let (re, im) = (z.re, z.im);
    if im == 0.0 {
        if re.is_sign_negative() {
            format!("(-{})", fmt_real(-re))
        } else {
            fmt_real(re)
        }
    } else if re == 0.0 {
        if im.is_sign_negative() {
            format!("(-{}i)", fmt_real(-im))
        } else {
            format!("{}i", fmt_real(im))
        }
    } else {
        let sign = if im.is_sign_negative() { '-' } else { '+' };
        let re_s = if re.is_sign_negative() {
            format!("-{}", fmt_real(-re))
        } else {
            fmt_real(re)
        };
        format!("({re_s} {sign} {}i)", fmt_real(im.abs()))
    }
}

impl fmt::Display for HoloExpr {
    /// Fully parenthesised, so printing never depends on precedence.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use HoloExpr::*;
        match self {
            Const(z) => write!(f, "{}", fmt_const(*z)),
            Var => write!(f, "z"),
            Neg(e) => write!(f, "(-{e})"),
            Add(l, r) => write!(f, "({l} + {r})"),
            Sub(l, r) => write!(f, "({l} - {r})"),
            Mul(l, r) => write!(f, "({l} * {r})"),
            Div(l, r) => write!(f, "({l} / {r})"),
            Pow(e, k) if *k < 0 => write!(f, "({e}^(-{}))", k.unsigned_abs()),
            Pow(e, k) => write!(f, "({e}^{k})"),
            Call(func, e) => write!(f, "{}({e})", func.name()),
        }
    }
}

impl std::str::FromStr for HoloExpr {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_expr(s)
    }
}

impl serde::Serialize for HoloExpr {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> serde::Deserialize<'de> for HoloExpr {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        parse_expr(&s).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn p(s: &str) -> HoloExpr {
        parse_expr(s).unwrap()
    }

    /// Central difference of `eval_c` along the real axis.
    fn fd1(e: &HoloExpr, z: Complex64, h: f64) -> Complex64 {
        (e.eval_c(z + h).unwrap() - e.eval_c(z - h).unwrap()) / (2.0 * h)
    }

    fn fd2(e: &HoloExpr, z: Complex64, h: f64) -> Complex64 {
        (e.eval_c(z + h).unwrap() - 2.0 * e.eval_c(z).unwrap() + e.eval_c(z - h).unwrap()) / (h * h)
    }

    #[test]
    fn eval_c_examples() {
        assert_eq!(p("z^2").eval_c(c(1., 1.)).unwrap(), c(0., 2.));
        assert_eq!(p("exp(z)").eval_c(c(0., 0.)).unwrap(), c(1., 0.));
        assert!(matches!(
            p("1/(z-2)").eval_c(c(2., 0.)),
            Err(EvalError::SingularEvaluation { .. })
        ));
        assert!(p("log(z)").eval_c(c(0., 0.)).is_err());
    }

    #[test]
    fn eval_a3_examples() {
        let zeta = A3::real(1., 1., 0.);
        assert_eq!(p("z^2").eval_a3(&zeta).unwrap(), A3::real(1., 2., 1.));
        assert_eq!(p("7").eval_a3(&zeta).unwrap(), A3::real(7., 0., 0.));
        let e = std::f64::consts::E;
        let got = p("exp(z)").eval_a3(&zeta).unwrap();
        assert!(got.approx_eq(&A3::real(e, e, 0.5 * e), 1e-15));
        assert!(matches!(
            p("1/z").eval_a3(&A3::RHO),
            Err(EvalError::NotInvertible(_))
        ));
    }

    #[test]
    fn jet_examples() {
        let j = p("z^2").jet(c(3., 0.)).unwrap();
        assert_eq!((j.v0, j.v1, j.v2), (c(9., 0.), c(6., 0.), c(2., 0.)));
        let j = p("exp(z)").jet(c(0., 0.)).unwrap();
        assert_eq!((j.v0, j.v1, j.v2), (c(1., 0.), c(1., 0.), c(1., 0.)));
        let s = p("sin(z)");
        let z = c(0.7, 0.);
        let j = s.jet(z).unwrap();
        assert!((j.v1 - fd1(&s, z, 1e-5)).norm() <= 1e-9);
    }

    #[test]
    fn jet_matches_finite_differences_for_every_node_kind() {
        let exprs = [
            "3 - 2i", "z", "-z^3", "z + exp(z)", "z - sin(z)", "z*cos(z)",
            "1/(z - 3)", "z^(-2)", "log(z + 2)", "exp(sin(z)) / (z^2 + 4)",
        ];
        for s in exprs {
            let e = p(s);
            for z in [c(0.3, 0.2), c(-0.5, 0.8), c(1.1, -0.4)] {
                let j = e.jet(z).unwrap();
                let d1 = fd1(&e, z, 1e-5);
                let d2 = fd2(&e, z, 1e-4);
                let rel = |a: Complex64, b: Complex64| (a - b).norm() / (1.0 + b.norm());
                assert!(rel(d1, j.v1) <= 1e-6, "{s} at {z}: {d1} vs {}", j.v1);
                assert!(rel(d2, j.v2) <= 1e-6, "{s} at {z}: {d2} vs {}", j.v2);
                assert_eq!(j.v0, e.eval_c(z).unwrap());
            }
        }
    }

    #[test]
    fn symbolic_derivative_agrees_with_jet() {
        for s in ["z^4 - 2*z", "exp(2*z)*sin(z)", "1/(z-5)", "log(z+3)^2", "cos(z^2)"] {
            let e = p(s);
            let de = e.derivative();
            for z in [c(0.2, -0.1), c(0.9, 0.6)] {
                let j = e.jet(z).unwrap();
                let dj = de.jet(z).unwrap();
                assert!((de.eval_c(z).unwrap() - j.v1).norm() <= 1e-12 * (1.0 + j.v1.norm()));
                assert!((dj.v1 - j.v2).norm() <= 1e-12 * (1.0 + j.v2.norm()));
            }
        }
    }

    #[test]
    fn affine_singularities() {
        let e = p("exp(z) + 1/(z - 5)");
        assert!((e.singularity_distance(c(1., 0.)).unwrap() - 4.0).abs() < 1e-15);
        assert_eq!(p("z^3 + sin(z)").singularity_distance(c(0., 0.)), None);
        let lg = p("log(z)");
        assert!((lg.singularity_distance(c(-1., 0.5)).unwrap() - 0.5).abs() < 1e-15);
        assert!((lg.singularity_distance(c(3., 4.)).unwrap() - 5.0).abs() < 1e-15);
        assert!((p("(2*z + 1)^(-1)").singularity_distance(c(0.5, 0.)).unwrap() - 1.0).abs() < 1e-15);
    }

    fn arb_expr() -> impl Strategy<Value = HoloExpr> {
        let leaf = prop_oneof![
            Just(HoloExpr::Var),
            (-5.0..5.0f64, -5.0..5.0f64, 0..3u8).prop_map(|(re, im, kind)| match kind {
                0 => HoloExpr::real(re),
                1 => HoloExpr::Const(c(0., im)),
                _ => HoloExpr::Const(c(re, im)),
            }),
        ];
        leaf.prop_recursive(4, 24, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(|e| -e),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a + b),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a - b),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a * b),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a / b),
                (inner.clone(), -3..5i32).prop_map(|(a, k)| a.pow(k)),
                (inner, 0..4u8).prop_map(|(a, f)| HoloExpr::call(
                    [Func::Exp, Func::Sin, Func::Cos, Func::Log][f as usize],
                    a
                )),
            ]
        })
    }

    proptest! {
        #[test]
        fn print_parse_is_idempotent(e in arb_expr()) {
            let once = parse_expr(&e.to_string()).unwrap();
            let twice = parse_expr(&once.to_string()).unwrap();
            prop_assert_eq!(once, twice);
        }

        #[test]
        fn scalar_part_of_a3_evaluation_is_complex_evaluation(
            e in arb_expr(),
            v in proptest::array::uniform6(-1.0..1.0f64)
        ) {
            let zeta = A3::from_real6(v);
            if let (Ok(a3), Ok(cv)) = (e.eval_a3(&zeta), e.eval_c(zeta.f())) {
                let scale = 1.0 + cv.norm();
                prop_assert!((a3.f() - cv).norm() <= 4.0 * f64::EPSILON * scale,
                    "{} vs {}", a3.f(), cv);
            }
        }
    }
}
