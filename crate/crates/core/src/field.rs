//! Functions `Φ: Ω → A3` under test.

use serde::{Deserialize, Serialize};

use crate::algebra::A3;
use crate::extension::{build_monogenic_jet, MonogenicTriple};
use crate::holo::{EvalError, HoloExpr};

/// A pure, thread-safe function on A3.
pub trait Field: Sync {
    fn eval(&self, zeta: &A3) -> Result<A3, EvalError>;
}

impl<F> Field for F
where
    F: Fn(&A3) -> Result<A3, EvalError> + Sync,
{
    fn eval(&self, zeta: &A3) -> Result<A3, EvalError> {
        self(zeta)
    }
}

/// `Φ(ζ)` built from an analytic triple by the jet route.
#[derive(Debug, Clone, PartialEq)]
pub struct TripleField(pub MonogenicTriple);

impl Field for TripleField {
    fn eval(&self, zeta: &A3) -> Result<A3, EvalError> {
        build_monogenic_jet(&self.0, zeta)
    }
}

/// `Φ(ζ) = ρᵏ·F(f(ζ))` for `k ∈ {0, 1, 2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarLift {
    pub expr: HoloExpr,
    pub power: u8,
}

impl Field for ScalarLift {
    fn eval(&self, zeta: &A3) -> Result<A3, EvalError> {
        let v = self.expr.eval_c(zeta.f())?;
        let zero = num_complex::Complex64::new(0.0, 0.0);
        Ok(match self.power {
            0 => A3::new(v, zero, zero),
            1 => A3::new(zero, v, zero),
            _ => A3::new(zero, zero, v),
        })
    }
}

/// Named reference functions, including non-monogenic controls.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BuiltinField {
    /// `Φ(ζ) = ζ`.
    Identity,
    /// `Φ(ζ) = conj(f(ζ))·1`, anti-holomorphic in the scalar part.
    ConjScalar,
    /// Componentwise complex conjugate of `ζ`.
    ConjComponentwise,
    /// `Φ(ζ) = ρ²·f(ζ)`.
    RadicalOnly,
    /// `Φ(ζ) = ρ·f(ζ)`.
    RhoScalar,
    /// `Φ(ζ) = ζ⁻¹`, singular on the radical.
    Inverse,
}

impl BuiltinField {
    pub fn name(self) -> &'static str {
        match self {
            BuiltinField::Identity => "identity",
            BuiltinField::ConjScalar => "conj-scalar",
            BuiltinField::ConjComponentwise => "conj-componentwise",
            BuiltinField::RadicalOnly => "radical-only",
            BuiltinField::RhoScalar => "rho-scalar",
            BuiltinField::Inverse => "inverse",
        }
    }
}

impl Field for BuiltinField {
    fn eval(&self, zeta: &A3) -> Result<A3, EvalError> {
        let zero = num_complex::Complex64::new(0.0, 0.0);
        Ok(match self {
            BuiltinField::Identity => *zeta,
            BuiltinField::ConjScalar => A3::scalar(zeta.f().conj()),
            BuiltinField::ConjComponentwise => zeta.conj(),
            BuiltinField::RadicalOnly => A3::new(zero, zero, zeta.f()),
            BuiltinField::RhoScalar => A3::new(zero, zeta.f(), zero),
            BuiltinField::Inverse => zeta.invert()?,
        })
    }
}
