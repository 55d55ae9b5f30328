//! Principal extensions of analytic functions into A3.
//!
//! Two independent routes compute the same element:
//!
//! * the jet route, `F(z) + F′(z)n + ½F″(z)n²` with `z = f(ζ)` and `n` the
//!   radical part of `ζ`;
//! * the Cauchy route, `(1/2πi)∮_γ F(t)(t − ζ)⁻¹ dt` over a circle, using
//!   the equally spaced trapezoidal rule.
//!
//! A monogenic function is assembled from an analytic triple
//! `(F₀, F₁, F₂)` as the extension of `F₀ + F₁ρ + F₂ρ²`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{complex_pair, A3, ABS_SINGULAR_FLOOR, REL_SINGULAR};
use crate::holo::{EvalError, HoloExpr};

/// Minimum distance from `f(ζ)` to the contour, as a fraction of the radius.
pub const PROXIMITY_GUARD: f64 = 1e-3;
/// Relative change between node doublings accepted as converged.
pub const DOUBLING_TOL: f64 = 1e-12;
pub const MAX_NODES: usize = 1 << 16;
pub const MIN_NODES: usize = 8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExtensionError {
    #[error("invalid contour: {0}")]
    InvalidContour(String),
    #[error("resolvent is singular: t = {t} coincides with f(ζ) = {z}")]
    ResolventSingular { t: Complex64, z: Complex64 },
    #[error("contour does not enclose f(ζ) = {z} with margin (distance to curve {gap:e}, radius {radius})")]
    ContourDoesNotEnclose { z: Complex64, gap: f64, radius: f64 },
    #[error("quadrature did not converge after {} doublings", .0.nodes.len())]
    QuadratureNotConverged(ConvergenceRecord),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Circle traversed once counterclockwise, sampled at `nodes` points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, try_from = "ContourRepr", into = "ContourRepr")]
pub struct Contour {
    center: Complex64,
    radius: f64,
    nodes: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ContourRepr {
    #[serde(with = "complex_pair")]
    center: Complex64,
    radius: f64,
    nodes: usize,
}

impl TryFrom<ContourRepr> for Contour {
    type Error = ExtensionError;
    fn try_from(r: ContourRepr) -> Result<Self, Self::Error> {
        Contour::new(r.center, r.radius, r.nodes)
    }
}

impl From<Contour> for ContourRepr {
    fn from(c: Contour) -> Self {
        ContourRepr { center: c.center, radius: c.radius, nodes: c.nodes }
    }
}

impl Contour {
    pub fn new(center: Complex64, radius: f64, nodes: usize) -> Result<Self, ExtensionError> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(ExtensionError::InvalidContour(format!("radius {radius} must be positive")));
        }
        if !center.is_finite() {
            return Err(ExtensionError::InvalidContour("center must be finite".into()));
        }
        if nodes < MIN_NODES || !nodes.is_power_of_two() || nodes > MAX_NODES {
            return Err(ExtensionError::InvalidContour(format!(
                "nodes {nodes} must be a power of two in [{MIN_NODES}, {MAX_NODES}]"
            )));
        }
        Ok(Contour { center, radius, nodes })
    }

    /// Circle centred at `z` with radius half the distance to the nearest
    /// singularity declared by any of `exprs`, or radius 1 if none is.
    pub fn auto<'a>(
        z: Complex64,
        exprs: impl IntoIterator<Item = &'a HoloExpr>,
        nodes: usize,
    ) -> Result<Self, ExtensionError> {
        let dist = exprs
            .into_iter()
            .filter_map(|e| e.singularity_distance(z))
            .fold(None, |acc: Option<f64>, d| Some(acc.map_or(d, |a| a.min(d))));
        let radius = match dist {
            None => 1.0,
            Some(d) if d > 0.0 => 0.5 * d,
            Some(_) => {
                return Err(EvalError::SingularEvaluation { what: "point is a declared singularity", at: z }.into())
            }
        };
        Contour::new(z, radius, nodes)
    }

    pub fn center(&self) -> Complex64 {
        self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn with_nodes(&self, nodes: usize) -> Result<Self, ExtensionError> {
        Contour::new(self.center, self.radius, nodes)
    }

    fn check_encloses(&self, z: Complex64) -> Result<(), ExtensionError> {
        let gap = self.radius - (z - self.center).norm();
        if !(gap >= PROXIMITY_GUARD * self.radius) {
            return Err(ExtensionError::ContourDoesNotEnclose { z, gap, radius: self.radius });
        }
        Ok(())
    }

    /// Node `k` of `n` equally spaced nodes.
    fn offset(&self, k: usize, n: usize) -> Complex64 {
        let theta = 2.0 * PI * (k as f64) / (n as f64);
        Complex64::new(theta.cos(), theta.sin()) * self.radius
    }
}

/// Successive node counts and relative deltas of the doubling sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRecord {
    pub nodes: Vec<usize>,
    pub deltas: Vec<f64>,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContourExtension {
    pub value: A3,
    pub convergence: ConvergenceRecord,
}

/// `(t − ζ)⁻¹ = 1/d + (n₁/d²)ρ + (n₂/d² + n₁²/d³)ρ²` with `d = t − f(ζ)`.
pub fn resolvent(t: Complex64, zeta: &A3) -> Result<A3, ExtensionError> {
    let z = zeta.f();
    let d = t - z;
    let scale = (A3::scalar(t) - *zeta).norm();
    if !(d.norm() > ABS_SINGULAR_FLOOR) || d.norm() <= REL_SINGULAR * scale {
        return Err(ExtensionError::ResolventSingular { t, z });
    }
    let inv = d.inv();
    let inv2 = inv * inv;
    let (n1, n2) = (zeta.b, zeta.c);
    Ok(A3::new(inv, n1 * inv2, n2 * inv2 + n1 * n1 * inv2 * inv))
}

/// Jet route for a single function.
pub fn extend_jet(expr: &HoloExpr, zeta: &A3) -> Result<A3, EvalError> {
    let j = expr.jet(zeta.f())?;
    let (n1, n2) = (zeta.b, zeta.c);
    Ok(A3::new(j.v0, j.v1 * n1, j.v1 * n2 + 0.5 * j.v2 * n1 * n1))
}

/// Trapezoidal sum of `(1/2πi)∮ g(t)(t − ζ)⁻¹ dt` over the nodes
/// `first, first + stride, …` of an `n`-node rule, without the `1/n`
/// factor. Terms are evaluated in parallel and summed in index order.
fn partial_sum<G>(g: &G, zeta: &A3, gamma: &Contour, n: usize, first: usize, stride: usize) -> Result<(A3, f64), ExtensionError>
where
    G: Fn(Complex64) -> Result<A3, EvalError> + Sync,
{
    let terms: Vec<Result<A3, ExtensionError>> = (first..n)
        .step_by(stride)
        .collect::<Vec<_>>()
        .into_par_iter()
        .with_min_len(64)
        .map(|k| {
            let w = gamma.offset(k, n);
            let t = gamma.center + w;
            // dt = i·w·dθ and dθ = 2π/n cancel the 1/2πi prefactor.
            Ok(g(t)? * resolvent(t, zeta)? * w)
        })
        .collect();
    let mut sum = A3::ZERO;
    let mut mag = 0.0;
    for t in terms {
        let t = t?;
        sum = sum + t;
        mag += t.norm();
    }
    Ok((sum, mag))
}

/// Contour integral at exactly `gamma.nodes()` nodes.
pub fn contour_integral_fixed<G>(g: &G, zeta: &A3, gamma: &Contour) -> Result<A3, ExtensionError>
where
    G: Fn(Complex64) -> Result<A3, EvalError> + Sync,
{
    gamma.check_encloses(zeta.f())?;
    let n = gamma.nodes;
    let (sum, _) = partial_sum(g, zeta, gamma, n, 0, 1)?;
    Ok(sum.scale_re(1.0 / n as f64))
}

/// Contour integral with node doubling from `gamma.nodes()` until two
/// successive sums differ by at most [`DOUBLING_TOL`] relative to the
/// quadrature scale, or [`MAX_NODES`] is reached.
pub fn contour_integral<G>(g: &G, zeta: &A3, gamma: &Contour) -> Result<ContourExtension, ExtensionError>
where
    G: Fn(Complex64) -> Result<A3, EvalError> + Sync,
{
    gamma.check_encloses(zeta.f())?;
    let mut n = gamma.nodes;
    let (mut sum, mut mag) = partial_sum(g, zeta, gamma, n, 0, 1)?;
    let mut record = ConvergenceRecord { nodes: vec![n], deltas: Vec::new(), converged: false };
    while n < MAX_NODES {
        let prev = sum.scale_re(1.0 / n as f64);
        // Nodes of the 2n rule at odd indices are the new ones.
        let (odd, odd_mag) = partial_sum(g, zeta, gamma, 2 * n, 1, 2)?;
        sum = sum + odd;
        mag += odd_mag;
        n *= 2;
        let cur = sum.scale_re(1.0 / n as f64);
        let scale = cur.norm().max(mag / n as f64).max(f64::MIN_POSITIVE);
        let delta = (cur - prev).norm() / scale;
        record.nodes.push(n);
        record.deltas.push(delta);
        if delta <= DOUBLING_TOL {
            record.converged = true;
            return Ok(ContourExtension { value: cur, convergence: record });
        }
    }
    Err(ExtensionError::QuadratureNotConverged(record))
}

/// Cauchy route for a single function, with node doubling.
pub fn extend_contour(expr: &HoloExpr, zeta: &A3, gamma: &Contour) -> Result<ContourExtension, ExtensionError> {
    contour_integral(&|t| expr.eval_c(t).map(A3::scalar), zeta, gamma)
}

/// Cauchy route for a single function at exactly `gamma.nodes()` nodes.
pub fn extend_contour_fixed(expr: &HoloExpr, zeta: &A3, gamma: &Contour) -> Result<A3, ExtensionError> {
    contour_integral_fixed(&|t| expr.eval_c(t).map(A3::scalar), zeta, gamma)
}

/// The analytic triple `(F₀, F₁, F₂)` of a monogenic function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonogenicTriple {
    #[serde(rename = "F0")]
    pub f0: HoloExpr,
    #[serde(rename = "F1")]
    pub f1: HoloExpr,
    #[serde(rename = "F2")]
    pub f2: HoloExpr,
}

impl MonogenicTriple {
    pub fn new(f0: HoloExpr, f1: HoloExpr, f2: HoloExpr) -> Self {
        MonogenicTriple { f0, f1, f2 }
    }

    pub fn parse(f0: &str, f1: &str, f2: &str) -> Result<Self, crate::holo::ParseError> {
        Ok(MonogenicTriple::new(
            crate::holo::parse_expr(f0)?,
            crate::holo::parse_expr(f1)?,
            crate::holo::parse_expr(f2)?,
        ))
    }

    /// `(F₀′, F₁′, F₂′)`, whose build is the Gâteaux derivative of this
    /// triple's build.
    pub fn derivative(&self) -> MonogenicTriple {
        MonogenicTriple::new(self.f0.derivative(), self.f1.derivative(), self.f2.derivative())
    }

    pub fn exprs(&self) -> [&HoloExpr; 3] {
        [&self.f0, &self.f1, &self.f2]
    }

    /// `F₀(t) + F₁(t)ρ + F₂(t)ρ²`.
    pub fn eval_combined(&self, t: Complex64) -> Result<A3, EvalError> {
        Ok(A3::new(self.f0.eval_c(t)?, self.f1.eval_c(t)?, self.f2.eval_c(t)?))
    }
}

/// Coefficient form of a polynomial triple, ascending degree.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialTriple {
    pub coeffs: [Vec<Complex64>; 3],
}

impl PolynomialTriple {
    /// Degrees uniform in `0..=max_degree`, coefficients uniform in the unit
    /// disc.
    pub fn random<R: rand::Rng>(rng: &mut R, max_degree: usize) -> Self {
        let mut draw = || {
            let degree = rng.random_range(0..=max_degree);
            (0..=degree)
                .map(|_| loop {
                    let z = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                    if z.norm_sqr() <= 1.0 {
                        break z;
                    }
                })
                .collect::<Vec<_>>()
        };
        let coeffs = [draw(), draw(), draw()];
        PolynomialTriple { coeffs }
    }

    pub fn triple(&self) -> MonogenicTriple {
        let [a, b, c] = &self.coeffs;
        MonogenicTriple::new(HoloExpr::polynomial(a), HoloExpr::polynomial(b), HoloExpr::polynomial(c))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    Jet,
    /// Cauchy route; `None` selects [`Contour::auto`] with the given node
    /// count. `adaptive` enables node doubling.
    Contour { contour: Option<Contour>, nodes: usize, adaptive: bool },
}

impl Method {
    pub fn contour(nodes: usize) -> Self {
        Method::Contour { contour: None, nodes, adaptive: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Extension {
    pub value: A3,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub convergence: Option<ConvergenceRecord>,
}

/// Jet route for a triple: `ext(F₀) + ext(F₁)ρ + ext(F₂)ρ²`.
pub fn build_monogenic_jet(triple: &MonogenicTriple, zeta: &A3) -> Result<A3, EvalError> {
    let e0 = extend_jet(&triple.f0, zeta)?;
    let e1 = extend_jet(&triple.f1, zeta)?;
    let e2 = extend_jet(&triple.f2, zeta)?;
    Ok(e0 + e1 * A3::RHO + e2 * A3::RHO2)
}

pub fn build_monogenic(triple: &MonogenicTriple, zeta: &A3, method: &Method) -> Result<Extension, ExtensionError> {
    match method {
        Method::Jet => Ok(Extension { value: build_monogenic_jet(triple, zeta)?, convergence: None }),
        Method::Contour { contour, nodes, adaptive } => {
            let gamma = match contour {
                Some(c) => *c,
                None => Contour::auto(zeta.f(), triple.exprs(), *nodes)?,
            };
            let g = |t| triple.eval_combined(t);
            if *adaptive {
                let r = contour_integral(&g, zeta, &gamma)?;
                Ok(Extension { value: r.value, convergence: Some(r.convergence) })
            } else {
                Ok(Extension { value: contour_integral_fixed(&g, zeta, &gamma)?, convergence: None })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::holo::parse_expr;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn p(s: &str) -> HoloExpr {
        parse_expr(s).unwrap()
    }

    #[test]
    fn resolvent_examples() {
        assert_eq!(resolvent(c(2., 0.), &A3::ONE).unwrap(), A3::ONE);
        let zeta = A3::real(1., 1., 0.);
        let r = resolvent(c(2., 0.), &zeta).unwrap();
        assert_eq!(r, A3::real(1., 1., 1.));
        // Oracle: inverse of t − ζ = 1 − ρ.
        assert_eq!(r, A3::real(1., -1., 0.).invert().unwrap());
        assert!(matches!(
            resolvent(c(1., 0.), &zeta),
            Err(ExtensionError::ResolventSingular { .. })
        ));
    }

    #[test]
    fn resolvent_inverts_t_minus_zeta() {
        let zeta = A3::new(c(0.2, -0.3), c(1.5, 0.5), c(-0.7, 2.0));
        for t in [c(1., 1.), c(-2., 0.3), c(0.25, -0.2)] {
            let r = resolvent(t, &zeta).unwrap();
            let prod = (A3::scalar(t) - zeta) * r;
            let kappa = ((A3::scalar(t) - zeta).norm() / (t - zeta.a).norm()).powi(3);
            assert!((prod - A3::ONE).norm() <= 64.0 * f64::EPSILON * (1.0 + kappa));
        }
    }

    #[test]
    fn extend_jet_examples() {
        let zeta = A3::new(c(0.3, 0.1), c(-1., 2.), c(0.5, 0.5));
        assert_eq!(extend_jet(&p("3 - 2i"), &zeta).unwrap(), A3::scalar(c(3., -2.)));
        assert_eq!(extend_jet(&p("z"), &zeta).unwrap(), zeta);
        let e = std::f64::consts::E;
        let got = extend_jet(&p("exp(z)"), &A3::real(1., 1., 0.)).unwrap();
        assert!(got.approx_eq(&A3::real(e, e, 0.5 * e), 1e-15));
    }

    #[test]
    fn extend_jet_matches_a3_evaluation() {
        let zeta = A3::new(c(0.3, 0.1), c(-1., 2.), c(0.5, 0.5));
        for s in ["sin(z)*exp(z)", "1/(z - 4)", "z^5 - 3*z"] {
            let e = p(s);
            let a = extend_jet(&e, &zeta).unwrap();
            let b = e.eval_a3(&zeta).unwrap();
            assert!(a.max_component_diff(&b) <= 1e-13 * (1.0 + a.norm()), "{s}");
        }
    }

    #[test]
    fn extend_contour_examples() {
        let unit = Contour::new(c(0., 0.), 1.0, 64).unwrap();
        let one = extend_contour_fixed(&p("1"), &A3::scalar(c(0.3, 0.1)), &unit).unwrap();
        assert!(one.approx_eq(&A3::ONE, 1e-14));

        let sq = extend_contour_fixed(&p("z^2"), &A3::RHO, &unit).unwrap();
        assert!(sq.approx_eq(&A3::RHO2, 1e-14), "{sq}");

        let zeta = A3::real(1., 1., 0.);
        let gamma = Contour::new(c(1., 0.), 1.0, 256).unwrap();
        let got = extend_contour_fixed(&p("exp(z)"), &zeta, &gamma).unwrap();
        let want = extend_jet(&p("exp(z)"), &zeta).unwrap();
        assert!(got.approx_eq(&want, 1e-10));
    }

    #[test]
    fn contour_errors() {
        let unit = Contour::new(c(0., 0.), 1.0, 64).unwrap();
        let outside = extend_contour(&p("z"), &A3::scalar(c(1.5, 0.)), &unit);
        assert!(matches!(outside, Err(ExtensionError::ContourDoesNotEnclose { .. })));
        let hugging = extend_contour(&p("z"), &A3::scalar(c(0.9995, 0.)), &unit);
        assert!(matches!(hugging, Err(ExtensionError::ContourDoesNotEnclose { .. })));
        assert!(Contour::new(c(0., 0.), 1.0, 48).is_err());
        assert!(Contour::new(c(0., 0.), 1.0, 4).is_err());
        assert!(Contour::new(c(0., 0.), -1.0, 64).is_err());
    }

    #[test]
    fn doubling_reaches_tolerance_near_boundary() {
        let unit = Contour::new(c(0., 0.), 1.0, 8).unwrap();
        let zeta = A3::new(c(0.95, 0.), c(0.3, 0.), c(0.1, -0.2));
        let r = extend_contour(&p("exp(z)"), &zeta, &unit).unwrap();
        assert!(r.convergence.converged);
        assert!(*r.convergence.nodes.last().unwrap() >= 512);
        let want = extend_jet(&p("exp(z)"), &zeta).unwrap();
        assert!(r.value.max_component_diff(&want) <= 1e-10 * (1.0 + want.norm()));
    }

    #[test]
    fn auto_contour_respects_declared_poles() {
        let e = p("1/(z - 5)");
        let g = Contour::auto(c(1., 0.), [&e], 64).unwrap();
        assert_eq!(g.radius(), 2.0);
        assert_eq!(g.center(), c(1., 0.));
        let g = Contour::auto(c(1., 0.), [&p("exp(z)")], 64).unwrap();
        assert_eq!(g.radius(), 1.0);
        assert!(Contour::auto(c(5., 0.), [&e], 64).is_err());
    }

    #[test]
    fn build_examples() {
        let zeta = A3::new(c(0.3, 0.1), c(-1., 2.), c(0.5, 0.5));
        let id = MonogenicTriple::parse("z", "0", "0").unwrap();
        assert_eq!(build_monogenic_jet(&id, &zeta).unwrap(), zeta);

        let only_f2 = MonogenicTriple::parse("0", "0", "z").unwrap();
        let got = build_monogenic_jet(&only_f2, &A3::real(2., 1., 0.)).unwrap();
        assert_eq!(got, A3::real(0., 0., 2.));
    }

    #[test]
    fn build_component_formula() {
        let t = MonogenicTriple::parse("exp(z)", "z^2", "1/(z-5)").unwrap();
        let zeta = A3::new(c(0.4, -0.2), c(0.7, 0.1), c(-0.3, 0.6));
        let (z, n1, n2) = (zeta.a, zeta.b, zeta.c);
        let j0 = t.f0.jet(z).unwrap();
        let j1 = t.f1.jet(z).unwrap();
        let f2 = t.f2.eval_c(z).unwrap();
        let want = A3::new(
            j0.v0,
            j0.v1 * n1 + j1.v0,
            j0.v1 * n2 + 0.5 * j0.v2 * n1 * n1 + j1.v1 * n1 + f2,
        );
        let got = build_monogenic_jet(&t, &zeta).unwrap();
        assert!(got.max_component_diff(&want) <= 1e-14);
    }

    #[test]
    fn triple_json_schema() {
        let t: MonogenicTriple = serde_json::from_str(r#"{"F0":"exp(z)","F1":"z^2","F2":"1/(z-5)"}"#).unwrap();
        assert_eq!(t.f1, p("z^2"));
        let back: MonogenicTriple = serde_json::from_str(&serde_json::to_string(&t).unwrap()).unwrap();
        assert_eq!(back, t);
        assert!(serde_json::from_str::<MonogenicTriple>(r#"{"F0":"z","F1":"z","F2":"z","F3":"z"}"#).is_err());
    }

    #[test]
    fn contour_json_schema() {
        let g: Contour = serde_json::from_str(r#"{"center":[1.0,-0.5],"radius":2.0,"nodes":128}"#).unwrap();
        assert_eq!(g, Contour::new(c(1., -0.5), 2.0, 128).unwrap());
        assert_eq!(serde_json::to_string(&g).unwrap(), r#"{"center":[1.0,-0.5],"radius":2.0,"nodes":128}"#);
        assert!(serde_json::from_str::<Contour>(r#"{"center":[0,0],"radius":1,"nodes":100}"#).is_err());
    }
}
