//! Complex least-squares polynomial fits.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{ComponentTable, DecompositionError};
use crate::algebra::{complex_pair, A3};

pub const MAX_FIT_DEGREE: usize = 12;
/// Largest accepted ratio of extreme singular values of the column-scaled
/// Vandermonde matrix.
pub const MAX_CONDITION: f64 = 1e10;

/// Least-squares polynomial `Σ cₖ·wᵏ` in `w = (z − center)/scale`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalPoly {
    pub center: Complex64,
    pub scale: f64,
    pub coeffs: Vec<Complex64>,
    pub condition: f64,
}

impl LocalPoly {
    /// Value and first two `z`-derivatives.
    pub fn jet(&self, z: Complex64) -> [Complex64; 3] {
        let w = (z - self.center) / self.scale;
        let zero = Complex64::new(0.0, 0.0);
        let (mut p, mut d1, mut d2) = (zero, zero, zero);
        for &c in self.coeffs.iter().rev() {
            d2 = d2 * w + 2.0 * d1;
            d1 = d1 * w + p;
            p = p * w + c;
        }
        [p, d1 / self.scale, d2 / (self.scale * self.scale)]
    }

    /// Principal extension `P(f(ζ)) + P′(f(ζ))·n + ½P″(f(ζ))·n²`.
    pub fn extend(&self, zeta: &A3) -> A3 {
        let [p, d1, d2] = self.jet(zeta.a);
        zeta.lift(p, d1, d2)
    }
}

/// Solves the least-squares problem and returns coefficients in `w` with the
/// condition estimate, or `None` when the system is rank deficient.
pub fn least_squares(
    points: &[Complex64],
    values: &[Complex64],
    degree: usize,
    center: Complex64,
    scale: f64,
) -> Option<LocalPoly> {
    let (m, n) = (points.len(), degree + 1);
    if m < n {
        return None;
    }
    let mut a = DMatrix::<Complex64>::from_fn(m, n, |r, k| ((points[r] - center) / scale).powu(k as u32));
    let mut col_scale = vec![1.0; n];
    for (k, s) in col_scale.iter_mut().enumerate() {
        let norm = a.column(k).norm();
        if norm == 0.0 || !norm.is_finite() {
            return None;
        }
        *s = norm;
        a.column_mut(k).unscale_mut(norm);
    }
    let rhs = DVector::from_column_slice(values);
    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    let sol = svd.solve(&rhs, 0.0).ok()?;
    let coeffs: Vec<Complex64> = sol.iter().zip(&col_scale).map(|(c, s)| c / s).collect();
    if !coeffs.iter().all(|c| c.is_finite()) {
        return None;
    }
    Some(LocalPoly { center, scale, coeffs, condition })
}

/// Monomial coefficients (ascending degree) of one fitted component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FittedComponent {
    #[serde(with = "pair_vec")]
    pub coefficients: Vec<Complex64>,
    pub max_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolynomialFit {
    pub degree: usize,
    #[serde(rename = "F0")]
    pub f0: FittedComponent,
    #[serde(rename = "F1")]
    pub f1: FittedComponent,
    #[serde(rename = "F2")]
    pub f2: FittedComponent,
    pub condition: f64,
    pub max_residual: f64,
}

mod pair_vec {
    use super::*;
    use serde::{Deserializer, Serializer};

    #[derive(Serialize, Deserialize)]
    struct P(#[serde(with = "complex_pair")] Complex64);

    pub fn serialize<S: Serializer>(v: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|z| P(*z)))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Complex64>, D::Error> {
        Ok(Vec::<P>::deserialize(d)?.into_iter().map(|p| p.0).collect())
    }
}

/// Fits each recovered component by a polynomial in `z` with monomial
/// coefficients.
pub fn fit_polynomial(table: &ComponentTable, degree: usize) -> Result<PolynomialFit, DecompositionError> {
    let need = (degree + 1) * (degree + 1);
    if degree > MAX_FIT_DEGREE || table.rows.len() < need {
        return Err(DecompositionError::FitTooLarge { degree, points: table.rows.len() });
    }
    let zs: Vec<Complex64> = table.rows.iter().map(|r| r.z).collect();
    let column = |k: usize| -> Vec<Complex64> { table.rows.iter().map(|r| r.values()[k]).collect() };
    let zero = Complex64::new(0.0, 0.0);
    let mut condition = 0.0f64;
    let mut parts = Vec::with_capacity(3);
    for k in 0..3 {
        let vals = column(k);
        let poly = least_squares(&zs, &vals, degree, zero, 1.0)
            .ok_or(DecompositionError::IllConditionedFit { condition: f64::INFINITY })?;
        if poly.condition > MAX_CONDITION {
            return Err(DecompositionError::IllConditionedFit { condition: poly.condition });
        }
        condition = condition.max(poly.condition);
        let max_residual = zs
            .iter()
            .zip(&vals)
            .map(|(z, v)| (poly.jet(*z)[0] - v).norm())
            .fold(0.0, f64::max);
        parts.push(FittedComponent { coefficients: poly.coeffs, max_residual });
    }
    let f2 = parts.pop().unwrap();
    let f1 = parts.pop().unwrap();
    let f0 = parts.pop().unwrap();
    let max_residual = f0.max_residual.max(f1.max_residual).max(f2.max_residual);
    Ok(PolynomialFit { degree, f0, f1, f2, condition, max_residual })
}
