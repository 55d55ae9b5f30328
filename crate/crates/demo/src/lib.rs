//! Browser demo. Each exported function takes plain numbers and strings and
//! returns a JSON report; the same logic is callable natively.

use a3_core::extension::{extend_contour_fixed, extend_jet, Contour};
use a3_core::monogenicity::{tolstov_residual, ComplexGrid};
use a3_core::{parse_expr, HoloExpr, A3};
use num_complex::Complex64;
use serde::Serialize;
use wasm_bindgen::prelude::*;

#[derive(Debug, Serialize)]
pub struct RoutesReport {
    pub jet: A3,
    pub contour: A3,
    pub radius: f64,
    pub nodes: usize,
    /// Largest componentwise difference over `1 + ‖jet‖`.
    pub difference: f64,
}

#[derive(Debug, Serialize)]
pub struct ResidualGrid {
    /// Interior points per axis.
    pub n: usize,
    pub spacing: f64,
    /// `|residual|` row by row, bottom row first.
    pub magnitudes: Vec<f64>,
    pub max: f64,
    pub mean: f64,
}

#[derive(Debug, Serialize)]
pub struct ConvergencePoint {
    pub nodes: usize,
    pub error: f64,
}

fn parse(expr: &str) -> Result<HoloExpr, String> {
    parse_expr(expr).map_err(|e| e.to_string())
}

fn zeta_from(v: &[f64]) -> Result<A3, String> {
    let arr: [f64; 6] = v.try_into().map_err(|_| format!("expected 6 numbers, got {}", v.len()))?;
    Ok(A3::from_real6(arr))
}

/// Jet and contour values of the extension of `expr` at `zeta`, on the
/// circle around `f(ζ)` that avoids the declared singularities.
pub fn routes(expr: &str, zeta: &[f64], nodes: usize) -> Result<RoutesReport, String> {
    let f = parse(expr)?;
    let zeta = zeta_from(zeta)?;
    let jet = extend_jet(&f, &zeta).map_err(|e| e.to_string())?;
    let gamma = Contour::auto(zeta.f(), [&f], nodes).map_err(|e| e.to_string())?;
    let contour = extend_contour_fixed(&f, &zeta, &gamma).map_err(|e| e.to_string())?;
    let difference = contour.max_component_diff(&jet) / (1.0 + jet.norm());
    Ok(RoutesReport { jet, contour, radius: gamma.radius(), nodes, difference })
}

/// Cauchy–Riemann residual of `F(z)` (or `F(conj z)` when `conjugate`) on
/// an `n × n` grid over `[-1, 1]²`.
pub fn residual_grid(expr: &str, conjugate: bool, n: usize) -> Result<ResidualGrid, String> {
    if !(3..=401).contains(&n) {
        return Err(format!("grid size {n} outside 3..=401"));
    }
    let f = parse(expr)?;
    let spacing = 2.0 / (n - 1) as f64;
    let mut failure = None;
    let grid = ComplexGrid::from_fn(-1.0, -1.0, spacing, n, n, |z| {
        let w = if conjugate { z.conj() } else { z };
        f.eval_c(w).unwrap_or_else(|e| {
            failure.get_or_insert(e.to_string());
            Complex64::new(f64::NAN, f64::NAN)
        })
    });
    if let Some(e) = failure {
        return Err(e);
    }
    let report = tolstov_residual(&grid).map_err(|e| e.to_string())?;
    Ok(ResidualGrid {
        n: report.residual.nx,
        spacing,
        magnitudes: report.residual.values.iter().map(|r| r.norm()).collect(),
        max: report.max_abs,
        mean: report.mean_abs,
    })
}

/// Error of the fixed-node contour value against the jet value for
/// 8, 16, …, 1024 nodes on the circle of `radius` about the origin.
pub fn convergence(expr: &str, zeta: &[f64], radius: f64) -> Result<Vec<ConvergencePoint>, String> {
    let f = parse(expr)?;
    let zeta = zeta_from(zeta)?;
    let jet = extend_jet(&f, &zeta).map_err(|e| e.to_string())?;
    (3..=10)
        .map(|k| {
            let nodes = 1usize << k;
            let gamma = Contour::new(Complex64::new(0.0, 0.0), radius, nodes).map_err(|e| e.to_string())?;
            let c = extend_contour_fixed(&f, &zeta, &gamma).map_err(|e| e.to_string())?;
            Ok(ConvergencePoint { nodes, error: c.max_component_diff(&jet) / (1.0 + jet.norm()) })
        })
        .collect()
}

fn to_js<T: Serialize>(r: Result<T, String>) -> Result<String, JsError> {
    let v = r.map_err(|e| JsError::new(&e))?;
    serde_json::to_string(&v).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = compareRoutes)]
pub fn compare_routes(expr: &str, zeta: &[f64], nodes: usize) -> Result<String, JsError> {
    to_js(routes(expr, zeta, nodes))
}

#[wasm_bindgen(js_name = residualGrid)]
pub fn residual_grid_js(expr: &str, conjugate: bool, n: usize) -> Result<String, JsError> {
    to_js(residual_grid(expr, conjugate, n))
}

#[wasm_bindgen(js_name = convergence)]
pub fn convergence_js(expr: &str, zeta: &[f64], radius: f64) -> Result<String, JsError> {
    to_js(convergence(expr, zeta, radius))
}
