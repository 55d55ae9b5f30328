//! Grid check of the Cauchy–Riemann system in the form `∂F/∂y = i·∂F/∂x`.
//!
//! Central differences are exact on quadratics; for general analytic data
//! the residual is `−i·h²·F‴/3 + O(h⁴)`.

use std::io::{Read, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("grid needs at least 3 points per axis, got {nx}×{ny}")]
    GridTooSmall { nx: usize, ny: usize },
    #[error("grid is not a uniform rectangle: {0}")]
    NonUniformGrid(String),
    #[error("grid csv: {0}")]
    Csv(String),
}

/// Samples `F(x0 + i·h, y0 + j·h)` stored row by row (`j` outer).
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexGrid {
    pub x0: f64,
    pub y0: f64,
    pub spacing: f64,
    pub nx: usize,
    pub ny: usize,
    pub values: Vec<Complex64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct Row {
    x: f64,
    y: f64,
    re: f64,
    im: f64,
}

/// Distinct sorted coordinates, merging values closer than `tol`.
fn distinct(mut v: Vec<f64>, tol: f64) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::new();
    for x in v {
        if out.last().is_none_or(|l| x - l > tol) {
            out.push(x);
        }
    }
    out
}

impl ComplexGrid {
    pub fn from_fn<F>(x0: f64, y0: f64, spacing: f64, nx: usize, ny: usize, mut f: F) -> Self
    where
        F: FnMut(Complex64) -> Complex64,
    {
        let mut values = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                let z = Complex64::new(x0 + spacing * i as f64, y0 + spacing * j as f64);
                values.push(f(z));
            }
        }
        ComplexGrid { x0, y0, spacing, nx, ny, values }
    }

    pub fn point(&self, i: usize, j: usize) -> Complex64 {
        Complex64::new(self.x0 + self.spacing * i as f64, self.y0 + self.spacing * j as f64)
    }

    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.values[j * self.nx + i]
    }

    /// Rebuilds a grid from scattered `(x, y, F)` samples that lie on a
    /// complete uniform rectangle with equal spacing in both axes.
    pub fn from_samples(rows: &[(f64, f64, Complex64)]) -> Result<Self, GridError> {
        if rows.is_empty() {
            return Err(GridError::GridTooSmall { nx: 0, ny: 0 });
        }
        let span = rows
            .iter()
            .map(|r| r.0.abs().max(r.1.abs()))
            .fold(1.0f64, f64::max);
        let tol = 1e-9 * span;
        let xs = distinct(rows.iter().map(|r| r.0).collect(), tol);
        let ys = distinct(rows.iter().map(|r| r.1).collect(), tol);
        let (nx, ny) = (xs.len(), ys.len());
        if nx < 2 || ny < 2 {
            return Err(GridError::GridTooSmall { nx, ny });
        }
        let hx = (xs[nx - 1] - xs[0]) / (nx - 1) as f64;
        let hy = (ys[ny - 1] - ys[0]) / (ny - 1) as f64;
        if (hx - hy).abs() > 1e-9 * hx.max(hy) {
            return Err(GridError::NonUniformGrid(format!("x spacing {hx} differs from y spacing {hy}")));
        }
        let h = hx;
        for (axis, v) in [("x", &xs), ("y", &ys)] {
            if let Some(w) = v.windows(2).find(|w| ((w[1] - w[0]) - h).abs() > 1e-6 * h) {
                return Err(GridError::NonUniformGrid(format!("{axis} gap {} vs spacing {h}", w[1] - w[0])));
            }
        }
        if rows.len() != nx * ny {
            return Err(GridError::NonUniformGrid(format!("{} samples for a {nx}×{ny} rectangle", rows.len())));
        }
        let mut values = vec![None; nx * ny];
        for &(x, y, v) in rows {
            let i = ((x - xs[0]) / h).round() as usize;
            let j = ((y - ys[0]) / h).round() as usize;
            let slot = &mut values[j * nx + i];
            if slot.is_some() {
                return Err(GridError::NonUniformGrid(format!("duplicate sample at ({x}, {y})")));
            }
            *slot = Some(v);
        }
        let values = values.into_iter().collect::<Option<Vec<_>>>().ok_or_else(|| {
            GridError::NonUniformGrid("missing samples".into())
        })?;
        Ok(ComplexGrid { x0: xs[0], y0: ys[0], spacing: h, nx, ny, values })
    }

    /// Reads `x,y,re,im` rows with a header line.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self, GridError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let mut rows = Vec::new();
        for rec in rdr.deserialize::<Row>() {
            let r = rec.map_err(|e| GridError::Csv(e.to_string()))?;
            rows.push((r.x, r.y, Complex64::new(r.re, r.im)));
        }
        ComplexGrid::from_samples(&rows)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), GridError> {
        let mut w = csv::Writer::from_writer(writer);
        for j in 0..self.ny {
            for i in 0..self.nx {
                let p = self.point(i, j);
                let v = self.at(i, j);
                w.serialize(Row { x: p.re, y: p.im, re: v.re, im: v.im })
                    .map_err(|e| GridError::Csv(e.to_string()))?;
            }
        }
        w.flush().map_err(|e| GridError::Csv(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TolstovReport {
    /// `∂F/∂y − i·∂F/∂x` at interior nodes.
    pub residual: ComplexGrid,
    pub max_abs: f64,
    pub mean_abs: f64,
}

pub fn tolstov_residual(grid: &ComplexGrid) -> Result<TolstovReport, GridError> {
    let (nx, ny) = (grid.nx, grid.ny);
    if nx < 3 || ny < 3 {
        return Err(GridError::GridTooSmall { nx, ny });
    }
    let h2 = 2.0 * grid.spacing;
    let i = Complex64::i();
    let mut values = Vec::with_capacity((nx - 2) * (ny - 2));
    for j in 1..ny - 1 {
        for k in 1..nx - 1 {
            let dy = (grid.at(k, j + 1) - grid.at(k, j - 1)) / h2;
            let dx = (grid.at(k + 1, j) - grid.at(k - 1, j)) / h2;
            values.push(dy - i * dx);
        }
    }
    let max_abs = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let mean_abs = values.iter().map(|v| v.norm()).sum::<f64>() / values.len() as f64;
    let residual = ComplexGrid {
        x0: grid.x0 + grid.spacing,
        y0: grid.y0 + grid.spacing,
        spacing: grid.spacing,
        nx: nx - 2,
        ny: ny - 2,
        values,
    };
    Ok(TolstovReport { residual, max_abs, mean_abs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::holo::parse_expr;

    fn square_grid<F: FnMut(Complex64) -> Complex64>(h: f64, f: F) -> ComplexGrid {
        let n = (2.0 / h).round() as usize + 1;
        ComplexGrid::from_fn(-1.0, -1.0, h, n, n, f)
    }

    #[test]
    fn quadratic_is_exact() {
        let r = tolstov_residual(&square_grid(0.05, |z| z * z)).unwrap();
        assert!(r.max_abs <= 1e-10, "{}", r.max_abs);
        assert_eq!(r.residual.nx, 39);
    }

    #[test]
    fn conjugate_has_constant_residual() {
        let r = tolstov_residual(&square_grid(0.1, |z| z.conj())).unwrap();
        for v in &r.residual.values {
            assert!((v - Complex64::new(0.0, -2.0)).norm() <= 1e-10);
        }
        assert!((r.max_abs - 2.0).abs() <= 1e-10);
        assert!((r.mean_abs - 2.0).abs() <= 1e-10);
    }

    #[test]
    fn constant_is_zero() {
        let r = tolstov_residual(&square_grid(0.25, |_| Complex64::new(3.0, -1.0))).unwrap();
        assert_eq!(r.max_abs, 0.0);
    }

    #[test]
    fn analytic_data_converges_at_second_order() {
        // Leading term −i·h²·F‴/3; halving h cuts the residual by 4.
        let e = parse_expr("exp(z) + z^3").unwrap();
        let f = |z| e.eval_c(z).unwrap();
        let r1 = tolstov_residual(&square_grid(0.1, f)).unwrap();
        let r2 = tolstov_residual(&square_grid(0.05, f)).unwrap();
        let ratio = r1.max_abs / r2.max_abs;
        assert!((ratio - 4.0).abs() < 0.1, "{ratio}");
        let third = e.derivative().derivative().derivative();
        let bound = (1..r1.residual.nx)
            .flat_map(|i| (1..r1.residual.ny).map(move |j| (i, j)))
            .map(|(i, j)| third.eval_c(r1.residual.point(i, j)).unwrap().norm())
            .fold(0.0, f64::max);
        assert!(r1.max_abs <= 1.1 * 0.01 * bound / 3.0);
    }

    #[test]
    fn too_small() {
        let g = ComplexGrid::from_fn(0.0, 0.0, 0.1, 2, 5, |z| z);
        assert_eq!(tolstov_residual(&g).unwrap_err(), GridError::GridTooSmall { nx: 2, ny: 5 });
    }

    #[test]
    fn csv_round_trip_and_validation() {
        let g = square_grid(0.1, |z| z.conj());
        let mut buf = Vec::new();
        g.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("x,y,re,im\n"));
        let back = ComplexGrid::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.values, g.values);
        assert_eq!((back.nx, back.ny), (21, 21));

        let ragged = "x,y,re,im\n0,0,1,0\n0.1,0,1,0\n0,0.1,1,0\n";
        assert!(matches!(ComplexGrid::read_csv(ragged.as_bytes()), Err(GridError::NonUniformGrid(_))));
        let aniso = "x,y,re,im\n0,0,0,0\n0.1,0,0,0\n0,0.2,0,0\n0.1,0.2,0,0\n";
        assert!(matches!(ComplexGrid::read_csv(aniso.as_bytes()), Err(GridError::NonUniformGrid(_))));
        assert!(matches!(ComplexGrid::read_csv("x,y\n1,2\n".as_bytes()), Err(GridError::Csv(_))));
    }
}
