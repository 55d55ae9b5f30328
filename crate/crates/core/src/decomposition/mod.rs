//! Recovery of `(F₀, F₁, F₂)` from samples of a monogenic `Φ`.
//!
//! Component 0 of `Φ` is constant on fibers `f⁻¹(z)` and equals `F₀(z)`.
//! Subtracting the principal extension of an interpolant of `F₀` leaves a
//! function of the form `Φ₁₁ρ + Φ₁₂ρ²`, whose ρ-component is `F₁`; one more
//! subtraction exposes `F₂`.

mod fit;

use std::io::{Read, Write};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use fit::{fit_polynomial, least_squares, FittedComponent, LocalPoly, PolynomialFit, MAX_CONDITION, MAX_FIT_DEGREE};

use crate::algebra::{complex_pair, A3};
use crate::domain::{DomainBox, Embedding};
use crate::frame::CanonicalTriple;
use crate::monogenicity::{check_monogenic, CheckOptions, DirectionSet, FieldSampler, MonogenicityError};

/// Largest radical perturbation used to pick fiber points.
pub const FIBER_RADIUS: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DecompositionError {
    #[error("fiber over {z} does not meet the domain")]
    DomainExit { z: Complex64 },
    #[error("pre-check failed: {0}")]
    NotMonogenic(MonogenicityError),
    #[error("component {component} varies by {deviation:e} along the fiber over {z}")]
    FiberInconsistent { z: Complex64, component: usize, deviation: f64 },
    #[error("interpolation of component {component} failed (condition {condition:e})")]
    InterpolationFailed { component: usize, condition: f64 },
    #[error("fit is ill-conditioned (condition {condition:e})")]
    IllConditionedFit { condition: f64 },
    #[error("degree {degree} needs at most {MAX_FIT_DEGREE} and (degree+1)² grid points, got {points}")]
    FitTooLarge { degree: usize, points: usize },
    #[error("invalid plane grid")]
    InvalidGrid,
    #[error("component table csv: {0}")]
    Csv(String),
    #[error(transparent)]
    Sample(MonogenicityError),
}

/// Uniform rectangular grid in `D = f(Ω)`, stored with `x` varying fastest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlaneGrid {
    #[serde(with = "complex_pair")]
    pub lo: Complex64,
    #[serde(with = "complex_pair")]
    pub hi: Complex64,
    pub nx: usize,
    pub ny: usize,
}

impl PlaneGrid {
    pub fn new(lo: Complex64, hi: Complex64, nx: usize, ny: usize) -> Result<Self, DecompositionError> {
        let g = PlaneGrid { lo, hi, nx, ny };
        g.validate()?;
        Ok(g)
    }

    /// `[-1, 1]²` with `n` points per axis.
    pub fn unit(n: usize) -> Self {
        PlaneGrid { lo: Complex64::new(-1.0, -1.0), hi: Complex64::new(1.0, 1.0), nx: n, ny: n }
    }

    pub fn validate(&self) -> Result<(), DecompositionError> {
        let ok = self.nx >= 2
            && self.ny >= 2
            && self.lo.is_finite()
            && self.hi.is_finite()
            && self.lo.re < self.hi.re
            && self.lo.im < self.hi.im;
        if ok {
            Ok(())
        } else {
            Err(DecompositionError::InvalidGrid)
        }
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn point(&self, idx: usize) -> Complex64 {
        let (i, j) = (idx % self.nx, idx / self.nx);
        let x = self.lo.re + (self.hi.re - self.lo.re) * i as f64 / (self.nx - 1) as f64;
        let y = self.lo.im + (self.hi.im - self.lo.im) * j as f64 / (self.ny - 1) as f64;
        Complex64::new(x, y)
    }

    pub fn points(&self) -> Vec<Complex64> {
        (0..self.len()).map(|k| self.point(k)).collect()
    }

    pub fn center(&self) -> Complex64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn half_width(&self) -> f64 {
        0.5 * (self.hi.re - self.lo.re).max(self.hi.im - self.lo.im)
    }
}

/// Picks points of `f⁻¹(z)` inside a domain box.
pub struct FiberSampler<'a> {
    domain: &'a DomainBox,
    triple: Option<CanonicalTriple>,
}

impl<'a> FiberSampler<'a> {
    pub fn new(domain: &'a DomainBox) -> Self {
        let triple = match domain.embedding() {
            Embedding::Identity => None,
            Embedding::Frame(fr) => Some(fr.canonical_triple()),
        };
        FiberSampler { domain, triple }
    }

    /// A point `ζ` with `f(ζ) = z` whose radical part has norm at most
    /// [`FIBER_RADIUS`] from the fiber point nearest the scalar axis.
    pub fn point<R: Rng>(&self, z: Complex64, rng: &mut R) -> Result<A3, DecompositionError> {
        let (lo, hi) = (self.domain.lo(), self.domain.hi());
        let exit = DecompositionError::DomainExit { z };
        match (&self.triple, self.domain.embedding()) {
            (Some(t), Embedding::Frame(fr)) => {
                let (p0, _) = fr.coordinates(&t.fiber_base(z));
                let (d, _) = fr.coordinates(&t.c);
                let slack = 1e-9;
                let (mut tl, mut th) = (f64::NEG_INFINITY, f64::INFINITY);
                for k in 0..3 {
                    if d[k].abs() <= 1e-12 {
                        if p0[k] < lo[k] - slack || p0[k] > hi[k] + slack {
                            return Err(exit);
                        }
                        continue;
                    }
                    let (a, b) = ((lo[k] - p0[k]) / d[k], (hi[k] - p0[k]) / d[k]);
                    tl = tl.max(a.min(b));
                    th = th.min(a.max(b));
                }
                if tl > th + slack {
                    return Err(exit);
                }
                let mid = 0.0f64.clamp(tl.min(th), th);
                let (a, b) = ((mid - FIBER_RADIUS).max(tl), (mid + FIBER_RADIUS).min(th));
                let s = if a < b { rng.random_range(a..b) } else { mid };
                let coords: [f64; 3] = std::array::from_fn(|k| (p0[k] + s * d[k]).clamp(lo[k], hi[k]));
                Ok(fr.embed_coords(coords))
            }
            _ => {
                if z.re < lo[0] || z.re > hi[0] || z.im < lo[1] || z.im > hi[1] {
                    return Err(exit);
                }
                let u = loop {
                    let u: [f64; 4] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
                    if u.iter().map(|x| x * x).sum::<f64>() <= 1.0 {
                        break u;
                    }
                };
                let mut c = [z.re, z.im, 0.0, 0.0, 0.0, 0.0];
                for k in 2..6 {
                    let base = 0.0f64.clamp(lo[k], hi[k]);
                    c[k] = (base + FIBER_RADIUS * u[k - 2]).clamp(lo[k], hi[k]);
                }
                Ok(A3::from_real6(c))
            }
        }
    }
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiberReport {
    #[serde(with = "complex_pair")]
    pub z: Complex64,
    pub component: usize,
    pub samples: usize,
    pub max_deviation: f64,
}

/// Largest deviation of one component of `Φ` across `count` fiber points.
pub fn fiber_constancy(
    sampler: &FieldSampler<'_>,
    z: Complex64,
    count: usize,
    component: usize,
    seed: u64,
) -> Result<FiberReport, DecompositionError> {
    let fibers = FiberSampler::new(&sampler.domain);
    let mut rng = rng_for(seed, 0);
    let points = (0..count.max(2))
        .map(|_| fibers.point(z, &mut rng))
        .collect::<Result<Vec<_>, _>>()?;
    let values = points
        .par_iter()
        .map(|p| sampler.eval(p).map(|v| v.components()[component.min(2)]))
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<Result<Vec<_>, _>>()
        .map_err(DecompositionError::Sample)?;
    let max_deviation = values.iter().map(|v| (v - values[0]).norm()).fold(0.0, f64::max);
    Ok(FiberReport { z, component, samples: values.len(), max_deviation })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PeelOptions {
    /// Degree of the interpolants supplying `F₀′, F₀″, F₁′`.
    pub degree: usize,
    /// Allowed variation of component 0 between two fiber points.
    pub fiber_tol: f64,
    /// Every `precheck_stride`-th grid point is checked for monogenicity.
    pub precheck_stride: usize,
    pub check: CheckOptions,
    pub seed: u64,
}

impl Default for PeelOptions {
    fn default() -> Self {
        PeelOptions { degree: 6, fiber_tol: 1e-8, precheck_stride: 37, check: CheckOptions::default(), seed: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComponentRow {
    #[serde(with = "complex_pair")]
    pub z: Complex64,
    #[serde(with = "complex_pair")]
    pub f0: Complex64,
    #[serde(with = "complex_pair")]
    pub f1: Complex64,
    #[serde(with = "complex_pair")]
    pub f2: Complex64,
    pub residual: f64,
}

impl ComponentRow {
    pub fn values(&self) -> [Complex64; 3] {
        [self.f0, self.f1, self.f2]
    }
}

/// Diagnostics gathered while peeling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeelDiagnostics {
    /// Grid points that passed the monogenicity pre-check.
    pub prechecked: usize,
    /// `max |component 0|` after stage 2 and `max |component 1|` after stage 3.
    pub stage_residuals: [f64; 2],
    /// Largest disagreement of each recovered `F_k` between two fiber points.
    pub fiber_spread: [f64; 3],
    pub interpolant_condition: f64,
    pub max_residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComponentTable {
    pub rows: Vec<ComponentRow>,
}

#[derive(Debug, Serialize, Deserialize)]
struct CsvRow {
    z_re: f64,
    z_im: f64,
    #[serde(rename = "F0_re")]
    f0_re: f64,
    #[serde(rename = "F0_im")]
    f0_im: f64,
    #[serde(rename = "F1_re")]
    f1_re: f64,
    #[serde(rename = "F1_im")]
    f1_im: f64,
    #[serde(rename = "F2_re")]
    f2_re: f64,
    #[serde(rename = "F2_im")]
    f2_im: f64,
    residual: f64,
}

impl ComponentTable {
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), DecompositionError> {
        let err = |e: csv::Error| DecompositionError::Csv(e.to_string());
        let mut w = csv::Writer::from_writer(writer);
        for r in &self.rows {
            w.serialize(CsvRow {
                z_re: r.z.re,
                z_im: r.z.im,
                f0_re: r.f0.re,
                f0_im: r.f0.im,
                f1_re: r.f1.re,
                f1_im: r.f1.im,
                f2_re: r.f2.re,
                f2_im: r.f2.im,
                residual: r.residual,
            })
            .map_err(err)?;
        }
        w.flush().map_err(|e| DecompositionError::Csv(e.to_string()))
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self, DecompositionError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let rows = rdr
            .deserialize::<CsvRow>()
            .map(|r| {
                r.map(|r| ComponentRow {
                    z: Complex64::new(r.z_re, r.z_im),
                    f0: Complex64::new(r.f0_re, r.f0_im),
                    f1: Complex64::new(r.f1_re, r.f1_im),
                    f2: Complex64::new(r.f2_re, r.f2_im),
                    residual: r.residual,
                })
            })
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| DecompositionError::Csv(e.to_string()))?;
        Ok(ComponentTable { rows })
    }
}

/// Runs `f` over `0..n` in parallel and returns results in index order,
/// reporting the lowest-index error.
fn par_indexed<T, F>(n: usize, f: F) -> Result<Vec<T>, DecompositionError>
where
    T: Send,
    F: Fn(usize) -> Result<T, DecompositionError> + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect::<Vec<_>>().into_iter().collect()
}

fn interpolate(
    grid: &PlaneGrid,
    zs: &[Complex64],
    values: &[Complex64],
    degree: usize,
    component: usize,
) -> Result<LocalPoly, DecompositionError> {
    let poly = least_squares(zs, values, degree, grid.center(), grid.half_width());
    match poly {
        Some(p) if p.condition <= MAX_CONDITION => Ok(p),
        p => Err(DecompositionError::InterpolationFailed {
            component,
            condition: p.map_or(f64::INFINITY, |p| p.condition),
        }),
    }
}

/// Three-stage recovery of `(F₀, F₁, F₂)` on `grid`.
///
/// Each grid value is read at one random fiber point and cross-checked at a
/// second; the reconstruction residual is the larger componentwise error of
/// the rebuilt `Φ` at the two points.
pub fn peel(
    sampler: &FieldSampler<'_>,
    grid: &PlaneGrid,
    opts: &PeelOptions,
) -> Result<(ComponentTable, PeelDiagnostics), DecompositionError> {
    grid.validate()?;
    let need = (opts.degree + 1) * (opts.degree + 1);
    if grid.len() < need {
        return Err(DecompositionError::InterpolationFailed { component: 0, condition: f64::INFINITY });
    }
    let fibers = FiberSampler::new(&sampler.domain);
    let zs = grid.points();
    let n = zs.len();

    let pairs = par_indexed(n, |k| {
        let mut rng = rng_for(opts.seed, k as u64);
        let p = fibers.point(zs[k], &mut rng)?;
        let q = fibers.point(zs[k], &mut rng)?;
        Ok([p, q])
    })?;

    let dirs = match sampler.domain.embedding() {
        Embedding::Identity => DirectionSet::standard(),
        Embedding::Frame(fr) => DirectionSet::frame(&fr.canonical_triple()),
    };
    let stride = opts.precheck_stride.max(1);
    let checks = par_indexed(n.div_ceil(stride), |m| {
        match check_monogenic(sampler, &pairs[m * stride][0], &dirs, &opts.check) {
            Ok(report) => report.verdict().map(|_| true).map_err(DecompositionError::NotMonogenic),
            Err(MonogenicityError::DomainExit { .. }) => Ok(false),
            Err(e) => Err(DecompositionError::NotMonogenic(e)),
        }
    })?;
    let prechecked = checks.iter().filter(|c| **c).count();

    let phi = par_indexed(n, |k| {
        let [p, q] = pairs[k];
        let vp = sampler.eval(&p).map_err(DecompositionError::Sample)?;
        let vq = sampler.eval(&q).map_err(DecompositionError::Sample)?;
        Ok([vp, vq])
    })?;

    // Stage 1: component 0 is F₀ on every fiber.
    let f0: Vec<Complex64> = phi.iter().map(|v| v[0].a).collect();
    let mut spread = [0.0f64; 3];
    for k in 0..n {
        let dev = (phi[k][1].a - phi[k][0].a).norm();
        if dev > opts.fiber_tol * f0[k].norm().max(1.0) {
            return Err(DecompositionError::FiberInconsistent { z: zs[k], component: 0, deviation: dev });
        }
        spread[0] = spread[0].max(dev);
    }
    let p0 = interpolate(grid, &zs, &f0, opts.degree, 0)?;

    // Stage 2: Ψ = Φ − P₀(ζ) has the form Φ₁₁ρ + Φ₁₂ρ².
    let psi: Vec<[A3; 2]> = (0..n)
        .into_par_iter()
        .map(|k| {
            let [p, q] = pairs[k];
            [phi[k][0] - p0.extend(&p), phi[k][1] - p0.extend(&q)]
        })
        .collect();
    let f1: Vec<Complex64> = psi.iter().map(|v| v[0].b).collect();
    let stage2 = psi.iter().flat_map(|v| v.iter().map(|x| x.a.norm())).fold(0.0, f64::max);
    spread[1] = psi.iter().map(|v| (v[1].b - v[0].b).norm()).fold(0.0, f64::max);
    let p1 = interpolate(grid, &zs, &f1, opts.degree, 1)?;

    // Stage 3: Ψ − ρ·P₁(ζ) = F₂ρ².
    let chi: Vec<[A3; 2]> = (0..n)
        .into_par_iter()
        .map(|k| {
            let [p, q] = pairs[k];
            [psi[k][0] - A3::RHO * p1.extend(&p), psi[k][1] - A3::RHO * p1.extend(&q)]
        })
        .collect();
    let f2: Vec<Complex64> = chi.iter().map(|v| v[0].c).collect();
    let stage3 = chi.iter().flat_map(|v| v.iter().map(|x| x.b.norm())).fold(0.0, f64::max);
    spread[2] = chi.iter().map(|v| (v[1].c - v[0].c).norm()).fold(0.0, f64::max);

    let rows: Vec<ComponentRow> = (0..n)
        .into_par_iter()
        .map(|k| {
            let [_, d01, d02] = p0.jet(zs[k]);
            let [_, d11, _] = p1.jet(zs[k]);
            let residual = pairs[k]
                .iter()
                .zip(&phi[k])
                .map(|(zeta, v)| {
                    let rebuilt = zeta.lift(f0[k], d01, d02)
                        + A3::RHO * zeta.lift(f1[k], d11, Complex64::new(0.0, 0.0))
                        + A3::RHO2.scale(f2[k]);
                    rebuilt.max_component_diff(v)
                })
                .fold(0.0, f64::max);
            ComponentRow { z: zs[k], f0: f0[k], f1: f1[k], f2: f2[k], residual }
        })
        .collect();
    let max_residual = rows.iter().map(|r| r.residual).fold(0.0, f64::max);
    let diagnostics = PeelDiagnostics {
        prechecked,
        stage_residuals: [stage2, stage3],
        fiber_spread: spread,
        interpolant_condition: p0.condition.max(p1.condition),
        max_residual,
    };
    Ok((ComponentTable { rows }, diagnostics))
}
