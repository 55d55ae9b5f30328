//! Numerical Gâteaux derivatives and monogenicity checks.
//!
//! The one-sided limit `lim_{δ→0+} (Φ(ζ + δh) − Φ(ζ))/δ` is estimated on the
//! geometric schedule `δ_k = 0.1·2⁻ᵏ`, `k = 0..16`, with one level of
//! Richardson extrapolation. `Φ` is monogenic at `ζ` for a direction set
//! when every limit equals `h·Φ′(ζ)` for a single `Φ′(ζ)`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::A3;
use crate::domain::DomainBox;
use crate::field::Field;
use crate::frame::CanonicalTriple;
use crate::holo::EvalError;

mod tolstov;

pub use tolstov::{tolstov_residual, ComplexGrid, GridError, TolstovReport};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MonogenicityError {
    #[error("difference quotients along {direction} did not stabilise (spread {spread:e})")]
    LimitNotConverged { direction: A3, spread: f64 },
    #[error("step schedule from {zeta} along {direction} leaves the domain")]
    DomainExit { zeta: A3, direction: A3 },
    #[error("not monogenic at {zeta}: direction {direction} has residual {residual:e}")]
    NotMonogenicAt { zeta: A3, direction: A3, residual: f64 },
    #[error("hypothesis violated at {zeta}: {reason}")]
    HypothesisViolated { zeta: A3, reason: String },
    #[error("non-finite sample at {zeta}")]
    NonFiniteSample { zeta: A3 },
    #[error("cannot recover the derivative from base direction {direction}")]
    SingularBaseDirection { direction: A3 },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Tunables for the one-sided limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitOptions {
    pub initial_step: f64,
    /// Number of steps `δ_0, …, δ_{steps−1}`.
    pub steps: usize,
    /// Relative agreement of the last three extrapolants.
    pub agree_tol: f64,
}

impl Default for LimitOptions {
    fn default() -> Self {
        LimitOptions { initial_step: 0.1, steps: 17, agree_tol: 1e-8 }
    }
}

impl LimitOptions {
    pub fn step(&self, k: usize) -> f64 {
        self.initial_step * 0.5f64.powi(k as i32)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DirectionTag {
    Standard,
    Frame,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionSet {
    pub tag: DirectionTag,
    pub vectors: Vec<A3>,
}

impl DirectionSet {
    /// `{±1, ±i, ±ρ, ±iρ, ±ρ², ±iρ²}`.
    pub fn standard() -> Self {
        let i = Complex64::i();
        let base = [A3::ONE, A3::ONE.scale(i), A3::RHO, A3::RHO.scale(i), A3::RHO2, A3::RHO2.scale(i)];
        let vectors = base.iter().flat_map(|h| [*h, -*h]).collect();
        DirectionSet { tag: DirectionTag::Standard, vectors }
    }

    /// `{±a, ±b, ±c}`.
    pub fn frame(t: &CanonicalTriple) -> Self {
        let vectors = [t.a, t.b, t.c].iter().flat_map(|h| [*h, -*h]).collect();
        DirectionSet { tag: DirectionTag::Frame, vectors }
    }

    /// Direction whose limit defines `Φ′`: `1` or `a`.
    pub fn base(&self) -> A3 {
        self.vectors[0]
    }
}

/// A function together with the box it is defined on.
pub struct FieldSampler<'a> {
    pub field: &'a dyn Field,
    pub domain: DomainBox,
}

impl<'a> FieldSampler<'a> {
    pub fn new(field: &'a dyn Field, domain: DomainBox) -> Self {
        FieldSampler { field, domain }
    }

    pub fn eval(&self, zeta: &A3) -> Result<A3, MonogenicityError> {
        let v = self.field.eval(zeta)?;
        if !v.is_finite() {
            return Err(MonogenicityError::NonFiniteSample { zeta: *zeta });
        }
        Ok(v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitEstimate {
    pub direction: A3,
    /// Difference quotients along the step schedule.
    pub raw: Vec<A3>,
    /// `2·D_{k+1} − D_k`.
    pub extrapolants: Vec<A3>,
    pub limit: A3,
    pub converged: bool,
    /// Largest pairwise gap among the last three extrapolants, relative.
    pub spread: f64,
}

fn estimate_limit(
    sampler: &FieldSampler<'_>,
    zeta: &A3,
    h: &A3,
    opts: &LimitOptions,
) -> Result<LimitEstimate, MonogenicityError> {
    let far = *zeta + h.scale_re(opts.initial_step);
    if !sampler.domain.contains(zeta) || !sampler.domain.contains(&far) {
        return Err(MonogenicityError::DomainExit { zeta: *zeta, direction: *h });
    }
    let base = sampler.eval(zeta)?;
    let mut raw = Vec::with_capacity(opts.steps);
    for k in 0..opts.steps {
        let d = opts.step(k);
        let v = sampler.eval(&(*zeta + h.scale_re(d)))?;
        raw.push((v - base).scale_re(1.0 / d));
    }
    let extrapolants: Vec<A3> = raw.windows(2).map(|w| w[1].scale_re(2.0) - w[0]).collect();
    let (limit, spread) = match extrapolants.as_slice() {
        [.., x, y, z] => {
            let scale = z.norm().max(1.0);
            let spread = (*x - *y).norm().max((*y - *z).norm()).max((*x - *z).norm()) / scale;
            (*z, spread)
        }
        [.., z] => (*z, f64::INFINITY),
        [] => (raw.last().copied().unwrap_or(A3::ZERO), f64::INFINITY),
    };
    Ok(LimitEstimate {
        direction: *h,
        raw,
        extrapolants,
        limit,
        converged: spread <= opts.agree_tol,
        spread,
    })
}

/// One-sided Gâteaux limit of `Φ` at `ζ` along `h`.
pub fn directional_derivative(
    sampler: &FieldSampler<'_>,
    zeta: &A3,
    h: &A3,
    opts: &LimitOptions,
) -> Result<LimitEstimate, MonogenicityError> {
    let est = estimate_limit(sampler, zeta, h, opts)?;
    if !est.converged {
        return Err(MonogenicityError::LimitNotConverged { direction: *h, spread: est.spread });
    }
    Ok(est)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckOptions {
    pub limit: LimitOptions,
    /// Bound on `‖lim_h − h·Φ′‖ / max(1, ‖h·Φ′‖)`.
    pub tol: f64,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions { limit: LimitOptions::default(), tol: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionResult {
    pub estimate: LimitEstimate,
    /// `h·Φ′(ζ)`.
    pub expected: A3,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivativeReport {
    pub zeta: A3,
    pub tag: DirectionTag,
    pub derivative: A3,
    pub directions: Vec<DirectionResult>,
    pub worst_residual: f64,
    pub worst_direction: A3,
    pub pass: bool,
}

impl DerivativeReport {
    pub fn verdict(&self) -> Result<(), MonogenicityError> {
        if self.pass {
            Ok(())
        } else {
            Err(MonogenicityError::NotMonogenicAt {
                zeta: self.zeta,
                direction: self.worst_direction,
                residual: self.worst_residual,
            })
        }
    }
}

/// Estimates `Φ′(ζ)` from the base direction and checks
/// `lim_h = h·Φ′(ζ)` for every `h` in `dirs`.
pub fn check_monogenic(
    sampler: &FieldSampler<'_>,
    zeta: &A3,
    dirs: &DirectionSet,
    opts: &CheckOptions,
) -> Result<DerivativeReport, MonogenicityError> {
    let estimates: Vec<Result<LimitEstimate, MonogenicityError>> = dirs
        .vectors
        .par_iter()
        .map(|h| directional_derivative(sampler, zeta, h, &opts.limit))
        .collect();
    let estimates = estimates.into_iter().collect::<Result<Vec<_>, _>>()?;
    let h0 = dirs.base();
    let h0_inv = h0
        .invert()
        .map_err(|_| MonogenicityError::SingularBaseDirection { direction: h0 })?;
    let derivative = h0_inv * estimates[0].limit;
    let mut worst_residual = 0.0f64;
    let mut worst_direction = h0;
    let directions: Vec<DirectionResult> = estimates
        .into_iter()
        .map(|estimate| {
            let expected = estimate.direction * derivative;
            let residual = (estimate.limit - expected).norm() / expected.norm().max(1.0);
            if residual > worst_residual {
                worst_residual = residual;
                worst_direction = estimate.direction;
            }
            DirectionResult { estimate, expected, residual }
        })
        .collect();
    Ok(DerivativeReport {
        zeta: *zeta,
        tag: dirs.tag,
        derivative,
        directions,
        worst_residual,
        worst_direction,
        pass: worst_residual <= opts.tol,
    })
}

/// Sub-box of points whose whole step schedule along every direction in
/// `dirs` stays inside the domain. `None` when no such point exists.
pub fn step_safe_box(domain: &DomainBox, dirs: &[A3], opts: &LimitOptions) -> Option<DomainBox> {
    let d = domain.embedding().dim();
    let mut margins = vec![0.0f64; d];
    for h in dirs {
        let v = domain.embedding().coords(h)?;
        for (m, x) in margins.iter_mut().zip(v) {
            *m = m.max(opts.initial_step * x.abs());
        }
    }
    let margins: Vec<f64> = margins.iter().map(|m| m * (1.0 + 1e-9) + 1e-12).collect();
    domain.shrink(&margins)
}

/// Radical directions `ρ, iρ, ρ², iρ²`.
pub fn radical_directions() -> [A3; 4] {
    let i = Complex64::i();
    [A3::RHO, A3::RHO.scale(i), A3::RHO2, A3::RHO2.scale(i)]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadicalReport {
    pub zeta: A3,
    pub directions: Vec<A3>,
    /// `‖lim_h‖` for each radical direction.
    pub magnitudes: Vec<f64>,
    pub worst: f64,
    pub pass: bool,
}

impl RadicalReport {
    pub fn verdict(&self) -> Result<(), MonogenicityError> {
        if self.pass {
            return Ok(());
        }
        let k = self
            .magnitudes
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map_or(0, |(k, _)| k);
        Err(MonogenicityError::NotMonogenicAt {
            zeta: self.zeta,
            direction: self.directions[k],
            residual: self.worst,
        })
    }
}

/// For `Φ = ρ²Φ₂`, confirms the limits along the four radical directions
/// vanish.
pub fn radical_direction_vanishing(
    sampler: &FieldSampler<'_>,
    zeta: &A3,
    opts: &LimitOptions,
    tol: f64,
) -> Result<RadicalReport, MonogenicityError> {
    let dirs = radical_directions();
    let mut probes = vec![*zeta];
    probes.extend(dirs.iter().map(|h| *zeta + h.scale_re(opts.initial_step)));
    for p in &probes {
        if !sampler.domain.contains(p) {
            continue;
        }
        let v = sampler.eval(p)?;
        let scale = 1e-12 * (1.0 + v.norm());
        if v.a.norm() > scale || v.b.norm() > scale {
            return Err(MonogenicityError::HypothesisViolated {
                zeta: *p,
                reason: format!("value {v} has nonzero scalar or ρ component"),
            });
        }
    }
    let magnitudes = dirs
        .iter()
        .map(|h| directional_derivative(sampler, zeta, h, opts).map(|e| e.limit.norm()))
        .collect::<Result<Vec<_>, _>>()?;
    let worst = magnitudes.iter().copied().fold(0.0, f64::max);
    Ok(RadicalReport {
        zeta: *zeta,
        directions: dirs.to_vec(),
        magnitudes,
        worst,
        pass: worst <= tol,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundednessReport {
    pub bounded: bool,
    pub max_norm: f64,
    pub samples: usize,
}

/// Samples the domain on a tensor grid. `bounded` holds when every norm
/// is finite and at most `growth_limit`.
pub fn local_boundedness(
    sampler: &FieldSampler<'_>,
    resolution: usize,
    growth_limit: f64,
) -> Result<BoundednessReport, MonogenicityError> {
    let pts = sampler.domain.grid(resolution);
    let norms: Vec<Result<f64, MonogenicityError>> = pts
        .par_iter()
        .map(|p| match sampler.field.eval(p) {
            Ok(v) if v.is_finite() => Ok(v.norm()),
            _ => Err(MonogenicityError::NonFiniteSample { zeta: *p }),
        })
        .collect();
    let mut max_norm = 0.0f64;
    for n in norms {
        max_norm = max_norm.max(n?);
    }
    Ok(BoundednessReport {
        bounded: max_norm <= growth_limit,
        max_norm,
        samples: pts.len(),
    })
}
