//! Axis-aligned coordinate boxes in A3 or in a frame subspace `E₃`.
//!
//! Boxes are convex, so every intersection with a line or hyperplane
//! parallel to the radical is connected.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::A3;
use crate::frame::{E3Frame, FrameSpec};

/// Distance from `E₃` tolerated when testing frame membership.
const SUBSPACE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DomainError {
    #[error("box bounds must be finite with lo < hi in each of {dim} coordinates")]
    InvalidBox { dim: usize },
    #[error(transparent)]
    Frame(#[from] crate::frame::FrameError),
}

/// How coordinates map to algebra elements.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Embedding {
    /// Six real coordinates `(Re a, Im a, Re b, Im b, Re c, Im c)`.
    Identity,
    /// Frame coordinates `(x, y, z)` of `x·e₁ + y·e₂ + z·e₃`.
    Frame(E3Frame),
}

impl Embedding {
    pub fn dim(&self) -> usize {
        match self {
            Embedding::Identity => 6,
            Embedding::Frame(_) => 3,
        }
    }

    pub fn point(&self, coords: &[f64]) -> A3 {
        match self {
            Embedding::Identity => {
                let mut v = [0.0; 6];
                v.copy_from_slice(coords);
                A3::from_real6(v)
            }
            Embedding::Frame(fr) => fr.embed(coords[0], coords[1], coords[2]),
        }
    }

    /// Coordinates of `ζ`, or `None` when `ζ` is off the frame subspace.
    pub fn coords(&self, zeta: &A3) -> Option<Vec<f64>> {
        match self {
            Embedding::Identity => Some(zeta.to_real6().to_vec()),
            Embedding::Frame(fr) => {
                let (v, resid) = fr.coordinates(zeta);
                (resid <= SUBSPACE_TOL * (1.0 + zeta.norm())).then(|| v.to_vec())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DomainBox {
    embedding: Embedding,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl DomainBox {
    pub fn new(embedding: Embedding, lo: Vec<f64>, hi: Vec<f64>) -> Result<Self, DomainError> {
        let dim = embedding.dim();
        let ok = lo.len() == dim
            && hi.len() == dim
            && lo.iter().zip(&hi).all(|(l, h)| l.is_finite() && h.is_finite() && l < h);
        if !ok {
            return Err(DomainError::InvalidBox { dim });
        }
        Ok(DomainBox { embedding, lo, hi })
    }

    /// `[-1, 1]` in every coordinate.
    pub fn unit(embedding: Embedding) -> Self {
        let d = embedding.dim();
        DomainBox { embedding, lo: vec![-1.0; d], hi: vec![1.0; d] }
    }

    pub fn embedding(&self) -> &Embedding {
        &self.embedding
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    /// The box with each side pulled in by `margins[k]`, or `None` when an
    /// axis collapses.
    pub fn shrink(&self, margins: &[f64]) -> Option<DomainBox> {
        let lo: Vec<f64> = self.lo.iter().zip(margins).map(|(l, m)| l + m).collect();
        let hi: Vec<f64> = self.hi.iter().zip(margins).map(|(h, m)| h - m).collect();
        DomainBox::new(self.embedding, lo, hi).ok()
    }

    pub fn contains(&self, zeta: &A3) -> bool {
        // Frame coordinates come from a least-squares solve.
        let slack = match self.embedding {
            Embedding::Identity => 0.0,
            Embedding::Frame(_) => SUBSPACE_TOL,
        };
        match self.embedding.coords(zeta) {
            Some(v) => v
                .iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(x, (l, h))| *l - slack <= *x && *x <= *h + slack),
            None => false,
        }
    }

    /// Uniform sample from the box shrunk by `margin` on every side.
    pub fn sample<R: Rng>(&self, rng: &mut R, margin: f64) -> A3 {
        let coords: Vec<f64> = self
            .lo
            .iter()
            .zip(&self.hi)
            .map(|(l, h)| {
                let (a, b) = (l + margin, h - margin);
                if a < b {
                    rng.random_range(a..b)
                } else {
                    0.5 * (l + h)
                }
            })
            .collect();
        self.embedding.point(&coords)
    }

    /// Tensor grid with `resolution` points per axis, in lexicographic order.
    pub fn grid(&self, resolution: usize) -> Vec<A3> {
        let d = self.lo.len();
        let r = resolution.max(1);
        let axis = |k: usize, i: usize| {
            if r == 1 {
                0.5 * (self.lo[k] + self.hi[k])
            } else {
                self.lo[k] + (self.hi[k] - self.lo[k]) * (i as f64) / ((r - 1) as f64)
            }
        };
        let total = r.pow(d as u32);
        (0..total)
            .map(|mut idx| {
                let mut coords = vec![0.0; d];
                for k in (0..d).rev() {
                    coords[k] = axis(k, idx % r);
                    idx /= r;
                }
                self.embedding.point(&coords)
            })
            .collect()
    }
}

/// Serializable description of a [`DomainBox`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame: Option<FrameSpec>,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoxSpec {
    pub fn build(&self) -> Result<DomainBox, DomainError> {
        let emb = match &self.frame {
            None => Embedding::Identity,
            Some(spec) => Embedding::Frame(E3Frame::from_spec(spec)?),
        };
        DomainBox::new(emb, self.lo.clone(), self.hi.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use rand::SeedableRng;

    #[test]
    fn unit_box_membership() {
        let b = DomainBox::unit(Embedding::Identity);
        assert!(b.contains(&A3::real(0.5, -0.5, 1.0)));
        assert!(!b.contains(&A3::real(1.5, 0.0, 0.0)));
        let fr = E3Frame::new(A3::real(1., 1., 0.), A3::scalar(Complex64::i()), A3::real(0., 1., 1.)).unwrap();
        let fb = DomainBox::unit(Embedding::Frame(fr));
        assert!(fb.contains(&fr.embed(0.2, -0.9, 0.4)));
        assert!(!fb.contains(&A3::RHO2.scale_re(0.1)));
    }

    #[test]
    fn invalid_boxes() {
        assert!(DomainBox::new(Embedding::Identity, vec![0.0; 6], vec![1.0; 5]).is_err());
        assert!(DomainBox::new(Embedding::Identity, vec![1.0; 6], vec![1.0; 6]).is_err());
    }

    #[test]
    fn grid_and_sample() {
        let b = DomainBox::unit(Embedding::Frame(E3Frame::standard()));
        let g = b.grid(3);
        assert_eq!(g.len(), 27);
        assert_eq!(g[0], A3::new(Complex64::new(-1., -1.), Complex64::new(-1., 0.), Complex64::new(0., 0.)));
        assert_eq!(g[13], A3::ZERO);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let p = b.sample(&mut rng, 0.1);
            assert!(b.contains(&p));
            assert!(p.a.re.abs() <= 0.9 && p.a.im.abs() <= 0.9);
        }
    }
}
