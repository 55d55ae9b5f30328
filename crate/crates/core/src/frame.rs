//! Real three-dimensional subspaces `E₃ = span_ℝ{e₁, e₂, e₃}` of A3 whose
//! image under `f` is all of ℂ.
//!
//! Each fiber `f⁻¹(z) ∩ E₃` is a line parallel to the kernel direction `c`
//! of the canonical triple.

use nalgebra::{Matrix2x3, Matrix3x2, Matrix6x3, Vector2, Vector3, Vector6};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::A3;

/// Scale-invariant rank threshold: `σ_min ≥ RANK_TOL · σ_max`.
pub const RANK_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FrameError {
    #[error("frame vectors are linearly dependent over the reals (singular values {0:?})")]
    DegenerateFrame([f64; 3]),
    #[error("frame is not surjective under f (image singular values {0:?})")]
    NonSurjectiveFrame([f64; 2]),
}

/// Singular values backing a frame's validity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameCertificate {
    /// Of the 6×3 real matrix with columns `e₁, e₂, e₃`, descending.
    pub frame_singular_values: [f64; 3],
    /// Of the 2×3 real matrix of `f(e₁), f(e₂), f(e₃)`, descending.
    pub image_singular_values: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameSpec {
    pub e1: A3,
    pub e2: A3,
    pub e3: A3,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct E3Frame {
    e: [A3; 3],
    certificate: FrameCertificate,
}

/// `a ∈ f⁻¹(1)`, `b ∈ f⁻¹(i)`, `c ∈ f⁻¹(0)` with `‖c‖ = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CanonicalTriple {
    pub a: A3,
    pub b: A3,
    pub c: A3,
    pub certificate: FrameCertificate,
}

fn sorted_desc<const N: usize>(v: impl Iterator<Item = f64>) -> [f64; N] {
    let mut out = [0.0; N];
    for (o, x) in out.iter_mut().zip(v) {
        *o = x;
    }
    out.sort_by(|a, b| b.total_cmp(a));
    out
}

fn full_rank(sv: &[f64]) -> bool {
    let max = sv[0];
    let min = sv[sv.len() - 1];
    max > 0.0 && min.is_finite() && min >= RANK_TOL * max
}

impl E3Frame {
    pub fn new(e1: A3, e2: A3, e3: A3) -> Result<Self, FrameError> {
        let e = [e1, e2, e3];
        let image = Matrix2x3::from_fn(|r, col| {
            let z = e[col].f();
            if r == 0 {
                z.re
            } else {
                z.im
            }
        });
        let image_sv: [f64; 2] = sorted_desc(image.singular_values().iter().copied());
        if !full_rank(&image_sv) {
            return Err(FrameError::NonSurjectiveFrame(image_sv));
        }
        let basis = Matrix6x3::from_fn(|r, col| e[col].to_real6()[r]);
        let frame_sv: [f64; 3] = sorted_desc(basis.singular_values().iter().copied());
        if !full_rank(&frame_sv) {
            return Err(FrameError::DegenerateFrame(frame_sv));
        }
        Ok(E3Frame {
            e,
            certificate: FrameCertificate {
                frame_singular_values: frame_sv,
                image_singular_values: image_sv,
            },
        })
    }

    /// The frame `(1, i, ρ)`.
    pub fn standard() -> Self {
        E3Frame::new(A3::ONE, A3::scalar(Complex64::i()), A3::RHO).expect("standard frame is valid")
    }

    pub fn from_spec(spec: &FrameSpec) -> Result<Self, FrameError> {
        E3Frame::new(spec.e1, spec.e2, spec.e3)
    }

    pub fn spec(&self) -> FrameSpec {
        FrameSpec { e1: self.e[0], e2: self.e[1], e3: self.e[2] }
    }

    pub fn vectors(&self) -> [A3; 3] {
        self.e
    }

    pub fn certificate(&self) -> FrameCertificate {
        self.certificate
    }

    fn image_matrix(&self) -> Matrix2x3<f64> {
        Matrix2x3::from_fn(|r, col| {
            let z = self.e[col].f();
            if r == 0 {
                z.re
            } else {
                z.im
            }
        })
    }

    /// `x·e₁ + y·e₂ + z·e₃`.
    pub fn embed(&self, x: f64, y: f64, z: f64) -> A3 {
        self.e[0].scale_re(x) + self.e[1].scale_re(y) + self.e[2].scale_re(z)
    }

    pub fn embed_coords(&self, v: [f64; 3]) -> A3 {
        self.embed(v[0], v[1], v[2])
    }

    /// `x·f(e₁) + y·f(e₂) + z·f(e₃)`.
    pub fn induced_map(&self, x: f64, y: f64, z: f64) -> Complex64 {
        self.e[0].f() * x + self.e[1].f() * y + self.e[2].f() * z
    }

    /// Least-squares frame coordinates of `ζ` together with the distance of
    /// `ζ` from `E₃`.
    pub fn coordinates(&self, zeta: &A3) -> ([f64; 3], f64) {
        let basis = Matrix6x3::from_fn(|r, col| self.e[col].to_real6()[r]);
        let rhs = Vector6::from_row_slice(&zeta.to_real6());
        let svd = basis.svd(true, true);
        let sol = svd.solve(&rhs, 0.0).expect("frame SVD has both factors");
        let resid = (basis * sol - rhs).norm();
        ([sol[0], sol[1], sol[2]], resid)
    }

    pub fn canonical_triple(&self) -> CanonicalTriple {
        let m = self.image_matrix();
        let mmt = m * m.transpose();
        let inv = mmt
            .try_inverse()
            .expect("surjective frame has an invertible Gram matrix");
        let pinv: Matrix3x2<f64> = m.transpose() * inv;
        let xa = pinv * Vector2::new(1.0, 0.0);
        let xb = pinv * Vector2::new(0.0, 1.0);
        let r0 = Vector3::new(m[(0, 0)], m[(0, 1)], m[(0, 2)]);
        let r1 = Vector3::new(m[(1, 0)], m[(1, 1)], m[(1, 2)]);
        let mut k = r0.cross(&r1);
        let kmax = k.amax();
        if let Some(first) = k.iter().copied().find(|v| v.abs() > 1e-12 * kmax) {
            if first < 0.0 {
                k = -k;
            }
        }
        let c_raw = self.embed(k[0], k[1], k[2]);
        let c = c_raw.scale_re(1.0 / c_raw.norm());
        CanonicalTriple {
            a: self.embed(xa[0], xa[1], xa[2]),
            b: self.embed(xb[0], xb[1], xb[2]),
            c,
            certificate: self.certificate,
        }
    }

    /// Unit direction of the fiber lines `f⁻¹(z) ∩ E₃`.
    pub fn fiber_direction(&self) -> A3 {
        self.canonical_triple().c
    }
}

impl CanonicalTriple {
    /// The point `Re z·a + Im z·b` of the fiber over `z`.
    pub fn fiber_base(&self, z: Complex64) -> A3 {
        self.a.scale_re(z.re) + self.b.scale_re(z.im)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn i() -> A3 {
        A3::scalar(Complex64::i())
    }

    #[test]
    fn validate_examples() {
        assert!(E3Frame::new(A3::ONE, i(), A3::RHO).is_ok());
        assert!(matches!(
            E3Frame::new(A3::ONE, A3::real(2., 0., 0.), A3::RHO),
            Err(FrameError::NonSurjectiveFrame(_))
        ));
        assert!(E3Frame::new(A3::ONE, i(), A3::RHO2).is_ok());
        // Surjective but dependent: e₃ = e₁ + e₂.
        assert!(matches!(
            E3Frame::new(A3::ONE, i(), A3::ONE + i()),
            Err(FrameError::DegenerateFrame(_))
        ));
    }

    #[test]
    fn canonical_examples() {
        let t = E3Frame::new(A3::ONE, i(), A3::RHO).unwrap().canonical_triple();
        assert!(t.a.approx_eq(&A3::ONE, 1e-15));
        assert!(t.b.approx_eq(&i(), 1e-15));
        assert!(t.c.approx_eq(&A3::RHO, 1e-15));

        let t = E3Frame::new(A3::real(1., 1., 0.), i(), A3::RHO2).unwrap().canonical_triple();
        assert!(t.a.approx_eq(&A3::real(1., 1., 0.), 1e-15));
        assert!((t.a.f() - 1.0).norm() <= 1e-12);
    }

    #[test]
    fn embed_examples() {
        let fr = E3Frame::standard();
        let got = fr.embed(2., 3., 1.);
        assert_eq!(got, A3::new(Complex64::new(2., 3.), Complex64::new(1., 0.), Complex64::new(0., 0.)));
        assert_eq!(fr.embed(0., 0., 0.), A3::ZERO);
    }

    #[test]
    fn fiber_direction_examples() {
        assert!(E3Frame::standard().fiber_direction().approx_eq(&A3::RHO, 1e-15));
        let fr = E3Frame::new(A3::ONE, i(), A3::real(0., 1., 1.)).unwrap();
        let s = 0.5f64.sqrt();
        assert!(fr.fiber_direction().approx_eq(&A3::real(0., s, s), 1e-15));
    }

    #[test]
    fn kernel_sign_is_fixed() {
        let fr = E3Frame::new(A3::ONE, i(), A3::real(0., -1., 0.)).unwrap();
        let (coords, _) = fr.coordinates(&fr.fiber_direction());
        assert!(coords[2] > 0.0);
        assert!(fr.fiber_direction().approx_eq(&A3::real(0., -1., 0.), 1e-15));
    }

    #[test]
    fn coordinates_invert_embed() {
        let fr = E3Frame::new(A3::real(1., 1., 0.), i(), A3::real(0., 1., 1.)).unwrap();
        let zeta = fr.embed(0.3, -1.2, 2.5);
        let (v, resid) = fr.coordinates(&zeta);
        assert!(resid < 1e-14);
        assert!((v[0] - 0.3).abs() < 1e-14 && (v[1] + 1.2).abs() < 1e-14 && (v[2] - 2.5).abs() < 1e-14);
        let (_, off) = fr.coordinates(&A3::RHO2);
        assert!(off > 0.1);
    }

    fn arb_frame() -> impl Strategy<Value = E3Frame> {
        proptest::array::uniform3(proptest::array::uniform6(-1.0..1.0f64))
            .prop_filter_map("invalid frame", |vs| {
                let [a, b, c] = vs.map(A3::from_real6);
                E3Frame::new(a, b, c).ok()
            })
    }

    proptest! {
        #[test]
        fn embed_is_linear_under_f(fr in arb_frame(), x in -3.0..3.0f64, y in -3.0..3.0f64, z in -3.0..3.0f64) {
            let lhs = fr.embed(x, y, z).f();
            let rhs = fr.induced_map(x, y, z);
            let scale = 1.0 + x.abs() + y.abs() + z.abs();
            prop_assert!((lhs - rhs).norm() <= 4.0 * f64::EPSILON * scale);
        }

        #[test]
        fn canonical_triple_hits_targets(fr in arb_frame()) {
            let t = fr.canonical_triple();
            let cond = fr.certificate().image_singular_values[0] / fr.certificate().image_singular_values[1];
            prop_assume!(cond < 1e4);
            prop_assert!((t.a.f() - 1.0).norm() <= 1e-12);
            prop_assert!((t.b.f() - Complex64::i()).norm() <= 1e-12);
            prop_assert!(t.c.f().norm() <= 1e-12);
            prop_assert!((t.c.norm() - 1.0).abs() <= 1e-12);
            for v in [t.a, t.b, t.c] {
                let (_, resid) = fr.coordinates(&v);
                prop_assert!(resid <= 1e-10 * (1.0 + v.norm()));
            }
        }

        #[test]
        fn moving_along_fiber_keeps_f(fr in arb_frame(), t in -5.0..5.0f64, p in proptest::array::uniform3(-1.0..1.0f64)) {
            let zeta = fr.embed_coords(p);
            let c = fr.fiber_direction();
            prop_assert!(((zeta + c.scale_re(t)).f() - zeta.f()).norm() <= 1e-12 * (1.0 + t.abs()));
        }
    }
}
