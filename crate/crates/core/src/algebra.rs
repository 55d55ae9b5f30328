//! The algebra A3: complex triples `a + bρ + cρ²` with `ρ³ = 0`.
//!
//! Multiplication is the lower-triangular Toeplitz product of the Cartan
//! basis. The scalar part `a` is the image under the multiplicative
//! functional `f`, and the elements with `a = 0` form the radical, which is
//! also the unique maximal ideal. Everything outside the radical is
//! invertible, and every analytic function of an element is fixed by its
//! value and first two derivatives at the scalar part.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Default comparison tolerance for [`A3::approx_eq`].
pub const DEFAULT_TOL: f64 = 1e-12;

/// Absolute floor below which the scalar part is treated as zero.
pub const ABS_SINGULAR_FLOOR: f64 = 1e-300;

/// Relative threshold `|a| <= REL_SINGULAR * norm(x)` marking numerical
/// membership of the radical.
pub const REL_SINGULAR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum AlgebraError {
    #[error("element is not invertible: scalar part modulus {modulus:e} against norm {norm:e}")]
    NotInvertible { modulus: f64, norm: f64 },
}

/// An element `a + bρ + cρ²` of A3.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct A3 {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
}

/// The nilpotent part `λ₁ρ + λ₂ρ²` of an element.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Radical {
    pub b: Complex64,
    pub c: Complex64,
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

impl A3 {
    pub const ZERO: A3 = A3 { a: ZERO, b: ZERO, c: ZERO };
    pub const ONE: A3 = A3 { a: ONE, b: ZERO, c: ZERO };
    pub const RHO: A3 = A3 { a: ZERO, b: ONE, c: ZERO };
    pub const RHO2: A3 = A3 { a: ZERO, b: ZERO, c: ONE };

    pub const fn new(a: Complex64, b: Complex64, c: Complex64) -> Self {
        A3 { a, b, c }
    }

    /// Builds an element from real components only.
    pub const fn real(a: f64, b: f64, c: f64) -> Self {
        A3 {
            a: Complex64::new(a, 0.0),
            b: Complex64::new(b, 0.0),
            c: Complex64::new(c, 0.0),
        }
    }

    /// `z·1`.
    pub const fn scalar(z: Complex64) -> Self {
        A3 { a: z, b: ZERO, c: ZERO }
    }

    /// The multiplicative functional `f(a + bρ + cρ²) = a`.
    #[inline]
    pub fn f(&self) -> Complex64 {
        self.a
    }

    pub fn norm(&self) -> f64 {
        (self.a.norm_sqr() + self.b.norm_sqr() + self.c.norm_sqr()).sqrt()
    }

    pub fn radical_part(&self) -> Radical {
        Radical { b: self.b, c: self.c }
    }

    pub fn is_finite(&self) -> bool {
        self.a.is_finite() && self.b.is_finite() && self.c.is_finite()
    }

    pub fn scale(&self, s: Complex64) -> A3 {
        A3::new(self.a * s, self.b * s, self.c * s)
    }

    pub fn scale_re(&self, s: f64) -> A3 {
        A3::new(self.a * s, self.b * s, self.c * s)
    }

    /// Componentwise complex conjugate.
    pub fn conj(&self) -> A3 {
        A3::new(self.a.conj(), self.b.conj(), self.c.conj())
    }

    pub fn components(&self) -> [Complex64; 3] {
        [self.a, self.b, self.c]
    }

    pub fn from_components(v: [Complex64; 3]) -> A3 {
        A3::new(v[0], v[1], v[2])
    }

    /// The six real coordinates `(Re a, Im a, Re b, Im b, Re c, Im c)`.
    pub fn to_real6(&self) -> [f64; 6] {
        [self.a.re, self.a.im, self.b.re, self.b.im, self.c.re, self.c.im]
    }

    pub fn from_real6(v: [f64; 6]) -> A3 {
        A3::new(
            Complex64::new(v[0], v[1]),
            Complex64::new(v[2], v[3]),
            Complex64::new(v[4], v[5]),
        )
    }

    /// Componentwise comparison within an absolute tolerance.
    pub fn approx_eq(&self, other: &A3, tol: f64) -> bool {
        (self.a - other.a).norm() <= tol
            && (self.b - other.b).norm() <= tol
            && (self.c - other.c).norm() <= tol
    }

    /// Largest componentwise modulus of `self - other`.
    pub fn max_component_diff(&self, other: &A3) -> f64 {
        let d = *self - *other;
        d.a.norm().max(d.b.norm()).max(d.c.norm())
    }

    fn check_invertible(&self) -> Result<(), AlgebraError> {
        let modulus = self.a.norm();
        let norm = self.norm();
        if !(modulus > ABS_SINGULAR_FLOOR) || modulus <= REL_SINGULAR * norm {
            return Err(AlgebraError::NotInvertible { modulus, norm });
        }
        Ok(())
    }

    /// `x⁻¹ = 1/a − (b/a²)ρ + ((b² − ac)/a³)ρ²`.
    pub fn invert(&self) -> Result<A3, AlgebraError> {
        self.check_invertible()?;
        let inv = self.a.inv();
        let inv2 = inv * inv;
        Ok(A3::new(
            inv,
            -self.b * inv2,
            (self.b * self.b - self.a * self.c) * inv2 * inv,
        ))
    }

    /// Applies an analytic `g` given `g(a), g′(a), g″(a)`:
    /// `g(a) + g′(a)n + ½g″(a)n²`, exact since `n³ = 0`.
    pub fn lift(&self, g0: Complex64, g1: Complex64, g2: Complex64) -> A3 {
        A3::new(
            g0,
            g1 * self.b,
            g1 * self.c + 0.5 * g2 * self.b * self.b,
        )
    }

    pub fn exp(&self) -> A3 {
        let e = self.a.exp();
        self.lift(e, e, e)
    }

    pub fn sin(&self) -> A3 {
        let (s, c) = (self.a.sin(), self.a.cos());
        self.lift(s, c, -s)
    }

    pub fn cos(&self) -> A3 {
        let (s, c) = (self.a.sin(), self.a.cos());
        self.lift(c, -s, -c)
    }

    /// Principal branch on the scalar part.
    pub fn ln(&self) -> Result<A3, AlgebraError> {
        self.check_invertible()?;
        let inv = self.a.inv();
        Ok(self.lift(self.a.ln(), inv, -inv * inv))
    }

    /// Integer power by repeated squaring; negative exponents go through
    /// [`A3::invert`].
    pub fn powi(&self, k: i32) -> Result<A3, AlgebraError> {
        let base = if k < 0 { self.invert()? } else { *self };
        let mut e = k.unsigned_abs();
        let mut acc = A3::ONE;
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * sq;
            }
            e >>= 1;
            if e > 0 {
                sq = sq * sq;
            }
        }
        Ok(acc)
    }
}

impl Radical {
    pub const fn new(b: Complex64, c: Complex64) -> Self {
        Radical { b, c }
    }

    pub fn to_a3(&self) -> A3 {
        A3::new(ZERO, self.b, self.c)
    }

    /// `n² = b²ρ²`.
    pub fn square(&self) -> Radical {
        Radical::new(ZERO, self.b * self.b)
    }

    pub fn norm(&self) -> f64 {
        self.to_a3().norm()
    }
}

impl From<Complex64> for A3 {
    fn from(z: Complex64) -> Self {
        A3::scalar(z)
    }
}

impl From<Radical> for A3 {
    fn from(r: Radical) -> Self {
        r.to_a3()
    }
}

impl Add for A3 {
    type Output = A3;
    fn add(self, o: A3) -> A3 {
        A3::new(self.a + o.a, self.b + o.b, self.c + o.c)
    }
}

impl Sub for A3 {
    type Output = A3;
    fn sub(self, o: A3) -> A3 {
        A3::new(self.a - o.a, self.b - o.b, self.c - o.c)
    }
}

impl Neg for A3 {
    type Output = A3;
    fn neg(self) -> A3 {
        A3::new(-self.a, -self.b, -self.c)
    }
}

impl Mul for A3 {
    type Output = A3;
    fn mul(self, o: A3) -> A3 {
        // Symmetric grouping keeps the product bitwise commutative.
        A3::new(
            self.a * o.a,
            self.a * o.b + self.b * o.a,
            (self.a * o.c + self.c * o.a) + self.b * o.b,
        )
    }
}

impl Mul<Complex64> for A3 {
    type Output = A3;
    fn mul(self, s: Complex64) -> A3 {
        self.scale(s)
    }
}

impl Mul for Radical {
    type Output = Radical;
    fn mul(self, o: Radical) -> Radical {
        Radical::new(ZERO, self.b * o.b)
    }
}

impl fmt::Display for A3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) + ({})ρ + ({})ρ²", self.a, self.b, self.c)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct A3Repr {
    a: [f64; 2],
    b: [f64; 2],
    c: [f64; 2],
}

fn pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

fn unpair(p: [f64; 2]) -> Complex64 {
    Complex64::new(p[0], p[1])
}

impl Serialize for A3 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        A3Repr {
            a: pair(self.a),
            b: pair(self.b),
            c: pair(self.c),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for A3 {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = A3Repr::deserialize(d)?;
        Ok(A3::new(unpair(r.a), unpair(r.b), unpair(r.c)))
    }
}

/// Serde adapter writing a complex number as `[re, im]`.
pub mod complex_pair {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        [z.re, z.im].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
        let [re, im] = <[f64; 2]>::deserialize(d)?;
        Ok(Complex64::new(re, im))
    }
}
