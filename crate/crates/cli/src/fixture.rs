//! Seeded input files for the test corpus.

use a3_core::extension::{MonogenicTriple, PolynomialTriple};
use a3_core::monogenicity::ComplexGrid;
use a3_core::HoloExpr;
use clap::ValueEnum;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{CheckConfig, SamplerSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FixtureKind {
    /// Triple JSON of polynomials of degree at most 4.
    PolynomialTriple,
    /// Triple JSON of scaled exponentials `c·exp(w·z)`.
    ExpTriple,
    /// CSV grid of `conj(z)` on `[-1, 1]²`, spacing 0.1.
    ConjGrid,
    /// Check configuration for `ρ²·F(f(ζ))` with radical directions enabled.
    RadicalOnly,
}

pub struct Fixture {
    pub bytes: Vec<u8>,
    pub extension: &'static str,
}

fn unit_disc<R: Rng>(rng: &mut R) -> Complex64 {
    loop {
        let z = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        if z.norm_sqr() <= 1.0 {
            return z;
        }
    }
}

fn exp_term<R: Rng>(rng: &mut R) -> HoloExpr {
    let c = unit_disc(rng);
    let w = unit_disc(rng);
    HoloExpr::Const(c) * (HoloExpr::Const(w) * HoloExpr::Var).exp()
}

fn json_bytes<T: serde::Serialize>(v: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(v).expect("fixture serializes");
    s.push('\n');
    s.into_bytes()
}

pub fn generate(kind: FixtureKind, seed: u64) -> Fixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match kind {
        FixtureKind::PolynomialTriple => {
            let t = PolynomialTriple::random(&mut rng, 4).triple();
            Fixture { bytes: json_bytes(&t), extension: "json" }
        }
        FixtureKind::ExpTriple => {
            let t = MonogenicTriple::new(exp_term(&mut rng), exp_term(&mut rng), exp_term(&mut rng));
            Fixture { bytes: json_bytes(&t), extension: "json" }
        }
        FixtureKind::ConjGrid => {
            let g = ComplexGrid::from_fn(-1.0, -1.0, 0.1, 21, 21, |z| z.conj());
            let mut bytes = Vec::new();
            g.write_csv(&mut bytes).expect("in-memory csv");
            Fixture { bytes, extension: "csv" }
        }
        FixtureKind::RadicalOnly => {
            let mut cfg = CheckConfig::new(SamplerSpec::Lift { expr: exp_term(&mut rng), power: 2 });
            cfg.radical = true;
            cfg.samples = Some(10);
            cfg.seed = Some(seed);
            Fixture { bytes: json_bytes(&cfg), extension: "json" }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_are_deterministic_and_parse() {
        for kind in FixtureKind::value_variants() {
            let a = generate(*kind, 7);
            assert_eq!(a.bytes, generate(*kind, 7).bytes);
            if a.extension == "json" && *kind != FixtureKind::RadicalOnly {
                let t: MonogenicTriple = serde_json::from_slice(&a.bytes).unwrap();
                assert_eq!(json_bytes(&t), a.bytes);
            }
        }
        assert_ne!(generate(FixtureKind::PolynomialTriple, 1).bytes, generate(FixtureKind::PolynomialTriple, 2).bytes);
        let cfg: CheckConfig = serde_json::from_slice(&generate(FixtureKind::RadicalOnly, 3).bytes).unwrap();
        assert!(cfg.radical);
    }

    #[test]
    fn conj_grid_shape() {
        let f = generate(FixtureKind::ConjGrid, 0);
        let g = ComplexGrid::read_csv(f.bytes.as_slice()).unwrap();
        assert_eq!((g.nx, g.ny), (21, 21));
        assert!((g.spacing - 0.1).abs() < 1e-15);
        assert_eq!(g.at(0, 0), Complex64::new(-1.0, 1.0));
    }
}
