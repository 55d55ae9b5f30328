//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use a3_core::corpus;
use a3_core::decomposition::{fit_polynomial, peel, PeelOptions, PlaneGrid};
use a3_core::domain::{DomainBox, Embedding};
use a3_core::extension::{build_monogenic_jet, extend_contour_fixed, extend_jet, Contour, MonogenicTriple, PolynomialTriple};
use a3_core::field::{BuiltinField, ScalarLift, TripleField};
use a3_core::frame::E3Frame;
use a3_core::monogenicity::{
    check_monogenic, radical_direction_vanishing, step_safe_box, tolstov_residual, CheckOptions, ComplexGrid,
    DirectionSet, FieldSampler, LimitOptions,
};
use a3_core::{HoloExpr, A3};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn random_a3(rng: &mut ChaCha8Rng) -> A3 {
    let mut v = [0.0; 6];
    for x in &mut v {
        *x = rng.random_range(-1.0..1.0);
    }
    A3::from_real6(v)
}

fn rel_diff(x: &A3, reference: &A3) -> f64 {
    x.max_component_diff(reference) / (1.0 + reference.norm())
}

fn within(limit: Duration, elapsed: Duration) -> bool {
    elapsed <= limit
}

fn ring_axioms() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let eps = f64::EPSILON;
    let (mut assoc, mut dist, mut comm) = (0.0f64, 0.0f64, true);
    for _ in 0..100_000 {
        let (x, y, z) = (random_a3(&mut rng), random_a3(&mut rng), random_a3(&mut rng));
        let e = ((x * y) * z - x * (y * z)).norm() / (eps * x.norm() * y.norm() * z.norm());
        assoc = assoc.max(e);
        let e = (x * (y + z) - (x * y + x * z)).norm() / (eps * x.norm() * (y.norm() + z.norm()));
        dist = dist.max(e);
        comm &= x * y == y * x;
    }
    let mut inv = 0.0f64;
    let mut count = 0;
    while count < 10_000 {
        let x = random_a3(&mut rng);
        if x.a.norm() < 0.1 {
            continue;
        }
        count += 1;
        let kappa = (x.norm() / x.a.norm()).powi(3);
        let err = (x * x.invert().expect("|a| ≥ 0.1") - A3::ONE).norm();
        inv = inv.max(err / (eps * (1.0 + kappa)));
    }
    let t = start.elapsed();
    verdict(
        assoc <= 8.0 && dist <= 8.0 && comm && inv <= 64.0 && within(Duration::from_secs(5), t),
        format!("assoc {assoc:.2}ε, distrib {dist:.2}ε, commutative {comm}, inverse {inv:.2}ε(1+κ), {t:.2?}"),
    )
}

fn oracle_equivalence() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let fixed = Contour::new(Complex64::new(0.0, 0.0), 2.5, 256).expect("valid contour");
    let mut worst = 0.0f64;
    let mut evaluations = 0;
    for (_, f) in corpus::functions() {
        for _ in 0..100 {
            let zeta = random_a3(&mut rng);
            let jet = extend_jet(&f, &zeta).expect("corpus is regular on the unit box");
            let auto = Contour::auto(zeta.f(), [&f], 256).expect("valid contour");
            for gamma in [fixed, auto] {
                let c = extend_contour_fixed(&f, &zeta, &gamma).expect("contour encloses f(ζ)");
                worst = worst.max(rel_diff(&c, &jet));
                evaluations += 1;
            }
        }
    }
    // Spectral convergence with f(ζ) at 0.8 of the contour radius.
    let mut slowest = f64::INFINITY;
    let floor = 1e-12;
    for (_, f) in corpus::functions() {
        for _ in 0..10 {
            let mut zeta = random_a3(&mut rng);
            zeta.a = Complex64::from_polar(2.0, rng.random_range(0.0..std::f64::consts::TAU));
            let jet = extend_jet(&f, &zeta).expect("regular");
            let err = |n: usize| {
                let c = extend_contour_fixed(&f, &zeta, &fixed.with_nodes(n).expect("valid")).expect("encloses");
                rel_diff(&c, &jet)
            };
            let errors: Vec<f64> = [32, 64, 128, 256].iter().map(|&n| err(n)).collect();
            for w in errors.windows(2) {
                if w[0] > floor && w[1] > floor {
                    slowest = slowest.min(w[0] / w[1]);
                }
            }
        }
    }
    let t = start.elapsed();
    verdict(
        worst <= 1e-9 && slowest >= 10.0 && within(Duration::from_secs(10), t),
        format!(
            "{evaluations} contour evaluations at 256 nodes, worst {worst:.2e}; doubling gain from 32 nodes {}, {t:.2?}",
            if slowest.is_finite() { format!("≥ {slowest:.1e}") } else { "at floor".into() }
        ),
    )
}

fn interior_points(domain: &DomainBox, dirs: &DirectionSet, rng: &mut ChaCha8Rng, count: usize) -> Vec<A3> {
    let inner = step_safe_box(domain, &dirs.vectors, &LimitOptions::default()).expect("box wider than the steps");
    (0..count).map(|_| inner.sample(rng, 0.0)).collect()
}

/// Worst Gâteaux residual and worst derivative mismatch over random
/// polynomial triples.
fn built_functions_are_monogenic(domain: &DomainBox, dirs: &DirectionSet, seed: u64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let opts = CheckOptions::default();
    let (mut worst, mut deriv) = (0.0f64, 0.0f64);
    for _ in 0..20 {
        let triple = PolynomialTriple::random(&mut rng, 4).triple();
        let field = TripleField(triple.clone());
        let sampler = FieldSampler::new(&field, domain.clone());
        let derivative = triple.derivative();
        for zeta in interior_points(domain, dirs, &mut rng, 20) {
            let r = check_monogenic(&sampler, &zeta, dirs, &opts).expect("limits converge");
            worst = worst.max(r.worst_residual);
            let want = build_monogenic_jet(&derivative, &zeta).expect("polynomial");
            deriv = deriv.max(rel_diff(&r.derivative, &want));
        }
    }
    (worst, deriv)
}

fn monogenic_check(domain: &DomainBox, dirs: &DirectionSet, seed: u64) -> Verdict {
    let start = Instant::now();
    let (worst, deriv) = built_functions_are_monogenic(domain, dirs, seed);
    let t = start.elapsed();
    verdict(
        worst <= 1e-6 && deriv <= 1e-6,
        format!("400 points, worst residual {worst:.2e}, derivative mismatch {deriv:.2e}, {t:.2?}"),
    )
}

fn negative_controls() -> Verdict {
    let start = Instant::now();
    let domain = DomainBox::unit(Embedding::Identity);
    let dirs = DirectionSet::standard();
    let field = BuiltinField::ConjScalar;
    let sampler = FieldSampler::new(&field, domain.clone());
    let i = A3::scalar(Complex64::i());
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut weakest = f64::INFINITY;
    for zeta in interior_points(&domain, &dirs, &mut rng, 20) {
        let r = check_monogenic(&sampler, &zeta, &dirs, &CheckOptions::default()).expect("limits converge");
        let along_i = r.directions.iter().find(|d| d.estimate.direction == i).expect("i is a standard direction");
        weakest = weakest.min(if r.pass { 0.0 } else { along_i.residual });
    }
    let conj = tolstov_residual(&ComplexGrid::from_fn(-1.0, -1.0, 0.1, 21, 21, |z| z.conj())).expect("grid");
    let conj_dev = conj.residual.values.iter().map(|r| (r.norm() - 2.0).abs()).fold(0.0, f64::max);
    let sq = tolstov_residual(&ComplexGrid::from_fn(-1.0, -1.0, 0.1, 21, 21, |z| z * z)).expect("grid");
    let t = start.elapsed();
    verdict(
        weakest >= 1.0 && conj_dev <= 1e-10 && sq.max_abs <= 1e-10,
        format!(
            "conj residual along i ≥ {weakest:.3}, grid |r| − 2 ≤ {conj_dev:.1e}, z² grid {:.1e}, {t:.2?}",
            sq.max_abs
        ),
    )
}

fn radical_only() -> Verdict {
    let start = Instant::now();
    let domain = DomainBox::unit(Embedding::Identity);
    let opts = LimitOptions::default();
    let inner = step_safe_box(&domain, &a3_core::monogenicity::radical_directions(), &opts).expect("box");
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    let mut points = 0;
    for (_, f) in corpus::functions() {
        let field = ScalarLift { expr: f, power: 2 };
        let sampler = FieldSampler::new(&field, domain.clone());
        for _ in 0..50 {
            let zeta = inner.sample(&mut rng, 0.0);
            let r = radical_direction_vanishing(&sampler, &zeta, &opts, 1e-8).expect("hypothesis holds");
            worst = worst.max(r.worst);
            points += 1;
        }
    }
    let t = start.elapsed();
    verdict(worst <= 1e-8, format!("{points} points, worst radical derivative {worst:.2e}, {t:.2?}"))
}

/// Peels random polynomial triples and returns (table error, reconstruction
/// error, rebuilt-Φ error, coefficient error).
fn peel_round_trips(domain: &DomainBox, seed: u64, count: usize) -> Result<[f64; 4], String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grid = PlaneGrid::unit(21);
    let mut worst = [0.0f64; 4];
    for n in 0..count {
        let poly = PolynomialTriple::random(&mut rng, 4);
        let triple = poly.triple();
        let field = TripleField(triple.clone());
        let sampler = FieldSampler::new(&field, domain.clone());
        let opts = PeelOptions { seed: n as u64, ..PeelOptions::default() };
        let (table, diag) = peel(&sampler, &grid, &opts).map_err(|e| format!("triple {n}: {e}"))?;
        for row in &table.rows {
            for (k, e) in triple.exprs().iter().enumerate() {
                let want = e.eval_c(row.z).map_err(|e| e.to_string())?;
                worst[0] = worst[0].max((row.values()[k] - want).norm());
            }
        }
        worst[1] = worst[1].max(diag.max_residual);
        let fit = fit_polynomial(&table, 4).map_err(|e| format!("triple {n}: {e}"))?;
        for (got, want) in [&fit.f0, &fit.f1, &fit.f2].iter().zip(&poly.coeffs) {
            for (k, g) in got.coefficients.iter().enumerate() {
                worst[3] = worst[3].max((g - want.get(k).copied().unwrap_or_default()).norm());
            }
        }
        let rebuilt = MonogenicTriple::new(
            HoloExpr::polynomial(&fit.f0.coefficients),
            HoloExpr::polynomial(&fit.f1.coefficients),
            HoloExpr::polynomial(&fit.f2.coefficients),
        );
        for _ in 0..20 {
            let zeta = domain.sample(&mut rng, 0.0);
            let a = build_monogenic_jet(&rebuilt, &zeta).map_err(|e| e.to_string())?;
            let b = build_monogenic_jet(&triple, &zeta).map_err(|e| e.to_string())?;
            worst[2] = worst[2].max(a.max_component_diff(&b));
        }
    }
    Ok(worst)
}

fn decomposition(domain: &DomainBox, seed: u64, count: usize) -> Verdict {
    let start = Instant::now();
    let result = peel_round_trips(domain, seed, count);
    let t = start.elapsed();
    match result {
        Ok(w) => verdict(
            w.iter().all(|e| *e <= 1e-8) && within(Duration::from_secs(60), t),
            format!(
                "{count} triples on 21×21, table {:.1e}, reconstruction {:.1e}, rebuilt Φ {:.1e}, coefficients {:.1e}, {t:.2?}",
                w[0], w[1], w[2], w[3]
            ),
        ),
        Err(e) => verdict(false, e),
    }
}

fn frame_variant() -> Verdict {
    let start = Instant::now();
    let fr = E3Frame::new(A3::real(1.0, 1.0, 0.0), A3::scalar(Complex64::i()), A3::real(0.0, 1.0, 1.0))
        .expect("frame is valid");
    let domain = DomainBox::unit(Embedding::Frame(fr));
    let dirs = DirectionSet::frame(&fr.canonical_triple());
    let (worst, deriv) = built_functions_are_monogenic(&domain, &dirs, 7);
    let peel = peel_round_trips(&domain, 8, 50);
    let t = start.elapsed();
    match peel {
        Ok(w) => verdict(
            worst <= 1e-6 && deriv <= 1e-6 && w.iter().all(|e| *e <= 1e-8),
            format!(
                "frame {{1+ρ, i, ρ+ρ²}}: residual {worst:.2e}, derivative {deriv:.2e}, peel errors {:.1e}/{:.1e}/{:.1e}/{:.1e}, {t:.2?}",
                w[0], w[1], w[2], w[3]
            ),
        ),
        Err(e) => verdict(false, e),
    }
}

fn a3_cli(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_a3")).args(args).output().expect("binary runs")
}

fn thread_independence() -> Verdict {
    let start = Instant::now();
    let dir = tempfile::tempdir().expect("temp dir");
    let triple = dir.path().join("t.json");
    let grid = dir.path().join("g.csv");
    let cfg = dir.path().join("r.json");
    for (kind, path) in [("exp-triple", &triple), ("conj-grid", &grid), ("radical-only", &cfg)] {
        let out = a3_cli(&["fixture", "--kind", kind, "--seed", "3", "--out", path.to_str().expect("utf-8")]);
        if out.status.code() != Some(0) {
            return verdict(false, format!("fixture {kind} failed"));
        }
    }
    let (t, g, c) = (triple.to_str().unwrap(), grid.to_str().unwrap(), cfg.to_str().unwrap());
    let zeta = r#"{"a":[0.3,0.2],"b":[1,0],"c":[0,-1]}"#;
    let runs: Vec<Vec<&str>> = vec![
        vec!["check-monogenic", "--triple", t, "--samples", "12"],
        vec!["check-monogenic", "--config", c],
        vec!["peel", "--triple", t],
        vec!["peel", "--triple", t, "--format", "csv"],
        vec!["extend", "--fn", "exp(z)*sin(z)", "--zeta", zeta, "--method", "both"],
        vec!["build", "--triple", t, "--zeta", zeta, "--method", "both"],
        vec!["tolstov", "--grid", g],
        vec!["fiber-check", "--builtin", "identity", "--z", "[0.2,0.4]", "--component", "1"],
    ];
    let threads = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(4).max(4).to_string();
    for args in &runs {
        let one = a3_cli(&[args.as_slice(), &["--threads", "1"]].concat());
        let many = a3_cli(&[args.as_slice(), &["--threads", threads.as_str()]].concat());
        if one.stdout.is_empty() || one.stdout != many.stdout || one.status.code() != many.status.code() {
            return verdict(false, format!("`a3 {}` differs between 1 and {threads} threads", args.join(" ")));
        }
    }
    verdict(true, format!("{} commands byte-identical at 1 and {threads} threads, {:.2?}", runs.len(), start.elapsed()))
}

type Criterion = Box<dyn Fn() -> Verdict>;

fn main() -> ExitCode {
    let identity = DomainBox::unit(Embedding::Identity);
    let criteria: Vec<(&str, Criterion)> = vec![
        ("1 ring axioms and inversion", Box::new(ring_axioms)),
        ("2 contour route matches jet route", Box::new(oracle_equivalence)),
        ("3 built functions pass the Gâteaux check", {
            let d = identity.clone();
            Box::new(move || monogenic_check(&d, &DirectionSet::standard(), 3))
        }),
        ("4 non-monogenic controls are rejected", Box::new(negative_controls)),
        ("5 radical-only functions", Box::new(radical_only)),
        ("6 decomposition round trip", {
            let d = identity.clone();
            Box::new(move || decomposition(&d, 6, 50))
        }),
        ("7 frame variant", Box::new(frame_variant)),
        ("8 reports independent of thread count", Box::new(thread_independence)),
    ];
    let mut failed = 0;
    for (name, run) in &criteria {
        let v = run();
        println!("{} criterion {name}: {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
        failed += usize::from(!v.pass);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
