//! One function per subcommand. Each returns the report, or a
//! [`ConfigError`] for invalid input.

use std::fs::File;
use std::path::Path;

use a3_core::decomposition::{fit_polynomial, peel as peel_grid, fiber_constancy, ComponentTable, PeelOptions, PlaneGrid};
use a3_core::domain::{BoxSpec, DomainBox, Embedding};
use a3_core::extension::{build_monogenic, extend_contour, extend_jet, Contour, Method, MonogenicTriple};
use a3_core::field::BuiltinField;
use a3_core::frame::{E3Frame, FrameSpec};
use a3_core::monogenicity::{
    check_monogenic, local_boundedness, radical_direction_vanishing, step_safe_box, tolstov_residual, CheckOptions,
    ComplexGrid, DirectionSet, DirectionTag, FieldSampler,
};
use a3_core::A3;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{self, json_arg, CheckConfig, ConfigError, Sampler, SamplerSpec};
use crate::fixture::{self, FixtureKind};
use crate::{CheckArgs, DirsArg, Format, Global, MethodArg, Outcome, Payload, SamplerArgs};

const DEFAULT_NODES: usize = 256;
const EXTEND_TOL: f64 = 1e-10;
const CHECK_TOL: f64 = 1e-6;
const RADICAL_TOL: f64 = 1e-8;
const GRID_TOL: f64 = 1e-8;
const FIBER_TOL: f64 = 1e-8;
/// Norm bound used by the boundedness scan reported with each check.
const GROWTH_LIMIT: f64 = 1e12;

fn json_only(g: &Global, command: &str) -> Result<(), ConfigError> {
    if g.format == Format::Csv {
        return Err(ConfigError::new(format!("{command} has no csv output")));
    }
    Ok(())
}

fn error_value(err: impl Into<a3_core::Error>) -> Value {
    let err = err.into();
    json!({ "code": err.code(), "message": err.to_string() })
}

pub fn eval(g: &Global, expr: &str, zeta: &str) -> Result<Outcome, ConfigError> {
    json_only(g, "eval")?;
    let e = config::expr_arg(expr)?;
    let z: A3 = json_arg(zeta, "zeta")?;
    Ok(match (e.eval_a3(&z), e.eval_c(z.f())) {
        (Ok(v), Ok(s)) => Outcome::json(
            true,
            json!({
                "command": "eval",
                "status": "ok",
                "expr": e.to_string(),
                "zeta": z,
                "value": v,
                "scalar": [s.re, s.im],
            }),
        ),
        (Err(err), _) | (_, Err(err)) => Outcome::error("eval", err),
    })
}

pub fn invert(g: &Global, zeta: &str) -> Result<Outcome, ConfigError> {
    json_only(g, "invert")?;
    let z: A3 = json_arg(zeta, "zeta")?;
    Ok(match z.invert() {
        Ok(v) => Outcome::json(true, json!({ "command": "invert", "status": "ok", "zeta": z, "inverse": v })),
        Err(e) => Outcome::error("invert", e),
    })
}

fn nodes(g: &Global) -> usize {
    g.nodes.unwrap_or(DEFAULT_NODES)
}

fn contour_arg(g: &Global, arg: Option<&str>) -> Result<Option<Contour>, ConfigError> {
    let Some(a) = arg else { return Ok(None) };
    let c: Contour = json_arg(a, "contour")?;
    match g.nodes {
        Some(n) => c.with_nodes(n).map(Some).map_err(|e| ConfigError::new(e.to_string())),
        None => Ok(Some(c)),
    }
}

/// Runs the requested routes; `contour` computes one contour result.
fn dual_route(
    g: &Global,
    command: &str,
    method: MethodArg,
    jet: impl Fn() -> Result<A3, a3_core::Error>,
    contour: impl Fn() -> Result<(A3, Value), a3_core::Error>,
    mut header: serde_json::Map<String, Value>,
) -> Outcome {
    let mut results = Vec::new();
    let mut jet_value = None;
    let mut contour_value = None;
    if matches!(method, MethodArg::Jet | MethodArg::Both) {
        match jet() {
            Ok(v) => {
                jet_value = Some(v);
                results.push(json!({ "method": "jet", "value": v }));
            }
            Err(e) => return Outcome::error(command, e),
        }
    }
    if matches!(method, MethodArg::Contour | MethodArg::Both) {
        match contour() {
            Ok((v, extra)) => {
                contour_value = Some(v);
                let mut r = json!({ "method": "contour", "value": v });
                r.as_object_mut().unwrap().extend(extra.as_object().cloned().unwrap_or_default());
                results.push(r);
            }
            Err(e) => return Outcome::error(command, e),
        }
    }
    let mut pass = true;
    if let (Some(j), Some(c)) = (jet_value, contour_value) {
        let tol = g.tol.unwrap_or(EXTEND_TOL);
        let agreement = j.max_component_diff(&c) / j.norm().max(1.0);
        pass = agreement <= tol;
        header.insert("agreement".into(), json!(agreement));
        header.insert("tol".into(), json!(tol));
    }
    header.insert("command".into(), json!(command));
    header.insert("status".into(), json!(if pass { "ok" } else { "fail" }));
    header.insert("results".into(), Value::Array(results));
    Outcome::json(pass, Value::Object(header))
}

fn contour_extra(gamma: &Contour, convergence: Option<&a3_core::extension::ConvergenceRecord>) -> Value {
    json!({ "contour": gamma, "convergence": convergence })
}

pub fn extend(g: &Global, expr: &str, zeta: &str, method: MethodArg, contour: Option<&str>) -> Result<Outcome, ConfigError> {
    json_only(g, "extend")?;
    let e = config::expr_arg(expr)?;
    let z: A3 = json_arg(zeta, "zeta")?;
    let given = contour_arg(g, contour)?;
    let n = nodes(g);
    let jet = || extend_jet(&e, &z).map_err(a3_core::Error::from);
    let cont = || {
        let gamma = match given {
            Some(c) => c,
            None => Contour::auto(z.f(), [&e], n)?,
        };
        let r = extend_contour(&e, &z, &gamma)?;
        Ok((r.value, contour_extra(&gamma, Some(&r.convergence))))
    };
    let mut header = serde_json::Map::new();
    header.insert("expr".into(), json!(e.to_string()));
    header.insert("zeta".into(), json!(z));
    Ok(dual_route(g, "extend", method, jet, cont, header))
}

pub fn build(g: &Global, triple: &str, zeta: &str, method: MethodArg, contour: Option<&str>) -> Result<Outcome, ConfigError> {
    json_only(g, "build")?;
    let t: MonogenicTriple = json_arg(triple, "triple")?;
    let z: A3 = json_arg(zeta, "zeta")?;
    let given = contour_arg(g, contour)?;
    let n = nodes(g);
    let jet = || Ok(build_monogenic(&t, &z, &Method::Jet)?.value);
    let cont = || {
        let gamma = match given {
            Some(c) => c,
            None => Contour::auto(z.f(), t.exprs(), n)?,
        };
        let m = Method::Contour { contour: Some(gamma), nodes: n, adaptive: true };
        let r = build_monogenic(&t, &z, &m)?;
        Ok((r.value, contour_extra(&gamma, r.convergence.as_ref())))
    };
    let mut header = serde_json::Map::new();
    header.insert("triple".into(), json!(t));
    header.insert("zeta".into(), json!(z));
    Ok(dual_route(g, "build", method, jet, cont, header))
}

impl SamplerArgs {
    fn spec(&self) -> Result<Option<SamplerSpec>, ConfigError> {
        let mut specs = Vec::new();
        if let Some(t) = &self.triple {
            specs.push(SamplerSpec::Triple(json_arg(t, "triple")?));
        }
        if let Some(b) = &self.builtin {
            let f: BuiltinField = serde_json::from_value(Value::String(b.clone()))
                .map_err(|_| ConfigError::new(format!("unknown builtin field {b:?}")))?;
            specs.push(SamplerSpec::Builtin(f));
        }
        if let Some(l) = &self.lift {
            specs.push(SamplerSpec::Lift { expr: config::expr_arg(l)?, power: self.power });
        }
        if specs.len() > 1 {
            return Err(ConfigError::new("give only one of --triple, --builtin, --lift"));
        }
        Ok(specs.pop())
    }

    fn boxspec(&self) -> Result<Option<BoxSpec>, ConfigError> {
        match self.boxspec.as_deref() {
            None | Some("unit") => Ok(None),
            Some(b) => json_arg(b, "box").map(Some),
        }
    }

    fn frame(&self) -> Result<Option<FrameSpec>, ConfigError> {
        self.frame.as_deref().map(|f| json_arg(f, "frame")).transpose()
    }

    /// The field and its domain; a grid sampler is rejected.
    fn field(&self) -> Result<(Box<dyn a3_core::field::Field>, DomainBox), ConfigError> {
        let spec = self.spec()?.ok_or_else(|| ConfigError::new("one of --triple, --builtin, --lift is required"))?;
        let Sampler::Field(f) = spec.build()? else {
            unreachable!("flags cannot select a grid sampler")
        };
        let domain = config::domain(self.boxspec()?.as_ref(), self.frame()?.as_ref())?;
        Ok((f, domain))
    }
}

fn check_config(args: &CheckArgs, g: &Global) -> Result<CheckConfig, ConfigError> {
    let flag_spec = match &args.grid {
        Some(p) => {
            if args.sampler.spec()?.is_some() {
                return Err(ConfigError::new("--grid excludes --triple, --builtin and --lift"));
            }
            Some(SamplerSpec::Grid(p.clone()))
        }
        None => args.sampler.spec()?,
    };
    let mut cfg = match (&args.config, flag_spec.clone()) {
        (Some(path), _) => {
            let text = config::read_file(path)?;
            let mut cfg: CheckConfig =
                serde_json::from_str(&text).map_err(|e| ConfigError::new(format!("invalid check config: {e}")))?;
            if let Some(s) = flag_spec {
                cfg.sampler = s;
            }
            cfg
        }
        (None, Some(s)) => CheckConfig::new(s),
        (None, None) => return Err(ConfigError::new("give --config, --grid, --triple, --builtin or --lift")),
    };
    if let Some(b) = args.sampler.boxspec()? {
        cfg.boxspec = Some(b);
    }
    if let Some(f) = args.sampler.frame()? {
        cfg.frame = Some(f);
    }
    if let Some(d) = args.dirs {
        cfg.dirs = match d {
            DirsArg::Standard => DirectionTag::Standard,
            DirsArg::Frame => DirectionTag::Frame,
        };
    }
    if let Some(p) = &args.points {
        cfg.points = Some(json_arg(p, "points")?);
    }
    if args.samples.is_some() {
        cfg.samples = args.samples;
    }
    if args.resolution.is_some() {
        cfg.resolution = args.resolution;
    }
    cfg.radical |= args.radical;
    if g.tol.is_some() {
        cfg.tol = g.tol;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn grid_report(command: &str, g: &Global, path: &Path, tol: f64) -> Result<Outcome, ConfigError> {
    let file = File::open(path).map_err(|e| ConfigError::new(format!("cannot read {}: {e}", path.display())))?;
    let grid = match ComplexGrid::read_csv(file) {
        Ok(grid) => grid,
        Err(e) => return Ok(Outcome::error(command, e)),
    };
    let report = match tolstov_residual(&grid) {
        Ok(r) => r,
        Err(e) => return Ok(Outcome::error(command, e)),
    };
    let pass = report.max_abs <= tol;
    if g.format == Format::Csv {
        let mut bytes = Vec::new();
        report.residual.write_csv(&mut bytes).map_err(|e| ConfigError::new(e.to_string()))?;
        return Ok(Outcome { payload: Payload::Bytes(bytes), pass });
    }
    Ok(Outcome::json(
        pass,
        json!({
            "command": command,
            "status": if pass { "pass" } else { "fail" },
            "nx": grid.nx,
            "ny": grid.ny,
            "spacing": grid.spacing,
            "interior": report.residual.values.len(),
            "max_residual": report.max_abs,
            "mean_residual": report.mean_abs,
            "tol": tol,
        }),
    ))
}

pub fn tolstov(g: &Global, grid: &Path) -> Result<Outcome, ConfigError> {
    grid_report("tolstov", g, grid, g.tol.unwrap_or(GRID_TOL))
}

fn direction_set(tag: DirectionTag, domain: &DomainBox) -> DirectionSet {
    match (tag, domain.embedding()) {
        (DirectionTag::Standard, _) => DirectionSet::standard(),
        (DirectionTag::Frame, Embedding::Frame(fr)) => DirectionSet::frame(&fr.canonical_triple()),
        (DirectionTag::Frame, Embedding::Identity) => DirectionSet::frame(&E3Frame::standard().canonical_triple()),
    }
}

pub fn check(g: &Global, args: &CheckArgs) -> Result<Outcome, ConfigError> {
    let cfg = check_config(args, g)?;
    let field = match cfg.sampler.build()? {
        Sampler::Grid(path) => return grid_report("check-monogenic", g, &path, cfg.tol.unwrap_or(GRID_TOL)),
        Sampler::Field(f) => f,
    };
    json_only(g, "check-monogenic")?;
    let tol = cfg.tol.unwrap_or(CHECK_TOL);
    let domain = config::domain(cfg.boxspec.as_ref(), cfg.frame.as_ref())?;
    let dirs = direction_set(cfg.dirs, &domain);
    let limit = cfg.limit.unwrap_or_default();
    let points = match &cfg.points {
        Some(p) => p.clone(),
        None => {
            let safe = step_safe_box(&domain, &dirs.vectors, &limit)
                .ok_or_else(|| ConfigError::new("the direction set leaves the domain from every point"))?;
            match cfg.samples {
                Some(n) => {
                    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.unwrap_or(g.seed));
                    (0..n).map(|_| safe.sample(&mut rng, 0.0)).collect()
                }
                None => safe.grid(cfg.resolution.unwrap_or(3)),
            }
        }
    };
    let sampler = FieldSampler::new(field.as_ref(), domain);
    let opts = CheckOptions { limit, tol };
    let entries: Vec<(bool, f64, Value)> = points
        .par_iter()
        .map(|z| match check_monogenic(&sampler, z, &dirs, &opts) {
            Ok(r) => (
                r.pass,
                r.worst_residual,
                json!({
                    "zeta": z,
                    "pass": r.pass,
                    "worst_residual": r.worst_residual,
                    "worst_direction": r.worst_direction,
                    "derivative": r.derivative,
                }),
            ),
            Err(e) => (false, f64::INFINITY, json!({ "zeta": z, "pass": false, "error": error_value(e) })),
        })
        .collect();
    let mut pass = entries.iter().all(|e| e.0);
    let worst = entries.iter().map(|e| e.1).fold(0.0, f64::max);
    let failed = entries.iter().filter(|e| !e.0).count();
    let mut report = json!({
        "command": "check-monogenic",
        "dirs": dirs.tag,
        "tol": tol,
        "checked": entries.len(),
        "failed": failed,
        "worst_residual": if worst.is_finite() { json!(worst) } else { Value::Null },
        "points": entries.into_iter().map(|e| e.2).collect::<Vec<_>>(),
        "boundedness": match local_boundedness(&sampler, 3, GROWTH_LIMIT) {
            Ok(b) => json!(b),
            Err(e) => json!({ "error": error_value(e) }),
        },
    });
    if cfg.radical {
        let rtol = g.tol.unwrap_or(RADICAL_TOL);
        let radical: Vec<(bool, Value)> = points
            .par_iter()
            .map(|z| match radical_direction_vanishing(&sampler, z, &limit, rtol) {
                Ok(r) => (r.pass, json!({ "zeta": z, "pass": r.pass, "worst": r.worst, "magnitudes": r.magnitudes })),
                Err(e) => (false, json!({ "zeta": z, "pass": false, "error": error_value(e) })),
            })
            .collect();
        pass &= radical.iter().all(|r| r.0);
        report["radical_tol"] = json!(rtol);
        report["radical"] = Value::Array(radical.into_iter().map(|r| r.1).collect());
    }
    report["status"] = json!(if pass { "pass" } else { "fail" });
    Ok(Outcome::json(pass, report))
}

pub fn fiber_check(g: &Global, sampler: &SamplerArgs, z: &str, count: usize, component: usize) -> Result<Outcome, ConfigError> {
    json_only(g, "fiber-check")?;
    if component > 2 {
        return Err(ConfigError::new("--component must be 0, 1 or 2"));
    }
    let [re, im]: [f64; 2] = json_arg(z, "z")?;
    let (field, domain) = sampler.field()?;
    let s = FieldSampler::new(field.as_ref(), domain);
    let tol = g.tol.unwrap_or(FIBER_TOL);
    Ok(match fiber_constancy(&s, Complex64::new(re, im), count, component, g.seed) {
        Ok(r) => {
            let pass = r.max_deviation <= tol;
            let mut v = json!(r);
            v["command"] = json!("fiber-check");
            v["status"] = json!(if pass { "pass" } else { "fail" });
            v["tol"] = json!(tol);
            Outcome::json(pass, v)
        }
        Err(e) => Outcome::error("fiber-check", e),
    })
}

pub fn peel(
    g: &Global,
    sampler: &SamplerArgs,
    plane: Option<&str>,
    n: usize,
    degree: usize,
    stride: usize,
) -> Result<Outcome, ConfigError> {
    let grid = match plane {
        Some(p) => json_arg::<PlaneGrid>(p, "plane")?,
        None => PlaneGrid::unit(n),
    };
    grid.validate().map_err(|e| ConfigError::new(e.to_string()))?;
    let (field, domain) = sampler.field()?;
    let s = FieldSampler::new(field.as_ref(), domain);
    let opts = PeelOptions {
        degree,
        fiber_tol: g.tol.unwrap_or(FIBER_TOL),
        precheck_stride: stride,
        seed: g.seed,
        ..PeelOptions::default()
    };
    let (table, diagnostics) = match peel_grid(&s, &grid, &opts) {
        Ok(r) => r,
        Err(e) => return Ok(Outcome::error("peel", e)),
    };
    if g.format == Format::Csv {
        let mut bytes = Vec::new();
        table.write_csv(&mut bytes).map_err(|e| ConfigError::new(e.to_string()))?;
        return Ok(Outcome { payload: Payload::Bytes(bytes), pass: true });
    }
    Ok(Outcome::json(
        true,
        json!({
            "command": "peel",
            "status": "ok",
            "plane": grid,
            "degree": degree,
            "diagnostics": diagnostics,
            "table": table.rows,
        }),
    ))
}

pub fn fit(g: &Global, table: &Path, degree: usize) -> Result<Outcome, ConfigError> {
    json_only(g, "fit")?;
    let file = File::open(table).map_err(|e| ConfigError::new(format!("cannot read {}: {e}", table.display())))?;
    let t = ComponentTable::read_csv(file).map_err(|e| ConfigError::new(e.to_string()))?;
    Ok(match fit_polynomial(&t, degree) {
        Ok(f) => {
            let mut v = json!(f);
            v["command"] = json!("fit");
            v["status"] = json!("ok");
            Outcome::json(true, v)
        }
        Err(e) => Outcome::error("fit", e),
    })
}

pub fn fixture(g: &Global, kind: FixtureKind) -> Outcome {
    let f = fixture::generate(kind, g.seed);
    Outcome { payload: Payload::Bytes(f.bytes), pass: true }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn global() -> Global {
        Global { tol: None, nodes: None, out: None, format: Format::Json, seed: 0, threads: None }
    }

    fn value(o: &Outcome) -> &Value {
        match &o.payload {
            Payload::Json(v) => v,
            Payload::Bytes(_) => panic!("expected json"),
        }
    }

    #[test]
    fn extend_both_routes_agree() {
        let o = extend(&global(), "exp(z)", r#"{"a":[1,0],"b":[1,0],"c":[0,0]}"#, MethodArg::Both, None).unwrap();
        assert!(o.pass);
        assert!(value(&o)["agreement"].as_f64().unwrap() <= 1e-10);
        assert_eq!(value(&o)["results"].as_array().unwrap().len(), 2);
    }

    #[test]
    fn invert_singular_reports_code() {
        let o = invert(&global(), r#"{"a":[0,0],"b":[1,0],"c":[0,0]}"#).unwrap();
        assert!(!o.pass);
        assert_eq!(value(&o)["error"]["code"], "not_invertible");
    }

    #[test]
    fn bad_inputs_are_config_errors() {
        assert!(eval(&global(), "z +", r#"{"a":[0,0],"b":[0,0],"c":[0,0]}"#).is_err());
        assert!(eval(&global(), "z", r#"{"a":[0,0],"b":[0,0]}"#).is_err());
        assert!(invert(&global(), "/nonexistent/zeta.json").is_err());
        let mut g = global();
        g.format = Format::Csv;
        assert!(invert(&g, r#"{"a":[1,0],"b":[0,0],"c":[0,0]}"#).is_err());
    }

    #[test]
    fn check_builtin_controls() {
        let args = |b: &str| CheckArgs {
            sampler: SamplerArgs { builtin: Some(b.into()), power: 2, ..SamplerArgs::default() },
            grid: None,
            config: None,
            dirs: None,
            resolution: Some(2),
            samples: None,
            points: None,
            radical: false,
        };
        let o = check(&global(), &args("identity")).unwrap();
        assert!(o.pass, "{}", value(&o));
        assert_eq!(value(&o)["checked"], 64);
        let o = check(&global(), &args("conj-scalar")).unwrap();
        assert!(!o.pass);
        assert!(value(&o)["worst_residual"].as_f64().unwrap() >= 1.0);
        assert!(check(&global(), &args("no-such-field")).is_err());
    }

    #[test]
    fn unknown_config_keys_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.json");
        std::fs::write(&p, r#"{"sampler":{"builtin":"identity"},"colour":"red"}"#).unwrap();
        let args = CheckArgs {
            sampler: SamplerArgs::default(),
            grid: None,
            config: Some(p),
            dirs: None,
            resolution: None,
            samples: None,
            points: None,
            radical: false,
        };
        let e = check(&global(), &args).unwrap_err();
        assert!(e.0.contains("colour"), "{e}");
    }

    #[test]
    fn expression_literal_is_printed_canonically() {
        let o = eval(&global(), "2*z", r#"{"a":[1,0],"b":[1,0],"c":[0,0]}"#).unwrap();
        assert_eq!(value(&o)["expr"], "(2 * z)");
        assert_eq!(value(&o)["value"]["b"], json!([2.0, 0.0]));
    }
}
