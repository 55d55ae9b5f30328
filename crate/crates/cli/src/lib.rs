//! Command-line front-end: argument schema, dispatch and report rendering.
//!
//! Exit status is 0 on success, 1 when a numerical verdict fails or a module
//! reports an error, and 2 on usage or configuration errors.

pub mod commands;
pub mod config;
pub mod fixture;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

pub use config::ConfigError;
use fixture::FixtureKind;

#[derive(Debug, Parser)]
#[command(name = "a3", version, about = "Function theory in the nilpotent algebra A3 = span{1, ρ, ρ²}")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Global {
    /// Tolerance overriding the command default.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Contour node count (power of two in 8..=65536).
    #[arg(long, global = true)]
    pub nodes: Option<usize>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; reports do not depend on this.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Jet,
    Contour,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DirsArg {
    Standard,
    Frame,
}

/// Selects the function under test.
#[derive(Debug, Clone, Default, Args)]
pub struct SamplerArgs {
    /// Analytic triple JSON `{"F0":..,"F1":..,"F2":..}`, inline or a path.
    #[arg(long)]
    pub triple: Option<String>,
    /// Built-in field: identity, conj-scalar, conj-componentwise,
    /// radical-only, rho-scalar, inverse.
    #[arg(long)]
    pub builtin: Option<String>,
    /// Expression `F` of the field `ρᵏ·F(f(ζ))`.
    #[arg(long)]
    pub lift: Option<String>,
    /// Power `k` used with `--lift`.
    #[arg(long, default_value_t = 2)]
    pub power: u8,
    /// `unit` or a box JSON `{"frame":..,"lo":[..],"hi":[..]}`.
    #[arg(long = "box")]
    pub boxspec: Option<String>,
    /// Frame JSON `{"e1":..,"e2":..,"e3":..}`; the domain becomes its unit box.
    #[arg(long)]
    pub frame: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub sampler: SamplerArgs,
    /// CSV grid `x,y,re,im`; runs the grid Cauchy–Riemann check instead.
    #[arg(long)]
    pub grid: Option<PathBuf>,
    /// Check configuration JSON; flags given alongside override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub dirs: Option<DirsArg>,
    /// Grid points per axis over the step-safe part of the box.
    #[arg(long)]
    pub resolution: Option<usize>,
    /// Seeded random points instead of a grid.
    #[arg(long)]
    pub samples: Option<usize>,
    /// JSON list of algebra elements, inline or a path.
    #[arg(long)]
    pub points: Option<String>,
    /// Also require the four radical-direction derivatives to vanish.
    #[arg(long)]
    pub radical: bool,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Evaluate an expression at an algebra element.
    Eval {
        #[arg(long = "fn")]
        expr: String,
        /// Element JSON `{"a":[re,im],"b":..,"c":..}`, inline or a path.
        #[arg(long)]
        zeta: String,
    },
    /// Multiplicative inverse of an element.
    Invert {
        #[arg(long)]
        zeta: String,
    },
    /// Principal extension of a scalar function.
    Extend {
        #[arg(long = "fn")]
        expr: String,
        #[arg(long)]
        zeta: String,
        #[arg(long, value_enum, default_value_t = MethodArg::Jet)]
        method: MethodArg,
        /// Contour JSON `{"center":[re,im],"radius":r,"nodes":n}`.
        #[arg(long)]
        contour: Option<String>,
    },
    /// Evaluate the monogenic function built from an analytic triple.
    Build {
        #[arg(long)]
        triple: String,
        #[arg(long)]
        zeta: String,
        #[arg(long, value_enum, default_value_t = MethodArg::Jet)]
        method: MethodArg,
        #[arg(long)]
        contour: Option<String>,
    },
    /// Gâteaux-derivative check over a set of points.
    CheckMonogenic(CheckArgs),
    /// Finite-difference Cauchy–Riemann residual of a CSV grid.
    Tolstov {
        #[arg(long)]
        grid: PathBuf,
    },
    /// Variation of one component along a fiber `f⁻¹(z)`.
    FiberCheck {
        #[command(flatten)]
        sampler: SamplerArgs,
        /// Base point `[re, im]`.
        #[arg(long)]
        z: String,
        #[arg(long, default_value_t = 20)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        component: usize,
    },
    /// Recover the analytic triple on a plane grid.
    Peel {
        #[command(flatten)]
        sampler: SamplerArgs,
        /// Plane grid JSON `{"lo":[re,im],"hi":[re,im],"nx":n,"ny":n}`.
        #[arg(long)]
        plane: Option<String>,
        /// Points per axis of the default `[-1,1]²` grid.
        #[arg(long, default_value_t = 21)]
        n: usize,
        /// Interpolant degree.
        #[arg(long, default_value_t = 6)]
        degree: usize,
        /// Pre-check every this many grid points.
        #[arg(long, default_value_t = 37)]
        stride: usize,
    },
    /// Least-squares polynomial certificate for a component table.
    Fit {
        /// Component table CSV written by `peel`.
        #[arg(long)]
        table: PathBuf,
        #[arg(long, default_value_t = 4)]
        degree: usize,
    },
    /// Write a deterministic input file.
    Fixture {
        #[arg(long, value_enum)]
        kind: FixtureKind,
    },
}

/// Report contents.
#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    Json(Value),
    Bytes(Vec<u8>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub payload: Payload,
    pub pass: bool,
}

impl Outcome {
    pub fn json(pass: bool, value: Value) -> Self {
        Outcome { payload: Payload::Json(value), pass }
    }

    /// Report for a module error, carrying its machine-readable code.
    pub fn error(command: &str, err: impl Into<a3_core::Error>) -> Self {
        let err = err.into();
        Outcome::json(
            false,
            json!({
                "command": command,
                "status": "error",
                "error": { "code": err.code(), "message": err.to_string() },
            }),
        )
    }

    pub fn render(&self) -> Vec<u8> {
        match &self.payload {
            Payload::Json(v) => {
                let mut s = serde_json::to_string_pretty(v).expect("report serializes");
                s.push('\n');
                s.into_bytes()
            }
            Payload::Bytes(b) => b.clone(),
        }
    }

    pub fn exit_code(&self) -> u8 {
        if self.pass {
            0
        } else {
            1
        }
    }
}

/// Runs one command in the current rayon pool.
pub fn run(cli: &Cli) -> Result<Outcome, ConfigError> {
    let g = &cli.global;
    if let Some(t) = g.tol {
        config::positive(t, "--tol")?;
    }
    if matches!(g.threads, Some(0)) {
        return Err(ConfigError::new("--threads must be at least 1"));
    }
    match &cli.command {
        Command::Eval { expr, zeta } => commands::eval(g, expr, zeta),
        Command::Invert { zeta } => commands::invert(g, zeta),
        Command::Extend { expr, zeta, method, contour } => commands::extend(g, expr, zeta, *method, contour.as_deref()),
        Command::Build { triple, zeta, method, contour } => commands::build(g, triple, zeta, *method, contour.as_deref()),
        Command::CheckMonogenic(args) => commands::check(g, args),
        Command::Tolstov { grid } => commands::tolstov(g, grid),
        Command::FiberCheck { sampler, z, count, component } => commands::fiber_check(g, sampler, z, *count, *component),
        Command::Peel { sampler, plane, n, degree, stride } => {
            commands::peel(g, sampler, plane.as_deref(), *n, *degree, *stride)
        }
        Command::Fit { table, degree } => commands::fit(g, table, *degree),
        Command::Fixture { kind } => Ok(commands::fixture(g, *kind)),
    }
}

/// Parses arguments, runs in a pool of `--threads` workers and writes the
/// report. Returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.global.threads {
        builder = builder.num_threads(n.max(1));
    }
    let outcome = match builder.build() {
        Ok(pool) => pool.install(|| run(&cli)),
        Err(e) => Err(ConfigError::new(format!("thread pool: {e}"))),
    };
    let outcome = match outcome {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let bytes = outcome.render();
    let written = match &cli.global.out {
        Some(path) => std::fs::write(path, &bytes).map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(&bytes).map_err(|e| e.to_string())
        }
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return 2;
    }
    outcome.exit_code()
}
