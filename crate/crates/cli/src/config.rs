//! Input loading and the check configuration schema.

use std::fs;
use std::path::{Path, PathBuf};

use a3_core::domain::{BoxSpec, DomainBox, Embedding};
use a3_core::extension::MonogenicTriple;
use a3_core::field::{BuiltinField, Field, ScalarLift, TripleField};
use a3_core::frame::{E3Frame, FrameSpec};
use a3_core::monogenicity::{DirectionTag, LimitOptions};
use a3_core::{HoloExpr, A3};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Invalid invocation or input; maps to exit status 2.
#[derive(Debug, Error)]
#[error("{0}")]
pub struct ConfigError(pub String);

impl ConfigError {
    pub fn new(msg: impl Into<String>) -> Self {
        ConfigError(msg.into())
    }
}

pub fn read_file(path: &Path) -> Result<String, ConfigError> {
    fs::read_to_string(path).map_err(|e| ConfigError::new(format!("cannot read {}: {e}", path.display())))
}

/// Parses `arg` as inline JSON when it starts with `{` or `[`, otherwise
/// as the path of a JSON file.
pub fn json_arg<T: DeserializeOwned>(arg: &str, what: &str) -> Result<T, ConfigError> {
    let trimmed = arg.trim_start();
    let text = if trimmed.starts_with('{') || trimmed.starts_with('[') {
        arg.to_string()
    } else {
        read_file(Path::new(arg))?
    };
    serde_json::from_str(&text).map_err(|e| ConfigError::new(format!("invalid {what}: {e}")))
}

pub fn expr_arg(text: &str) -> Result<HoloExpr, ConfigError> {
    a3_core::parse_expr(text).map_err(|e| ConfigError::new(format!("invalid expression {text:?}: {e}")))
}

pub fn positive(value: f64, what: &str) -> Result<f64, ConfigError> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(ConfigError::new(format!("{what} must be positive and finite, got {value}")))
    }
}

/// The function under test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum SamplerSpec {
    Triple(MonogenicTriple),
    Builtin(BuiltinField),
    /// `ρᵏ·F(f(ζ))`.
    Lift { expr: HoloExpr, power: u8 },
    /// CSV grid of scalar samples, checked on the grid only.
    Grid(PathBuf),
}

pub enum Sampler {
    Field(Box<dyn Field>),
    Grid(PathBuf),
}

impl SamplerSpec {
    pub fn build(&self) -> Result<Sampler, ConfigError> {
        Ok(match self {
            SamplerSpec::Triple(t) => Sampler::Field(Box::new(TripleField(t.clone()))),
            SamplerSpec::Builtin(b) => Sampler::Field(Box::new(*b)),
            SamplerSpec::Lift { expr, power } => {
                if *power > 2 {
                    return Err(ConfigError::new(format!("lift power {power} must be 0, 1 or 2")));
                }
                Sampler::Field(Box::new(ScalarLift { expr: expr.clone(), power: *power }))
            }
            SamplerSpec::Grid(p) => {
                if !p.is_file() {
                    return Err(ConfigError::new(format!("grid file {} does not exist", p.display())));
                }
                Sampler::Grid(p.clone())
            }
        })
    }
}

/// Domain of the sampler: an explicit box, the unit box of a frame, or the
/// unit box of A3.
pub fn domain(boxspec: Option<&BoxSpec>, frame: Option<&FrameSpec>) -> Result<DomainBox, ConfigError> {
    let frame_err = |e| ConfigError::new(format!("invalid frame: {e}"));
    match (boxspec, frame) {
        (Some(_), Some(_)) => Err(ConfigError::new("give either a box or a frame, not both")),
        (Some(b), None) => b.build().map_err(|e| ConfigError::new(format!("invalid box: {e}"))),
        (None, Some(f)) => Ok(DomainBox::unit(Embedding::Frame(E3Frame::from_spec(f).map_err(frame_err)?))),
        (None, None) => Ok(DomainBox::unit(Embedding::Identity)),
    }
}

/// `check-monogenic` configuration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckConfig {
    pub sampler: SamplerSpec,
    #[serde(default, rename = "box", skip_serializing_if = "Option::is_none")]
    pub boxspec: Option<BoxSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame: Option<FrameSpec>,
    /// Explicit check points; overrides `samples` and `resolution`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<A3>>,
    /// Number of seeded random points in the step-safe part of the box.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    /// Points per axis of a tensor grid over the step-safe part of the box.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolution: Option<usize>,
    #[serde(default = "default_dirs")]
    pub dirs: DirectionTag,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limit: Option<LimitOptions>,
    /// Also test vanishing of the four radical-direction derivatives.
    #[serde(default)]
    pub radical: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

fn default_dirs() -> DirectionTag {
    DirectionTag::Standard
}

impl CheckConfig {
    pub fn new(sampler: SamplerSpec) -> Self {
        CheckConfig {
            sampler,
            boxspec: None,
            frame: None,
            points: None,
            samples: None,
            resolution: None,
            dirs: DirectionTag::Standard,
            tol: None,
            limit: None,
            radical: false,
            seed: None,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if let Some(t) = self.tol {
            positive(t, "tol")?;
        }
        if let Some(l) = &self.limit {
            positive(l.initial_step, "limit.initial_step")?;
            positive(l.agree_tol, "limit.agree_tol")?;
            if l.steps < 4 {
                return Err(ConfigError::new("limit.steps must be at least 4"));
            }
        }
        if matches!(self.samples, Some(0)) || matches!(self.resolution, Some(0)) {
            return Err(ConfigError::new("samples and resolution must be positive"));
        }
        Ok(())
    }
}
