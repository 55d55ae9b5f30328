//! Crate-wide error with stable machine-readable codes.

use thiserror::Error;

use crate::algebra::AlgebraError;
use crate::decomposition::DecompositionError;
use crate::domain::DomainError;
use crate::extension::ExtensionError;
use crate::frame::FrameError;
use crate::holo::{EvalError, ParseError};
use crate::monogenicity::{GridError, MonogenicityError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Extension(#[from] ExtensionError),
    #[error(transparent)]
    Monogenicity(#[from] MonogenicityError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Decomposition(#[from] DecompositionError),
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::Algebra(_) => "not_invertible",
            Error::Parse(_) => "parse_error",
            Error::Eval(e) => eval_code(e),
            Error::Frame(e) => frame_code(e),
            Error::Domain(DomainError::InvalidBox { .. }) => "invalid_box",
            Error::Domain(DomainError::Frame(e)) => frame_code(e),
            Error::Extension(e) => match e {
                ExtensionError::InvalidContour(_) => "invalid_contour",
                ExtensionError::ResolventSingular { .. } => "resolvent_singular",
                ExtensionError::ContourDoesNotEnclose { .. } => "contour_does_not_enclose",
                ExtensionError::QuadratureNotConverged(_) => "quadrature_not_converged",
                ExtensionError::Eval(e) => eval_code(e),
            },
            Error::Monogenicity(e) => monogenicity_code(e),
            Error::Grid(e) => match e {
                GridError::GridTooSmall { .. } => "grid_too_small",
                GridError::NonUniformGrid(_) => "non_uniform_grid",
                GridError::Csv(_) => "grid_csv",
            },
            Error::Decomposition(e) => match e {
                DecompositionError::DomainExit { .. } => "fiber_outside_domain",
                DecompositionError::NotMonogenic(_) => "not_monogenic",
                DecompositionError::FiberInconsistent { .. } => "fiber_inconsistent",
                DecompositionError::InterpolationFailed { .. } => "interpolation_failed",
                DecompositionError::IllConditionedFit { .. } => "ill_conditioned_fit",
                DecompositionError::FitTooLarge { .. } => "fit_too_large",
                DecompositionError::InvalidGrid => "invalid_plane_grid",
                DecompositionError::Csv(_) => "table_csv",
                DecompositionError::Sample(e) => monogenicity_code(e),
            },
        }
    }
}

fn eval_code(e: &EvalError) -> &'static str {
    match e {
        EvalError::SingularEvaluation { .. } => "singular_evaluation",
        EvalError::NotInvertible(_) => "not_invertible",
    }
}

fn frame_code(e: &FrameError) -> &'static str {
    match e {
        FrameError::DegenerateFrame(_) => "degenerate_frame",
        FrameError::NonSurjectiveFrame(_) => "non_surjective_frame",
    }
}

fn monogenicity_code(e: &MonogenicityError) -> &'static str {
    match e {
        MonogenicityError::LimitNotConverged { .. } => "limit_not_converged",
        MonogenicityError::DomainExit { .. } => "domain_exit",
        MonogenicityError::NotMonogenicAt { .. } => "not_monogenic_at",
        MonogenicityError::HypothesisViolated { .. } => "hypothesis_violated",
        MonogenicityError::NonFiniteSample { .. } => "non_finite_sample",
        MonogenicityError::SingularBaseDirection { .. } => "singular_base_direction",
        MonogenicityError::Eval(e) => eval_code(e),
    }
}
