//! Numerical function theory in the commutative algebra A3 with basis
//! `{1, ρ, ρ²}` and `ρ³ = 0`.

pub mod algebra;
pub mod corpus;
pub mod decomposition;
pub mod domain;
pub mod error;
pub mod extension;
pub mod field;
pub mod frame;
pub mod holo;
pub mod monogenicity;

pub use algebra::{AlgebraError, Radical, A3};
pub use error::Error;
pub use holo::{parse_expr, EvalError, HoloExpr, JetValue, ParseError};
