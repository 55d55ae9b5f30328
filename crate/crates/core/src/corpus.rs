//! Reference scalar functions used by the oracle tests, the CLI fixtures and
//! the demo.

use crate::holo::{parse_expr, HoloExpr};

const SOURCES: [(&str, &str); 12] = [
    ("constant", "2 - 3i"),
    ("linear", "0.5 + (1 - 2i)*z"),
    ("quadratic", "z^2 - 1"),
    ("cubic", "(0.3 + 0.1i)*z^3 + z"),
    ("quartic", "z^4 - 2*z^2 + 0.5i"),
    ("quintic", "z^5 + (1 + i)*z^2 - 3"),
    ("exp", "exp(z)"),
    ("sin", "sin(z)"),
    ("cos", "cos(z)"),
    ("pole", "1/(z - 5)"),
    ("two-poles", "1/(z - 4.5i) + 2/(z + 6)"),
    ("rational", "(z^2 + 1)/(z - 3 - 3i)"),
];

/// Named entries of the corpus: polynomials up to degree 5, `exp`, `sin`,
/// `cos` and rational functions whose poles lie outside the disc of radius 4.
pub fn functions() -> Vec<(&'static str, HoloExpr)> {
    SOURCES
        .iter()
        .map(|(name, src)| (*name, parse_expr(src).expect("corpus entries parse")))
        .collect()
}
