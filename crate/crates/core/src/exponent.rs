//! Log-power exponents in the lower bounds for `‖S_N‖_q`.
//!
//! Taking the level `m = (e^y / 2) log log N`, Hölder interpolation between
//! `L²` and `L⁴` costs `(log N)^{−e^y y² (2/q − 1) / 4}` on top of the `L²`
//! exponent `(e^y (1 + log 2 − y) − 2) / 4`. The sum is maximised where
//! `(2/q − 1) y² + (4/q − 1) y − log 2 = 0`.

use std::f64::consts::LN_2;

use serde::Serialize;

use crate::error::{LabError, Result};
use crate::sathe::l2_exponent_y;

/// Rounded exponent stated for all `q > 0`.
pub const ROUNDED_THEOREM_CONSTANT: f64 = 0.07672;

/// Exponent in the classical `‖S_N‖₁ ≫ √N (log N)^{−1/4}` bound.
pub const HELSON_REFERENCE_EXPONENT: f64 = 0.25;

fn check_q(q: f64) -> Result<()> {
    if !(q > 0.0 && q <= 2.0) {
        return Err(LabError::Domain(format!("q must lie in (0, 2], got {q}")));
    }
    Ok(())
}

/// Positive root of `(2/q − 1) y² + (4/q − 1) y − log 2 = 0`.
///
/// Written as `2 log 2 / (b + √(b² + 4a log 2))`, which avoids cancellation
/// and reduces to `log 2` at `q = 2` where the quadratic term vanishes.
pub fn optimal_y(q: f64) -> Result<f64> {
    check_q(q)?;
    let a = 2.0 / q - 1.0;
    let b = 4.0 / q - 1.0;
    Ok(2.0 * LN_2 / (b + (b * b + 4.0 * a * LN_2).sqrt()))
}

/// Exponent of `log N` in the lower bound at a given `y`.
pub fn exponent_objective(q: f64, y: f64) -> f64 {
    l2_exponent_y(y) - y.exp() * y * y * (2.0 / q - 1.0) / 4.0
}

/// Optimised exponent of `log N` in the lower bound for `‖S_N‖_q`.
pub fn lower_bound_exponent(q: f64) -> Result<f64> {
    let y = optimal_y(q)?;
    Ok(exponent_objective(q, y))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct TheoremConstant {
    /// `(1 − log 2) / 4`.
    pub value: f64,
    pub rounded: f64,
    pub below_rounded: bool,
}

pub fn theorem_constant() -> TheoremConstant {
    let value = (1.0 - LN_2) / 4.0;
    TheoremConstant {
        value,
        rounded: ROUNDED_THEOREM_CONSTANT,
        below_rounded: value < ROUNDED_THEOREM_CONSTANT,
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ExponentReport {
    pub q: f64,
    pub y_star: f64,
    /// `|quadratic(y_star)|`.
    pub residual: f64,
    pub lower_bound_exponent: f64,
    pub theorem_constant: f64,
    pub helson_reference: f64,
}

pub fn exponent_report(q: f64) -> Result<ExponentReport> {
    let y = optimal_y(q)?;
    let a = 2.0 / q - 1.0;
    let b = 4.0 / q - 1.0;
    Ok(ExponentReport {
        q,
        y_star: y,
        residual: (a * y * y + b * y - LN_2).abs(),
        lower_bound_exponent: exponent_objective(q, y),
        theorem_constant: theorem_constant().value,
        helson_reference: HELSON_REFERENCE_EXPONENT,
    })
}
