//! The complementarity law `f² + α f′ = β` and its inequality form.
//!
//! Candidate functions are passed already composed with the scaling, i.e. as
//! `x ↦ f(x/α)`, and differentiated with respect to `x`. The tanh family
//! `x ↦ √β tanh(√β (x/α + c))` solves the equality for every `α > 0`.

use crate::error::{Error, Result};
use crate::numerics::{central_difference, DiffSpec};

/// Parameters `(α, β, c)` of the law and of its tanh solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LawParams {
    pub alpha: f64,
    pub beta: f64,
    /// Integration constant.
    pub c: f64,
}

impl LawParams {
    pub fn new(alpha: f64, beta: f64, c: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) || !(beta >= 0.0 && beta.is_finite()) || !c.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "law needs alpha > 0 and beta >= 0 (alpha={alpha}, beta={beta}, c={c})"
            )));
        }
        Ok(LawParams { alpha, beta, c })
    }
}

/// `x ↦ √β · tanh(√β (x/α + c))`
pub fn tanh_solution(p: LawParams) -> impl Fn(f64) -> f64 + Copy + Send + Sync {
    let root = p.beta.sqrt();
    move |x: f64| root * (root * (x / p.alpha + p.c)).tanh()
}

/// `f(x)² + α f′(x) − β`.
pub fn law_residual<F: Fn(f64) -> f64>(f: F, p: &LawParams, x: f64, diff: &DiffSpec) -> Result<f64> {
    let value = f(x);
    if !value.is_finite() {
        return Err(Error::NonFinite { at: x });
    }
    let slope = central_difference(&f, x, diff)?;
    Ok(value * value + p.alpha * slope - p.beta)
}

/// Outcome of [`law_inequality_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InequalityReport {
    pub pass: bool,
    /// Largest `f² + αf′ − 1` over the grid.
    pub worst_violation: f64,
    pub worst_at: f64,
}

/// Tolerance on `f² + αf′ − 1` for the inequality to pass.
pub const INEQUALITY_TOL: f64 = 1e-9;

/// Checks `f² + α f′ ≤ 1` on every grid point. A non-finite evaluation counts
/// as an infinite violation.
pub fn law_inequality_check<F: Fn(f64) -> f64>(f: F, alpha: f64, grid: &[f64], diff: &DiffSpec) -> InequalityReport {
    let mut worst = InequalityReport {
        pass: true,
        worst_violation: f64::NEG_INFINITY,
        worst_at: f64::NAN,
    };
    for &x in grid {
        let v = match (f(x), central_difference(&f, x, diff)) {
            (value, Ok(slope)) if value.is_finite() => value * value + alpha * slope - 1.0,
            _ => f64::INFINITY,
        };
        if v > worst.worst_violation || worst.worst_at.is_nan() {
            worst.worst_violation = v;
            worst.worst_at = x;
        }
    }
    worst.pass = !grid.is_empty() && worst.worst_violation <= INEQUALITY_TOL;
    worst
}
