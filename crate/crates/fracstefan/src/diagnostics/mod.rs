//! Numerical witnesses for the calculus identities and for the conservation
//! structure of solver output.
//!
//! Every check runs a refinement ladder, reports one residual per rung, and
//! grades itself against the frozen tolerance policy in [`tolerance`]. The
//! reports are plain data so the command-line layer can serialize them
//! unchanged; nothing here aborts on a failed check.

mod equivalence;
mod limits;
mod moving_limit;
mod nullflux;
mod operators;
mod tolerance;

pub use equivalence::{formulation_equivalence_check, front_law_crosscheck};
pub use limits::classical_limit_study;
pub use moving_limit::{
    derivative_commutator_check, gradient_commutator_check, linear_front, sqrt_front, PowerFamily,
};
pub use nullflux::solid_flux_nullity_check;
pub use operators::{
    constant_annihilation_check, derivative_gap_check, derivative_limit_check,
    integral_limit_check, left_inverse_check, power_rule_check,
};
pub use tolerance::{grid_tolerance, TOL_C};

use serde::Serialize;

/// One rung of a check's ladder: what was refined (human-readable label) and
/// the residual measured there.
#[derive(Debug, Clone, Serialize)]
pub struct CheckLevel {
    pub label: String,
    pub residual: f64,
}

/// Outcome of one check. `claim` states the mathematical fact being
/// witnessed; `tolerance` is the threshold actually applied to the finest
/// rung, and `observed_order` is the refinement order estimated from the
/// ladder where the rungs form a halving sequence.
#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub claim: String,
    pub levels: Vec<CheckLevel>,
    pub tolerance: f64,
    pub observed_order: Option<f64>,
    pub pass: bool,
    pub notes: Vec<String>,
}

impl CheckReport {
    pub fn finest_residual(&self) -> f64 {
        self.levels.last().map(|l| l.residual).unwrap_or(f64::NAN)
    }
}

/// Mean log2 decay rate of a halving ladder. None when any entry is
/// nonpositive or not finite; a residual that has hit rounding noise would
/// otherwise poison the estimate.
pub fn estimated_order(residuals: &[f64]) -> Option<f64> {
    if residuals.len() < 2 || residuals.iter().any(|r| !r.is_finite() || *r <= 0.0) {
        return None;
    }
    let steps = residuals.windows(2).map(|w| (w[0] / w[1]).log2());
    Some(steps.sum::<f64>() / (residuals.len() - 1) as f64)
}
