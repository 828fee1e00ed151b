//! Continuity of the memory solution in the order parameter.
//!
//! As the order tends to one the memory kernel concentrates at the current
//! instant and the problem collapses to the classical one, whose similarity
//! solution is known in closed form. The study runs the solver at a rising
//! sequence of orders on one grid and watches the sup-distance of each front
//! from the classical one shrink.

use crate::diagnostics::{grid_tolerance, CheckLevel, CheckReport};
use crate::error::{Error, Result};
use crate::solver::{run, SolverConfig};
use crate::stefan::oracle::SimilarityOracle;
use crate::stefan::params::MemoryParams;

/// Sup-distance of each order's front from the classical one, over committed
/// times past twice the seed. Passes when the distances decrease strictly
/// along the (ascending) order sequence and the last one is within the
/// classical grid tolerance.
pub fn classical_limit_study(base: &SolverConfig, alphas: &[f64]) -> Result<CheckReport> {
    if alphas.len() < 2 {
        return Err(Error::invalid("alphas", "need at least two orders to see a trend"));
    }
    if alphas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("alphas", "orders must increase strictly"));
    }
    let oracle = SimilarityOracle::new(base.physical)?;
    let mut levels = Vec::new();
    let mut notes = Vec::new();
    let mut failed_runs = false;
    for &alpha in alphas {
        let mut cfg = base.clone();
        cfg.memory = MemoryParams::new(alpha, base.memory.mu)?;
        match run(&cfg) {
            Ok(out) => {
                let dt = out.field.dt();
                let mut dist: f64 = 0.0;
                for (n, &s) in out.front.positions().iter().enumerate() {
                    let t = n as f64 * dt;
                    if t >= 2.0 * base.grid.t_seed {
                        dist = dist.max((s - oracle.front_position(t)).abs());
                    }
                }
                levels.push(CheckLevel { label: format!("alpha={alpha}"), residual: dist });
            }
            Err(e) => {
                notes.push(format!("alpha={alpha}: run failed: {e}"));
                failed_runs = true;
            }
        }
    }
    let tol = grid_tolerance(base.grid.dx, base.grid.dt, 1.0);
    let shrinking = levels.windows(2).all(|w| w[1].residual < w[0].residual);
    let close = levels.last().is_some_and(|l| l.residual <= tol);
    if !shrinking {
        notes.push("distance to the classical front is not strictly decreasing".into());
    }
    Ok(CheckReport {
        name: "classical-limit".into(),
        claim: "memory-solution-approaches-classical-as-order-tends-to-one".into(),
        levels,
        tolerance: tol,
        observed_order: None,
        pass: !failed_runs && shrinking && close,
        notes,
    })
}
