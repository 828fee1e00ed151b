//! The flux vanishes ahead of the front, so the memory of the flux law can
//! start at time zero or at the melt instant indifferently.
//!
//! Two consequences are checked on a completed run. First, the reconstructed
//! flux must be identically zero at every solid node; the flux field stores
//! only liquid rows, so the check verifies that the stored extent never
//! spills past the front and that solid probes really read zero. Second, for
//! a node that melts at h > 0, the order-(1-alpha) integral of its flux
//! history taken from t = 0 (padding the solid span with the zeros the first
//! consequence guarantees) must agree with the one taken from h, since the
//! integrand carries no mass before the melt instant.

use crate::diagnostics::{grid_tolerance, CheckLevel, CheckReport};
use crate::error::{Error, Result};
use crate::fraccalc::kernel::frac_integral_knots;
use crate::solver::{SolveOutput, SolverConfig};

/// Solid nodes probed past the stored extent at each level.
const SOLID_PROBES: usize = 10;

pub fn solid_flux_nullity_check(cfg: &SolverConfig, out: &SolveOutput) -> Result<CheckReport> {
    let u = &out.field;
    let flux = &out.flux;
    let n_levels = u.n_levels();
    if n_levels < 3 {
        return Err(Error::TooFewSamples { needed: 3, got: n_levels });
    }

    // every level: stored flux extent within the liquid extent, zero beyond
    let mut solid_worst: f64 = 0.0;
    let mut spill = None;
    for n in 0..n_levels {
        let p = u.last_node(n);
        if flux.last_node(n) > p {
            spill = Some((n, flux.last_node(n)));
        }
        for i in p + 1..=p + SOLID_PROBES {
            solid_worst = solid_worst.max(flux.value(i, n).abs());
        }
    }

    // three nodes spread over the minted range, each with h > 0
    let n_end = n_levels - 1;
    let p_end = u.last_node(n_end);
    let beta = 1.0 - cfg.memory.alpha;
    let mut levels =
        vec![CheckLevel { label: "worst solid-node flux probe".into(), residual: solid_worst }];
    let mut start_worst: f64 = 0.0;
    for q in [1usize, 2, 3] {
        let i = (q * p_end / 4).max(1);
        let f = u
            .first_level(i)
            .ok_or_else(|| Error::Runtime(format!("node {i} never melted")))?;
        let h = u.melt_time(i).unwrap();
        let rel = if beta == 0.0 {
            // order-zero integrals are the integrand itself on both sides
            0.0
        } else {
            let tail: Vec<f64> = (f..=n_end).map(|m| flux.value(i, m)).collect();
            let mut from_h_t = Vec::with_capacity(tail.len() + 1);
            let mut from_h_v = Vec::with_capacity(tail.len() + 1);
            if h < u.time(f) {
                from_h_t.push(h);
                from_h_v.push(0.0);
            }
            from_h_t.extend((f..=n_end).map(|m| u.time(m)));
            from_h_v.extend(tail.iter().copied());

            let from_0_t: Vec<f64> = (0..=n_end).map(|m| u.time(m)).collect();
            let mut from_0_v = vec![0.0; f];
            from_0_v.extend(tail.iter().copied());

            let t_end = u.time(n_end);
            let ih = frac_integral_knots(&from_h_t, &from_h_v, beta, t_end);
            let i0 = frac_integral_knots(&from_0_t, &from_0_v, beta, t_end);
            (ih - i0).abs() / ih.abs().max(i0.abs()).max(1e-300)
        };
        start_worst = start_worst.max(rel);
        levels.push(CheckLevel {
            label: format!("start equivalence at node {i} (h={h:.3})"),
            residual: rel,
        });
    }

    let tol = grid_tolerance(u.dx(), u.dt(), cfg.memory.alpha);
    let mut notes = vec![format!(
        "{} early flux entries were zero-filled for short histories",
        flux.skipped().len()
    )];
    if let Some((n, l)) = spill {
        notes.push(format!("flux row at level {n} extends to node {l}, past the liquid extent"));
    }
    let pass = spill.is_none() && solid_worst == 0.0 && start_worst <= tol;
    Ok(CheckReport {
        name: "solid-flux-nullity".into(),
        claim: "no-flux-in-solid-and-memory-starts-at-melt".into(),
        levels,
        tolerance: tol,
        observed_order: None,
        pass,
        notes,
    })
}
