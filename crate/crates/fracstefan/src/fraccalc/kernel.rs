//! Kernel quadrature on arbitrary knot sequences.
//!
//! The moving-boundary machinery needs the same operators as the uniform-grid
//! API but on histories whose first cell is short (a node's record starts at
//! its own melt time, which falls between grid levels). These routines
//! integrate the power kernel exactly against a piecewise-linear interpolant
//! on any strictly increasing knot sequence, so a short leading cell costs no
//! accuracy.
//!
//! The derivative of order β is assembled as the Caputo (L1) sum plus the
//! closed-form boundary term f(a) (t-a)^(-β) / Γ(1-β); for an absolutely
//! continuous interpolant the two forms are identical, and the piecewise-linear
//! interpolant is one.

use statrs::function::gamma::gamma;

/// a^p - b^p for a >= b >= 0, stable when a - b is tiny relative to a.
pub fn pow_diff(a: f64, b: f64, p: f64) -> f64 {
    debug_assert!(a >= b && b >= 0.0);
    if b == 0.0 {
        return a.powf(p);
    }
    if a == b {
        return 0.0;
    }
    let d = (a - b) / a;
    if d < 0.25 {
        -a.powf(p) * f64::exp_m1(p * f64::ln_1p(-d))
    } else {
        a.powf(p) - b.powf(p)
    }
}

fn check_knots(times: &[f64], values: &[f64], t: f64) {
    debug_assert_eq!(times.len(), values.len());
    debug_assert!(times.len() >= 2, "kernel quadrature needs at least 2 knots");
    debug_assert!(
        t >= times[times.len() - 1] - 1e-12 * t.abs().max(1.0),
        "evaluation point precedes the last knot"
    );
}

/// Order-β integral of the piecewise-linear interpolant, evaluated at t.
///
/// Computes (1/Γ(β)) ∫ (t-τ)^(β-1) f(τ) dτ over [times[0], times[last]],
/// with each cell's two kernel moments in closed form. Requires 0 < β <= 1
/// and t at or beyond the last knot.
pub fn frac_integral_knots(times: &[f64], values: &[f64], beta: f64, t: f64) -> f64 {
    check_knots(times, values, t);
    debug_assert!(beta > 0.0 && beta <= 1.0);
    let mut acc = 0.0;
    for j in 0..times.len() - 1 {
        let (ta, tb) = (times[j], times[j + 1]);
        if tb <= ta {
            continue;
        }
        let (fa, fb) = (values[j], values[j + 1]);
        let slope = (fb - fa) / (tb - ta);
        let a = t - ta;
        let b = (t - tb).max(0.0);
        // m0 = ∫ (t-τ)^(β-1) dτ, m1 = ∫ (τ-ta)(t-τ)^(β-1) dτ over the cell
        let m0 = pow_diff(a, b, beta) / beta;
        let m1 = a * m0 - pow_diff(a, b, beta + 1.0) / (beta + 1.0);
        acc += fa * m0 + slope * m1;
    }
    acc / gamma(beta)
}

/// Order-β Caputo derivative by the L1 rule on the knots, evaluated at t.
///
/// Each cell contributes its slope against the exact kernel moment. Accepts
/// 0 <= β <= 1: β = 0 telescopes to f(t) - f(a) and β = 1 degenerates to the
/// last-cell difference quotient, both taken exactly.
pub fn caputo_knots(times: &[f64], values: &[f64], beta: f64, t: f64) -> f64 {
    check_knots(times, values, t);
    debug_assert!((0.0..=1.0).contains(&beta));
    let m = times.len() - 1;
    if beta == 1.0 {
        let dt = times[m] - times[m - 1];
        return (values[m] - values[m - 1]) / dt;
    }
    let p = 1.0 - beta;
    let mut acc = 0.0;
    for j in 0..m {
        let (ta, tb) = (times[j], times[j + 1]);
        if tb <= ta {
            continue;
        }
        let slope = (values[j + 1] - values[j]) / (tb - ta);
        acc += slope * pow_diff(t - ta, (t - tb).max(0.0), p);
    }
    acc / (p * gamma(p))
}

/// Order-β derivative in the integral-first form, evaluated at t.
///
/// Equals the boundary term f(a) (t-a)^(-β)/Γ(1-β) plus the Caputo sum.
/// β = 1 returns the last-cell difference quotient; β = 0 returns f(t).
pub fn rl_derivative_knots(times: &[f64], values: &[f64], beta: f64, t: f64) -> f64 {
    check_knots(times, values, t);
    debug_assert!((0.0..=1.0).contains(&beta));
    if beta == 0.0 {
        return values[values.len() - 1];
    }
    if beta == 1.0 {
        return caputo_knots(times, values, 1.0, t);
    }
    let dt0 = t - times[0];
    debug_assert!(dt0 > 0.0, "derivative evaluated at its own lower limit");
    values[0] * dt0.powf(-beta) / gamma(1.0 - beta) + caputo_knots(times, values, beta, t)
}

/// Caputo (L1) sum at the last sample of a history shaped like every node
/// record in the moving-boundary code: one leading cell from the melt knot
/// (melt_time, melt_value) to t_first, then a uniform tail t_first + m·dt
/// carrying `values`. Identical in exact arithmetic to [`caputo_knots`] on
/// the assembled knot list, but the uniform cells read their kernel weights
/// from the precomputed `l1` table (l1[k] = k^(1-β) - (k-1)^(1-β), index 0
/// unused) instead of calling powf per cell, which is what makes dense
/// history sweeps affordable. `l1` must cover index values.len() - 1.
pub fn caputo_melt_tail(
    melt_time: f64,
    melt_value: f64,
    t_first: f64,
    dt: f64,
    values: &[f64],
    beta: f64,
    l1: &[f64],
) -> f64 {
    debug_assert!(!values.is_empty());
    debug_assert!(melt_time < t_first && dt > 0.0);
    debug_assert!((0.0..=1.0).contains(&beta));
    let m = values.len();
    if beta == 0.0 {
        return values[m - 1] - melt_value;
    }
    if beta == 1.0 {
        return if m >= 2 {
            (values[m - 1] - values[m - 2]) / dt
        } else {
            (values[0] - melt_value) / (t_first - melt_time)
        };
    }
    debug_assert!(l1.len() >= m, "l1 table too short for this history");
    let p = 1.0 - beta;
    let t = t_first + (m - 1) as f64 * dt;
    let slope0 = (values[0] - melt_value) / (t_first - melt_time);
    let mut acc = slope0 * pow_diff(t - melt_time, t - t_first, p);
    let mut tail = 0.0;
    for j in 0..m - 1 {
        tail += (values[j + 1] - values[j]) * l1[m - 1 - j];
    }
    acc += tail * dt.powf(p - 1.0);
    acc / (p * gamma(p))
}

/// Integral-first derivative counterpart of [`caputo_melt_tail`]: boundary
/// term from the melt knot plus the Caputo sum. β = 0 is the identity and
/// β = 1 the last-cell difference quotient, as in [`rl_derivative_knots`].
pub fn rl_melt_tail(
    melt_time: f64,
    melt_value: f64,
    t_first: f64,
    dt: f64,
    values: &[f64],
    beta: f64,
    l1: &[f64],
) -> f64 {
    let m = values.len();
    if beta == 0.0 {
        return values[m - 1];
    }
    if beta == 1.0 {
        return caputo_melt_tail(melt_time, melt_value, t_first, dt, values, beta, l1);
    }
    let t = t_first + (m - 1) as f64 * dt;
    melt_value * (t - melt_time).powf(-beta) / gamma(1.0 - beta)
        + caputo_melt_tail(melt_time, melt_value, t_first, dt, values, beta, l1)
}
