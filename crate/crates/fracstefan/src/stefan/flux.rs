//! The memory flux and the residuals of the two flux laws.
//!
//! The flux at a node is minus the order-(1-alpha) derivative of that node's
//! own gradient history, taken from its melt instant. The implicit law goes
//! the other way: the order-(1-alpha) integral of the flux history should
//! reproduce minus the instantaneous gradient. Round-tripping one through the
//! other is a quadrature-level identity and is measured, not assumed.

use crate::error::{Error, Result};
use crate::fraccalc::kernel::{frac_integral_knots, rl_melt_tail};
use crate::fraccalc::weights::l1_weights_covering;
use crate::stefan::field::{FluxField, TemperatureField};
use crate::stefan::front::FrontHistory;
use crate::stefan::params::{MemoryParams, PhysicalParams};
use crate::stefan::residuals::ResidualWindow;
use statrs::function::gamma::gamma;

/// One node's spatial-gradient record: the melt-instant slope, then one value
/// per stored level starting at `first_level`.
pub(crate) struct GradientHistory {
    pub melt_time: f64,
    pub melt_value: f64,
    pub first_level: usize,
    pub values: Vec<f64>,
}

impl GradientHistory {
    /// Samples available at level n (melt knot excluded).
    pub fn len_at(&self, n: usize) -> usize {
        if n < self.first_level {
            0
        } else {
            (n - self.first_level + 1).min(self.values.len())
        }
    }
}

/// First level with at least one interior liquid node; before that no spatial
/// gradient exists anywhere.
fn first_gradient_level(u: &TemperatureField) -> Option<usize> {
    (0..u.n_levels()).find(|&n| u.last_node(n) >= 1)
}

/// Gradient record of node i through `up_to`. `Ok(None)` when the node has no
/// level with a computable gradient yet (only the boundary node can be in
/// that state: its record begins once an interior node exists).
pub(crate) fn gradient_history(
    u: &TemperatureField,
    front: &FrontHistory,
    i: usize,
    up_to: usize,
) -> Result<Option<GradientHistory>> {
    let first = if i == 0 {
        match first_gradient_level(u) {
            Some(f) => f,
            None => return Ok(None),
        }
    } else {
        u.first_level(i)
            .ok_or_else(|| Error::Runtime(format!("node {i} has not melted")))?
    };
    if up_to < first {
        return Ok(None);
    }
    let mut values = Vec::with_capacity(up_to - first + 1);
    for m in first..=up_to {
        values.push(u.gradient(front, i, m)?);
    }
    Ok(Some(GradientHistory {
        melt_time: u.melt_time(i).unwrap(),
        melt_value: u.gradient_at_melt(i)?,
        first_level: first,
        values,
    }))
}

/// J(x_i, t_n) = -k mu * (order-(1-alpha) derivative of the node's gradient
/// history from its melt instant), on every stored level. Solid nodes carry
/// exactly zero. Nodes whose record holds fewer than two knots at a level are
/// set to zero there and flagged. At alpha = 1 this is the pointwise gradient
/// law J = -k u_x.
pub fn memory_flux(
    u: &TemperatureField,
    front: &FrontHistory,
    phys: &PhysicalParams,
    mem: &MemoryParams,
) -> Result<FluxField> {
    let total = u.n_levels();
    if total < 2 {
        return Err(Error::TooFewSamples { needed: 2, got: total });
    }
    if front.len() != total {
        return Err(Error::invalid(
            "front",
            format!("front has {} knots but the field stores {total} levels", front.len()),
        ));
    }
    let beta = 1.0 - mem.alpha;
    let l1 = l1_weights_covering(beta, total + 1);
    let scale = -phys.conductivity * mem.mu;

    let mut histories = Vec::with_capacity(u.minted());
    for i in 0..u.minted() {
        histories.push(gradient_history(u, front, i, total - 1)?);
    }

    let mut rows = Vec::with_capacity(total);
    let mut skipped = Vec::new();
    for n in 0..total {
        let p = u.last_node(n);
        let mut row = Vec::with_capacity(p + 1);
        for (i, hist) in histories.iter().enumerate().take(p + 1) {
            let value = match hist {
                Some(g) if g.len_at(n) >= 1 => {
                    let len = g.len_at(n);
                    scale
                        * rl_melt_tail(
                            g.melt_time,
                            g.melt_value,
                            u.time(g.first_level),
                            u.dt(),
                            &g.values[..len],
                            beta,
                            &l1,
                        )
                }
                _ => {
                    skipped.push((n, i));
                    0.0
                }
            };
            row.push(value);
        }
        rows.push(row);
    }
    Ok(FluxField::from_rows(u.dx(), u.dt(), rows, skipped))
}

/// Residual of the implicit flux law: sup over admitted interior nodes of
/// | (1/mu) I^(1-alpha)_{h_i} J + k u_x |, relative to sup |k u_x|. The flux
/// history is interpolated down to the melt knot by linear extrapolation of
/// its first two level samples; the kernel weight of that knot vanishes with
/// the cell, so the proxy value washes out under refinement.
pub fn implicit_flux_residual(
    j: &FluxField,
    u: &TemperatureField,
    front: &FrontHistory,
    phys: &PhysicalParams,
    mem: &MemoryParams,
    window: &ResidualWindow,
) -> Result<f64> {
    let beta = 1.0 - mem.alpha;
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for n in window.levels(u.dt(), u.n_levels()) {
        let t = u.time(n);
        let p = u.last_node(n);
        for i in 1..=p {
            let h = u.melt_time(i).unwrap();
            if !window.admits(t, h) {
                continue;
            }
            let f = u.first_level(i).unwrap();
            if n < f + 1 {
                continue;
            }
            let lhs = if mem.alpha == 1.0 {
                j.value(i, n) / mem.mu
            } else {
                // The flux blows up like (tau - h)^(-beta) as the node's own
                // melt instant is approached, and piecewise-linear quadrature
                // through that costs a whole order. Split off the singular
                // part analytically: its amplitude is the melt-instant
                // gradient, its order-beta integral is exactly the amplitude,
                // and what is left is Holder continuous with a zero limit at
                // the melt knot.
                let amp = -phys.conductivity * mem.mu * u.gradient_at_melt(i)?;
                let g1b = gamma(1.0 - beta);
                let mut times = Vec::with_capacity(n - f + 2);
                let mut vals = Vec::with_capacity(n - f + 2);
                times.push(h);
                vals.push(0.0);
                for m in f..=n {
                    let tau = u.time(m);
                    times.push(tau);
                    vals.push(j.value(i, m) - amp * (tau - h).powf(-beta) / g1b);
                }
                (amp + frac_integral_knots(&times, &vals, beta, t)) / mem.mu
            };
            let gx = phys.conductivity * u.gradient(front, i, n)?;
            worst = worst.max((lhs + gx).abs());
            scale = scale.max(gx.abs());
        }
    }
    Ok(relative(worst, scale))
}

/// Residual of the balance rho c u_t + J_x = 0 over admitted interior nodes,
/// relative to sup |rho c u_t|. Time derivative centered in t, flux
/// divergence centered in x; the stencil stays strictly inside the liquid
/// region, so the node one short of the front is the deepest center used.
pub fn continuity_residual(
    u: &TemperatureField,
    j: &FluxField,
    phys: &PhysicalParams,
    window: &ResidualWindow,
) -> Result<f64> {
    let rc = phys.density * phys.specific_heat;
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for n in window.levels(u.dt(), u.n_levels()) {
        if n == 0 || n + 1 >= u.n_levels() {
            continue;
        }
        let t = u.time(n);
        let p = u.last_node(n);
        for i in 1..p {
            // the deepest stencil point governs admission; its melt time is
            // the latest of the three
            let h = match u.melt_time(i + 1) {
                Some(h) => h,
                None => continue,
            };
            if !window.admits(t, h) {
                continue;
            }
            if u.first_level(i).map_or(true, |f| n < f + 1) {
                continue;
            }
            if j.was_skipped(i - 1, n) || j.was_skipped(i + 1, n) {
                continue;
            }
            let ut = rc * u.time_deriv(i, n)?;
            let jx = (j.value(i + 1, n) - j.value(i - 1, n)) / (2.0 * u.dx());
            worst = worst.max((ut + jx).abs());
            scale = scale.max(ut.abs());
        }
    }
    Ok(relative(worst, scale))
}

/// worst / scale with a graceful degenerate case: when the reference scale is
/// numerically zero the raw sup is returned (zero fields give zero).
pub(crate) fn relative(worst: f64, scale: f64) -> f64 {
    if scale > 1e-300 {
        worst / scale
    } else {
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stefan::oracle::SimilarityOracle;

    fn unit_phys() -> PhysicalParams {
        PhysicalParams::new(1.0, 1.0, 1.0, 1.0, 1.0, 0.0).unwrap()
    }

    // u = T0 - (T0 - Tm) x / s(t), s = v t: the gradient is -(T0-Tm)/s(t) at
    // every liquid node, so all spatial stencils are exact and closed forms
    // are available for everything downstream
    fn linear_profile(v: f64, n_levels: usize) -> (TemperatureField, FrontHistory) {
        TemperatureField::from_profile(
            0.05,
            0.01,
            n_levels,
            1.0,
            0.0,
            |t| v * t,
            |x| x / v,
            |x, t| 1.0 - x / (v * t),
        )
        .unwrap()
    }

    #[test]
    fn classical_flux_is_pointwise_gradient_law() {
        let (u, front) = linear_profile(1.0, 81);
        let j = memory_flux(&u, &front, &unit_phys(), &MemoryParams::classical()).unwrap();
        // J = -k u_x = (T0 - Tm)/s(t) uniformly in x
        for n in [20, 50, 80] {
            let want = 1.0 / (0.01 * n as f64);
            for i in 0..=u.last_node(n) {
                let got = j.value(i, n);
                assert!(
                    (got - want).abs() < 1e-9 * want,
                    "J({i},{n}) = {got}, want {want}"
                );
            }
        }
        // solid region is exactly zero
        assert_eq!(j.value(40, 50), 0.0);
        // the t = 0 corner has no usable history and is flagged
        assert!(j.was_skipped(0, 0));
    }

    #[test]
    fn memory_flux_matches_kernel_on_analytic_gradient_history() {
        // alpha = 0.5 on the linear profile; feed the closed-form gradient
        // history -(T0-Tm)/s(tau) straight into the knot engine and compare
        use crate::fraccalc::kernel::rl_derivative_knots;
        let (u, front) = linear_profile(1.0, 81);
        let mem = MemoryParams::new(0.5, 1.3).unwrap();
        let phys = unit_phys();
        let j = memory_flux(&u, &front, &phys, &mem).unwrap();
        for (i, n) in [(3usize, 40usize), (5, 60), (1, 80)] {
            let h = u.melt_time(i).unwrap();
            let f = u.first_level(i).unwrap();
            let mut times = vec![h];
            let mut vals = vec![-1.0 / (1.0 * h)];
            for m in f..=n {
                times.push(u.time(m));
                vals.push(-1.0 / u.time(m));
            }
            let want = -phys.conductivity * mem.mu * rl_derivative_knots(&times, &vals, 0.5, u.time(n));
            let got = j.value(i, n);
            assert!(
                (got - want).abs() < 2e-3 * want.abs(),
                "J({i},{n}) = {got}, kernel on analytic history {want}"
            );
        }
    }

    #[test]
    fn implicit_law_round_trips_exactly_at_order_one() {
        let (u, front) = linear_profile(1.0, 81);
        let phys = unit_phys();
        let j = memory_flux(&u, &front, &phys, &MemoryParams::classical()).unwrap();
        let window = ResidualWindow::new(0.3, 0.8, 0.05);
        let r = implicit_flux_residual(&j, &u, &front, &phys, &MemoryParams::classical(), &window).unwrap();
        assert!(r < 1e-12, "classical round trip should be pointwise: {r}");
    }

    #[test]
    fn implicit_law_round_trips_under_quadrature_error() {
        let phys = unit_phys();
        let mem = MemoryParams::new(0.5, 1.0).unwrap();
        let mut residuals = Vec::new();
        for n_levels in [41, 81, 161] {
            let dt = 0.8 / (n_levels - 1) as f64;
            let (u, front) = TemperatureField::from_profile(
                0.05,
                dt,
                n_levels,
                1.0,
                0.0,
                |t| t,
                |x| x,
                |x, t| 1.0 - x / t,
            )
            .unwrap();
            let j = memory_flux(&u, &front, &phys, &mem).unwrap();
            let window = ResidualWindow::new(0.3, 0.8, 0.08);
            residuals.push(implicit_flux_residual(&j, &u, &front, &phys, &mem, &window).unwrap());
        }
        assert!(residuals[2] < 0.02, "finest round-trip residual too large: {residuals:?}");
        assert!(
            residuals[2] < residuals[0],
            "round-trip residual should shrink under time refinement: {residuals:?}"
        );
    }

    #[test]
    fn continuity_holds_on_the_classical_oracle() {
        let phys = unit_phys();
        let oracle = SimilarityOracle::new(phys).unwrap();
        let (u, front) = oracle.sample(0.02, 0.002, 301).unwrap();
        let j = memory_flux(&u, &front, &phys, &MemoryParams::classical()).unwrap();
        let window = ResidualWindow::new(0.2, 0.6, 0.05);
        let r = continuity_residual(&u, &j, &phys, &window).unwrap();
        assert!(r < 0.05, "continuity residual on the sampled oracle: {r}");
    }

    #[test]
    fn zero_field_gives_zero_residuals() {
        // a field that never grows: boundary only, no liquid interior; flux
        // rows are all zero and every residual degenerates to zero
        let mut u = TemperatureField::new(0.1, 0.1, 1.0, 0.0).unwrap();
        u.push_level(vec![1.0], &[]).unwrap();
        for _ in 1..5 {
            u.push_level(vec![1.0], &[]).unwrap();
        }
        let front = FrontHistory::new(
            vec![0.0, 0.1, 0.2, 0.3, 0.4],
            vec![0.0, 0.001, 0.002, 0.003, 0.004],
        )
        .unwrap();
        let phys = unit_phys();
        let mem = MemoryParams::new(0.5, 1.0).unwrap();
        let j = memory_flux(&u, &front, &phys, &mem).unwrap();
        for n in 0..5 {
            assert_eq!(j.value(0, n), 0.0);
        }
        let window = ResidualWindow::new(0.0, 1.0, 0.0);
        assert_eq!(continuity_residual(&u, &j, &phys, &window).unwrap(), 0.0);
        assert_eq!(
            implicit_flux_residual(&j, &u, &front, &phys, &mem, &window).unwrap(),
            0.0
        );
    }
}
