//! Temperature and flux storage on the space-time grid.
//!
//! The liquid region is ragged: at time level n only the nodes with
//! x_i < s(t_n) carry unknowns, everything ahead of the front sits exactly at
//! the melt temperature. Each interior node therefore owns a history that
//! starts at its own melt instant h_i = h(x_i), not at t = 0, and the memory
//! operators acting on that history integrate from h_i. Rows only ever grow:
//! the model melts, it never refreezes.

use crate::error::{Error, Result};
use crate::stefan::front::FrontHistory;

/// Relative slack used when validating melt instants against step boundaries.
const MELT_SLACK: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct TemperatureField {
    dx: f64,
    dt: f64,
    boundary_temp: f64,
    melt_temp: f64,
    /// rows[n][i] = u(x_i, t_n) for the boundary node and the liquid interior,
    /// i = 0 ..= last_node(n).
    rows: Vec<Vec<f64>>,
    /// melt_times[i] = h(x_i); entry 0 is the boundary node with h = 0.
    melt_times: Vec<f64>,
    /// One-sided limit of u_x(x_i, tau) as tau drops to h_i, when the builder
    /// knows it; None falls back to a discrete reconstruction from the
    /// neighbour histories. The distinction is load-bearing: the melt knot of
    /// a gradient history enters the order-(1-alpha) derivative through an
    /// exact (t-h)^(alpha-1) boundary term, and with memory the interface
    /// forces u - Tm ~ (s-x)^(2-alpha), whose corner slope is zero. Recording
    /// the O(1) reconstructed slope for such a node would plant a spurious
    /// singular term in every flux built from it.
    melt_gradients: Vec<Option<f64>>,
    /// first_level[i] = smallest n with node i present in rows[n].
    first_level: Vec<usize>,
}

impl TemperatureField {
    pub fn new(dx: f64, dt: f64, boundary_temp: f64, melt_temp: f64) -> Result<Self> {
        if !(dx > 0.0) || !dx.is_finite() {
            return Err(Error::invalid("dx", format!("must be positive, got {dx}")));
        }
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::invalid("dt", format!("must be positive, got {dt}")));
        }
        if !(boundary_temp > melt_temp) {
            return Err(Error::invalid(
                "boundary_temp",
                "the driving value must exceed the melt temperature",
            ));
        }
        Ok(TemperatureField {
            dx,
            dt,
            boundary_temp,
            melt_temp,
            rows: Vec::new(),
            melt_times: Vec::new(),
            melt_gradients: Vec::new(),
            first_level: Vec::new(),
        })
    }

    /// Append the next time level. `melts_of_new_nodes` lists h(x_i) for the
    /// nodes that became liquid during this step, in node order; each must lie
    /// in [t_{n-1}, t_n). The very first level is the t = 0 corner and must be
    /// the lone boundary value.
    pub fn push_level(&mut self, row: Vec<f64>, melts_of_new_nodes: &[f64]) -> Result<()> {
        if row.is_empty() || !row.iter().all(|v| v.is_finite()) {
            return Err(Error::invalid("row", "level values must be non-empty and finite"));
        }
        let n = self.rows.len();
        if n == 0 {
            if row.len() != 1 || !melts_of_new_nodes.is_empty() {
                return Err(Error::invalid(
                    "row",
                    "the initial level holds only the boundary node: the front starts at zero",
                ));
            }
            self.melt_times.push(0.0);
            self.melt_gradients.push(None);
            self.first_level.push(0);
            self.rows.push(row);
            return Ok(());
        }
        let scale = self.boundary_temp - self.melt_temp;
        if (row[0] - self.boundary_temp).abs() > 1e-9 * scale {
            return Err(Error::invalid(
                "row",
                format!("u(0, t) must equal the fixed face value, got {}", row[0]),
            ));
        }
        let prev_len = self.rows[n - 1].len();
        if row.len() < prev_len {
            return Err(Error::Monotonicity {
                message: format!(
                    "liquid region shrank from {} to {} nodes at level {n}: refreezing is \
                     outside the model",
                    prev_len,
                    row.len()
                ),
            });
        }
        let new_count = row.len() - prev_len;
        if melts_of_new_nodes.len() != new_count {
            return Err(Error::invalid(
                "melts_of_new_nodes",
                format!("expected {new_count} melt instants, got {}", melts_of_new_nodes.len()),
            ));
        }
        let t_prev = (n - 1) as f64 * self.dt;
        let t_now = n as f64 * self.dt;
        let slack = MELT_SLACK * self.dt;
        let mut last_h = *self.melt_times.last().unwrap();
        for &h in melts_of_new_nodes {
            if !(h >= t_prev - slack) || !(h < t_now) {
                return Err(Error::invalid(
                    "melts_of_new_nodes",
                    format!("melt instant {h} outside the step [{t_prev}, {t_now})"),
                ));
            }
            if h <= last_h {
                return Err(Error::Monotonicity {
                    message: format!("melt instants must increase with depth, got {h} after {last_h}"),
                });
            }
            last_h = h;
            self.melt_times.push(h.max(t_prev));
            self.melt_gradients.push(None);
            self.first_level.push(n);
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn boundary_temp(&self) -> f64 {
        self.boundary_temp
    }

    pub fn melt_temp(&self) -> f64 {
        self.melt_temp
    }

    pub fn n_levels(&self) -> usize {
        self.rows.len()
    }

    pub fn time(&self, n: usize) -> f64 {
        n as f64 * self.dt
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.dx
    }

    /// Index of the deepest node stored at level n (0 when no interior node
    /// is liquid yet).
    pub fn last_node(&self, n: usize) -> usize {
        self.rows[n].len() - 1
    }

    /// Number of nodes that have ever melted, boundary included.
    pub fn minted(&self) -> usize {
        self.melt_times.len()
    }

    /// u(x_i, t_n); the solid region reads back as the melt temperature.
    pub fn value(&self, i: usize, n: usize) -> f64 {
        self.rows[n].get(i).copied().unwrap_or(self.melt_temp)
    }

    pub fn melt_time(&self, i: usize) -> Option<f64> {
        self.melt_times.get(i).copied()
    }

    /// Record the known one-sided corner slope of node i, overriding the
    /// reconstruction `gradient_at_melt` would otherwise fall back to.
    pub fn set_melt_gradient(&mut self, i: usize, g: f64) -> Result<()> {
        if !g.is_finite() {
            return Err(Error::invalid("melt_gradient", format!("must be finite, got {g}")));
        }
        let slot = self
            .melt_gradients
            .get_mut(i)
            .ok_or_else(|| Error::Runtime(format!("node {i} has not melted")))?;
        *slot = Some(g);
        Ok(())
    }

    pub fn first_level(&self, i: usize) -> Option<usize> {
        self.first_level.get(i).copied()
    }

    /// Largest pointwise breach of the ordering Tm <= u <= T0 over the whole
    /// history; exact zero when the discrete maximum principle holds.
    pub fn max_principle_excess(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for row in &self.rows {
            for &v in row {
                worst = worst.max(self.melt_temp - v).max(v - self.boundary_temp);
            }
        }
        worst
    }

    /// u(x_i, tau) on the node's own timeline: melt temperature up to h_i,
    /// then linear between the melt knot and stored levels.
    pub fn value_at_time(&self, i: usize, tau: f64) -> Result<f64> {
        let t_end = self.time(self.n_levels() - 1);
        if !(tau >= 0.0 && tau <= t_end) {
            return Err(Error::invalid(
                "tau",
                format!("query time {tau} outside the recorded range [0, {t_end}]"),
            ));
        }
        let Some(h) = self.melt_time(i) else {
            return Ok(self.melt_temp);
        };
        if i > 0 && tau <= h {
            return Ok(self.melt_temp);
        }
        let f = self.first_level[i];
        let t_f = self.time(f);
        if i > 0 && tau <= t_f {
            // inside the partial cell between the melt instant and the first
            // stored level
            let w = (tau - h) / (t_f - h);
            return Ok(self.melt_temp + w * (self.rows[f][i] - self.melt_temp));
        }
        let m = ((tau / self.dt) as usize).min(self.n_levels() - 2);
        let w = (tau - self.time(m)) / self.dt;
        Ok(self.value(i, m) + w * (self.value(i, m + 1) - self.value(i, m)))
    }

    /// The node's full history up to level n as interpolation knots:
    /// (h_i, Tm), then every stored level through t_n. For the boundary node
    /// the knots are simply the stored levels.
    pub fn node_knots(&self, i: usize, n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
        let f = self.first_level.get(i).copied().ok_or(Error::Runtime(format!(
            "node {i} has not melted"
        )))?;
        if n >= self.n_levels() || (i > 0 && n < f) {
            return Err(Error::Runtime(format!(
                "node {i} has no history at level {n}"
            )));
        }
        let mut times = Vec::with_capacity(n - f + 2);
        let mut values = Vec::with_capacity(n - f + 2);
        if i > 0 {
            times.push(self.melt_times[i]);
            values.push(self.melt_temp);
        }
        for m in f..=n {
            times.push(self.time(m));
            values.push(self.rows[m][i]);
        }
        Ok((times, values))
    }

    /// Spatial derivative u_x(x_i, t_n) from the liquid-side data. Interior
    /// nodes use the centered stencil; the node next to the front replaces the
    /// solid neighbour with the front knot (s(t_n), Tm), since u has a kink at
    /// the interface and values beyond it carry no gradient information. The
    /// boundary node uses the one-sided interior stencil.
    pub fn gradient(&self, front: &FrontHistory, i: usize, n: usize) -> Result<f64> {
        let p = self.last_node(n);
        if i > p {
            return Err(Error::Runtime(format!("node {i} is solid at level {n}")));
        }
        if p == 0 {
            return Err(Error::TooFewSamples { needed: 2, got: 1 });
        }
        let s = front.position(self.time(n))?;
        let u = |j: usize| self.rows[n][j];
        let x = |j: usize| self.x(j);
        if i == p {
            Ok(deriv3(
                [x(p - 1), x(p), s],
                [u(p - 1), u(p), self.melt_temp],
                x(p),
            ))
        } else if i == 0 {
            if p >= 2 {
                Ok(deriv3([x(0), x(1), x(2)], [u(0), u(1), u(2)], x(0)))
            } else {
                Ok(deriv3([x(0), x(1), s], [u(0), u(1), self.melt_temp], x(0)))
            }
        } else {
            Ok((u(i + 1) - u(i - 1)) / (2.0 * self.dx))
        }
    }

    /// u_x(x_i, h_i) at the node's own melt instant: the recorded corner
    /// slope when the builder supplied one, otherwise a reconstruction that
    /// puts the melt temperature on the node itself and reads the two
    /// shallower neighbours off their histories at tau = h_i. This seeds the
    /// gradient history of a freshly minted node.
    pub fn gradient_at_melt(&self, i: usize) -> Result<f64> {
        let h = self.melt_time(i).ok_or(Error::Runtime(format!("node {i} has not melted")))?;
        if let Some(g) = self.melt_gradients[i] {
            return Ok(g);
        }
        if i >= 2 {
            let a = self.value_at_time(i - 2, h)?;
            let b = self.value_at_time(i - 1, h)?;
            Ok(deriv3(
                [self.x(i - 2), self.x(i - 1), self.x(i)],
                [a, b, self.melt_temp],
                self.x(i),
            ))
        } else if i == 1 {
            Ok((self.melt_temp - self.value_at_time(0, h)?) / self.dx)
        } else {
            // boundary node: at t = 0 the material ahead is uniformly at the
            // melt value, so the first representable slope spans one cell
            Ok((self.melt_temp - self.boundary_temp) / self.dx)
        }
    }

    /// Centered second difference at an interior node with both neighbours
    /// liquid.
    pub fn second_diff(&self, i: usize, n: usize) -> Result<f64> {
        let p = self.last_node(n);
        if i == 0 || i + 1 > p {
            return Err(Error::Runtime(format!(
                "second difference needs liquid neighbours on both sides of node {i} at level {n}"
            )));
        }
        let u = &self.rows[n];
        Ok((u[i - 1] - 2.0 * u[i] + u[i + 1]) / (self.dx * self.dx))
    }

    /// Second difference that stays defined up to the front: centered when
    /// the right neighbour is liquid, otherwise the three-point stencil on
    /// (x_{i-1}, x_i, s(t_n)) with the melt value at the front knot. The
    /// wedge stencil is exact on linear profiles, so it degrades gracefully
    /// as the sliver beyond the last node shrinks.
    pub fn second_diff_at(&self, front: &FrontHistory, i: usize, n: usize) -> Result<f64> {
        let p = self.last_node(n);
        if i == 0 || i > p {
            return Err(Error::Runtime(format!(
                "second difference needs a liquid interior node, got node {i} at level {n}"
            )));
        }
        if i + 1 <= p {
            return self.second_diff(i, n);
        }
        let s = front.position(self.time(n))?;
        let (x0, x1, x2) = (self.x(i - 1), self.x(i), s);
        let (u0, u1, u2) = (self.rows[n][i - 1], self.rows[n][i], self.melt_temp);
        Ok(2.0
            * (u0 / ((x1 - x0) * (x2 - x0)) - u1 / ((x1 - x0) * (x2 - x1))
                + u2 / ((x2 - x0) * (x2 - x1))))
    }

    /// Centered time derivative at node i, level n; both neighbouring levels
    /// must exist and the node must already be liquid at level n - 1.
    pub fn time_deriv(&self, i: usize, n: usize) -> Result<f64> {
        if n == 0 || n + 1 >= self.n_levels() {
            return Err(Error::Runtime(format!("time derivative needs interior level, got {n}")));
        }
        if i > 0 && self.first_level(i).map_or(true, |f| n - 1 < f) {
            return Err(Error::Runtime(format!(
                "node {i} not yet liquid at level {}",
                n - 1
            )));
        }
        Ok((self.value(i, n + 1) - self.value(i, n - 1)) / (2.0 * self.dt))
    }

    /// Build a field and matching front history by sampling closed-form
    /// profiles: s(t) strictly increasing from s(0) = 0, h its inverse, and
    /// u(x, t) evaluated strictly inside the liquid region. The t = 0 corner
    /// row holds the boundary value.
    pub fn from_profile(
        dx: f64,
        dt: f64,
        n_levels: usize,
        boundary_temp: f64,
        melt_temp: f64,
        s: impl Fn(f64) -> f64,
        h: impl Fn(f64) -> f64,
        u: impl Fn(f64, f64) -> f64,
    ) -> Result<(TemperatureField, FrontHistory)> {
        if n_levels < 2 {
            return Err(Error::TooFewSamples { needed: 2, got: n_levels });
        }
        let mut field = TemperatureField::new(dx, dt, boundary_temp, melt_temp)?;
        let mut times = Vec::with_capacity(n_levels);
        let mut positions = Vec::with_capacity(n_levels);
        for n in 0..n_levels {
            let t = n as f64 * dt;
            times.push(t);
            positions.push(s(t));
            if n == 0 {
                field.push_level(vec![boundary_temp], &[])?;
                continue;
            }
            let s_n = positions[n];
            // deepest node strictly inside the liquid: x_p < s(t_n)
            let mut p = (s_n / dx) as usize;
            while p > 0 && (p as f64) * dx >= s_n {
                p -= 1;
            }
            let mut row = Vec::with_capacity(p + 1);
            row.push(boundary_temp);
            for i in 1..=p {
                row.push(u(i as f64 * dx, t));
            }
            let prev_len = field.rows[n - 1].len();
            let mut melts = Vec::new();
            for i in prev_len..=p {
                let t_prev = (n - 1) as f64 * dt;
                melts.push(h(i as f64 * dx).clamp(t_prev, t - 1e-12 * dt));
            }
            field.push_level(row, &melts)?;
        }
        let front = FrontHistory::new(times, positions)?;
        Ok((field, front))
    }
}

/// Flux samples on the same ragged grid; the solid region carries exactly
/// zero flux by construction and reads back as such.
#[derive(Debug, Clone)]
pub struct FluxField {
    dx: f64,
    dt: f64,
    rows: Vec<Vec<f64>>,
    /// (level, node) pairs where the history was too short to evaluate the
    /// memory operator; the stored value there is zero.
    skipped: Vec<(usize, usize)>,
}

impl FluxField {
    pub(crate) fn from_rows(dx: f64, dt: f64, rows: Vec<Vec<f64>>, skipped: Vec<(usize, usize)>) -> Self {
        FluxField { dx, dt, rows, skipped }
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn n_levels(&self) -> usize {
        self.rows.len()
    }

    pub fn time(&self, n: usize) -> f64 {
        n as f64 * self.dt
    }

    pub fn last_node(&self, n: usize) -> usize {
        self.rows[n].len().saturating_sub(1)
    }

    pub fn value(&self, i: usize, n: usize) -> f64 {
        self.rows[n].get(i).copied().unwrap_or(0.0)
    }

    pub fn skipped(&self) -> &[(usize, usize)] {
        &self.skipped
    }

    pub fn was_skipped(&self, i: usize, n: usize) -> bool {
        self.skipped.iter().any(|&(m, j)| m == n && j == i)
    }
}

/// Derivative at `xq` of the parabola through three distinct points.
pub(crate) fn deriv3(xs: [f64; 3], fs: [f64; 3], xq: f64) -> f64 {
    let [x0, x1, x2] = xs;
    let [f0, f1, f2] = fs;
    let d0 = (2.0 * xq - x1 - x2) / ((x0 - x1) * (x0 - x2));
    let d1 = (2.0 * xq - x0 - x2) / ((x1 - x0) * (x1 - x2));
    let d2 = (2.0 * xq - x0 - x1) / ((x2 - x0) * (x2 - x1));
    f0 * d0 + f1 * d1 + f2 * d2
}
