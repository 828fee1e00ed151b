//! Free-boundary trajectory and its piecewise-linear inverse.

use crate::error::{Error, Result};

/// The front position s(t) sampled on an increasing time grid, starting from
/// s = 0. Positions must be strictly increasing: the phase change is melting
/// only, so every point of the material crosses the front exactly once and
/// the melt-time map x -> h(x) below is well defined as the inverse of s.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontHistory {
    times: Vec<f64>,
    positions: Vec<f64>,
}

impl FrontHistory {
    pub fn new(times: Vec<f64>, positions: Vec<f64>) -> Result<Self> {
        if times.len() != positions.len() {
            return Err(Error::invalid(
                "front",
                format!(
                    "times and positions must have equal length ({} vs {})",
                    times.len(),
                    positions.len()
                ),
            ));
        }
        if times.len() < 2 {
            return Err(Error::TooFewSamples { needed: 2, got: times.len() });
        }
        for w in times.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::invalid("front", "times must be strictly increasing"));
            }
        }
        if !times.iter().chain(positions.iter()).all(|v| v.is_finite()) {
            return Err(Error::invalid("front", "times and positions must be finite"));
        }
        let span = positions.last().unwrap().abs().max(1.0);
        if positions[0].abs() > 1e-9 * span {
            return Err(Error::invalid(
                "front",
                format!("the front must start from zero, got s = {}", positions[0]),
            ));
        }
        for w in positions.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::Monotonicity {
                    message: format!(
                        "front positions must be strictly increasing (melting only), \
                         got {} then {}",
                        w[0], w[1]
                    ),
                });
            }
        }
        Ok(FrontHistory { times, positions })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn start_time(&self) -> f64 {
        self.times[0]
    }

    pub fn end_time(&self) -> f64 {
        *self.times.last().unwrap()
    }

    /// s(t) by linear interpolation between stored knots. `t` must lie inside
    /// the recorded time range.
    pub fn position(&self, t: f64) -> Result<f64> {
        interp(&self.times, &self.positions, t, "front time")
    }

    /// The melt time h(x): the instant the front passed through depth x,
    /// obtained by inverting the piecewise-linear trajectory. Exact at knots:
    /// h(s(t_n)) = t_n. `x` must lie in [s(t_0), s(t_end)].
    pub fn melt_time(&self, x: f64) -> Result<f64> {
        interp(&self.positions, &self.times, x, "front position")
    }

    /// Front speed at knot `n` by second-order differencing of the stored
    /// trajectory (one-sided at the ends). Requires at least 3 knots and a
    /// uniform time grid.
    pub fn speed(&self, n: usize) -> Result<f64> {
        if self.times.len() < 3 {
            return Err(Error::TooFewSamples { needed: 3, got: self.times.len() });
        }
        let dt = self.times[1] - self.times[0];
        let s = &self.positions;
        let m = s.len() - 1;
        let v = if n == 0 {
            (-3.0 * s[0] + 4.0 * s[1] - s[2]) / (2.0 * dt)
        } else if n == m {
            (3.0 * s[m] - 4.0 * s[m - 1] + s[m - 2]) / (2.0 * dt)
        } else {
            (s[n + 1] - s[n - 1]) / (2.0 * dt)
        };
        Ok(v)
    }
}

fn interp(xs: &[f64], ys: &[f64], x: f64, what: &str) -> Result<f64> {
    let lo = xs[0];
    let hi = *xs.last().unwrap();
    if !(x >= lo && x <= hi) {
        return Err(Error::invalid(
            "query",
            format!("{what} {x} outside the recorded range [{lo}, {hi}]"),
        ));
    }
    // partition_point gives the first index with xs[i] > x, so x lies in
    // [xs[j-1], xs[j]] with j clamped to the last interval.
    let j = xs.partition_point(|&v| v <= x).clamp(1, xs.len() - 1);
    let w = (x - xs[j - 1]) / (xs[j] - xs[j - 1]);
    Ok(ys[j - 1] + w * (ys[j] - ys[j - 1]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quadratic_front() -> FrontHistory {
        // s(t) = t^2 on t in [0, 2], 21 knots
        let times: Vec<f64> = (0..=20).map(|i| 0.1 * i as f64).collect();
        let positions: Vec<f64> = times.iter().map(|t| t * t).collect();
        FrontHistory::new(times, positions).unwrap()
    }

    #[test]
    fn melt_time_inverts_position_at_knots() {
        let f = quadratic_front();
        for n in 1..f.len() {
            let x = f.positions()[n];
            let h = f.melt_time(x).unwrap();
            assert!(
                (h - f.times()[n]).abs() < 1e-12,
                "h(s(t_{n})) = {h}, want {}",
                f.times()[n]
            );
        }
    }

    #[test]
    fn interpolation_is_linear_between_knots() {
        let f = quadratic_front();
        // midpoint of [1.0, 1.21] in position, between t = 1.0 and 1.1
        let x = 0.5 * (1.0 + 1.21);
        assert!((f.melt_time(x).unwrap() - 1.05).abs() < 1e-12);
        let t = 1.05;
        assert!((f.position(t).unwrap() - 0.5 * (1.0 + 1.21)).abs() < 1e-12);
    }

    #[test]
    fn rejects_nonmonotone_positions() {
        let err = FrontHistory::new(vec![0.0, 1.0, 2.0], vec![0.0, 0.5, 0.4]).unwrap_err();
        assert!(matches!(err, Error::Monotonicity { .. }));
    }

    #[test]
    fn rejects_nonzero_start() {
        assert!(FrontHistory::new(vec![0.0, 1.0], vec![0.3, 0.5]).is_err());
    }

    #[test]
    fn rejects_out_of_range_queries() {
        let f = quadratic_front();
        assert!(f.melt_time(-0.1).is_err());
        assert!(f.melt_time(4.1).is_err());
        assert!(f.position(2.5).is_err());
    }

    #[test]
    fn speed_is_second_order_on_quadratic() {
        // central and one-sided 3-point stencils are exact for s = t^2
        let f = quadratic_front();
        for n in [0, 1, 10, 19, 20] {
            let want = 2.0 * f.times()[n];
            assert!(
                (f.speed(n).unwrap() - want).abs() < 1e-12,
                "speed at knot {n}"
            );
        }
    }
}
