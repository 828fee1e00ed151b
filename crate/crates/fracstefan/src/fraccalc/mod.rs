//! Fractional-order integral and derivative operators on uniform samples.
//!
//! Conventions, for a lower limit a and order 0 < β <= 1:
//!
//! * integral:            I^β f(t) = (1/Γ(β)) ∫_a^t (t-τ)^(β-1) f(τ) dτ
//! * derivative:          D^β f(t) = d/dt [ I^(1-β) f ](t)
//! * Caputo derivative:   C^β f(t) = I^(1-β) f'(t)
//!
//! At β = 1 all three reduce exactly to their integer-order counterparts
//! (cumulative trapezoid, finite-difference first derivative). The integral
//! uses product-trapezoid weights: the kernel is integrated in closed form
//! against the piecewise-linear interpolant, never point-evaluated where it is
//! singular. The derivative differentiates the order-(1-β) integral with
//! second-order stencils, one-sided at the first interior node where the
//! integrand is least smooth. The Caputo form uses the L1 rule.
//!
//! Values at the lower limit itself are formal (the derivative kernel is
//! singular there); norms in the verification suites skip the leading nodes.

pub mod kernel;
pub(crate) mod weights;

use crate::error::{Error, Result};
use serde::Serialize;
use statrs::function::gamma::gamma;

/// Fractional order β, validated to lie in (0, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FracOrder(f64);

impl FracOrder {
    pub fn new(beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta <= 1.0) || !beta.is_finite() {
            return Err(Error::invalid(
                "beta",
                format!("order must lie in (0, 1], got {beta}"),
            ));
        }
        Ok(FracOrder(beta))
    }

    pub fn get(self) -> f64 {
        self.0
    }

    pub fn is_unit(self) -> bool {
        self.0 == 1.0
    }
}

/// Uniform time samples of one scalar quantity.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    start: f64,
    step: f64,
    values: Vec<f64>,
}

impl SampledFunction {
    pub fn new(start: f64, step: f64, values: Vec<f64>) -> Result<Self> {
        if !start.is_finite() {
            return Err(Error::invalid("start", format!("must be finite, got {start}")));
        }
        if !(step > 0.0) || !step.is_finite() {
            return Err(Error::invalid("step", format!("must be positive, got {step}")));
        }
        if values.len() < 2 {
            return Err(Error::TooFewSamples {
                needed: 2,
                got: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(
                "values",
                format!("non-finite sample at index {i}"),
            ));
        }
        Ok(SampledFunction { start, step, values })
    }

    /// Samples f at start + i*step for i in 0..n_samples.
    pub fn from_fn(start: f64, step: f64, n_samples: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = (0..n_samples)
            .map(|i| f(start + step * i as f64))
            .collect();
        SampledFunction::new(start, step, values)
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn time(&self, i: usize) -> f64 {
        self.start + self.step * i as f64
    }

    fn with_values(&self, values: Vec<f64>) -> SampledFunction {
        SampledFunction {
            start: self.start,
            step: self.step,
            values,
        }
    }
}

/// Order-β integral from the sample start, by product-trapezoid quadrature.
pub fn rl_integral(f: &SampledFunction, order: FracOrder) -> Result<SampledFunction> {
    let beta = order.get();
    let n_max = f.len() - 1;
    let w = weights::trapezoid_weights(beta, n_max);
    let scale = f.step.powf(beta) / gamma(beta + 2.0);
    let v = &f.values;
    let mut out = vec![0.0; f.len()];
    for n in 1..=n_max {
        let mut acc = w.first[n] * v[0] + v[n];
        for j in 1..n {
            acc += w.conv[n - j] * v[j];
        }
        out[n] = scale * acc;
    }
    Ok(f.with_values(out))
}

/// Order-β Caputo derivative by the L1 rule; β = 1 is the finite-difference
/// first derivative.
pub fn caputo_derivative(f: &SampledFunction, order: FracOrder) -> Result<SampledFunction> {
    if order.is_unit() {
        return fd_derivative(f);
    }
    let beta = order.get();
    let n_max = f.len() - 1;
    let w = weights::l1_weights(beta, n_max);
    let scale = f.step.powf(-beta) / gamma(2.0 - beta);
    let v = &f.values;
    let mut out = vec![0.0; f.len()];
    for n in 1..=n_max {
        let mut acc = 0.0;
        for k in 1..=n {
            acc += w[k] * (v[n - k + 1] - v[n - k]);
        }
        out[n] = scale * acc;
    }
    Ok(f.with_values(out))
}

/// Order-β derivative: finite differences applied to the order-(1-β) integral.
///
/// Second-order stencils throughout; one-sided at the first interior node
/// (the integral has a power-type kink at the lower limit, and the one-sided
/// stencil avoids the leading cell), one-sided again at both ends.
/// β = 1 is the finite-difference first derivative of f itself.
pub fn rl_derivative(f: &SampledFunction, order: FracOrder) -> Result<SampledFunction> {
    if order.is_unit() {
        return fd_derivative(f);
    }
    if f.len() < 4 {
        return Err(Error::TooFewSamples {
            needed: 4,
            got: f.len(),
        });
    }
    let g = rl_integral(f, FracOrder::new(1.0 - order.get())?)?;
    let h = g.step;
    let v = &g.values;
    let n_max = v.len() - 1;
    let mut out = vec![0.0; v.len()];
    out[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
    out[1] = (-3.0 * v[1] + 4.0 * v[2] - v[3]) / (2.0 * h);
    for n in 2..n_max {
        out[n] = (v[n + 1] - v[n - 1]) / (2.0 * h);
    }
    out[n_max] = (3.0 * v[n_max] - 4.0 * v[n_max - 1] + v[n_max - 2]) / (2.0 * h);
    Ok(g.with_values(out))
}

/// Finite-difference first derivative: second-order central in the interior,
/// second-order one-sided at both ends.
pub fn fd_derivative(f: &SampledFunction) -> Result<SampledFunction> {
    if f.len() < 3 {
        return Err(Error::TooFewSamples {
            needed: 3,
            got: f.len(),
        });
    }
    let h = f.step;
    let v = &f.values;
    let n_max = v.len() - 1;
    let mut out = vec![0.0; v.len()];
    out[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
    for n in 1..n_max {
        out[n] = (v[n + 1] - v[n - 1]) / (2.0 * h);
    }
    out[n_max] = (3.0 * v[n_max] - 4.0 * v[n_max - 1] + v[n_max - 2]) / (2.0 * h);
    Ok(f.with_values(out))
}

/// Pointwise gap between the two derivative forms and the closed-form
/// boundary term that should separate them:
///
///   gap(t) = D^β f(t) - C^β f(t) - f(a) (t-a)^(-β) / Γ(1-β)
///
/// Vanishes identically in the continuum; the sampled gap should sit at
/// discretization level beyond the first interior node. The node at t = a is
/// reported as zero (the boundary term is singular there). At β = 1 the two
/// forms coincide and the boundary term is zero.
pub fn rl_caputo_gap(f: &SampledFunction, order: FracOrder) -> Result<SampledFunction> {
    let rl = rl_derivative(f, order)?;
    let cap = caputo_derivative(f, order)?;
    let beta = order.get();
    let f0 = f.values[0];
    let boundary = |n: usize| -> f64 {
        if n == 0 || order.is_unit() {
            0.0
        } else {
            f0 * (f.step * n as f64).powf(-beta) / gamma(1.0 - beta)
        }
    };
    let out = (0..f.len())
        .map(|n| rl.values[n] - cap.values[n] - boundary(n))
        .collect();
    Ok(f.with_values(out))
}

/// Pointwise residual of the left-inverse composition D^β [ I^β f ] - f.
pub fn left_inverse_residual(f: &SampledFunction, order: FracOrder) -> Result<SampledFunction> {
    let composed = rl_derivative(&rl_integral(f, order)?, order)?;
    let out = (0..f.len())
        .map(|n| composed.values[n] - f.values[n])
        .collect();
    Ok(f.with_values(out))
}

/// Which integer-order target a probe row measured against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ProbeTarget {
    /// I^β f against f (the β -> 0 limit).
    IntegralVsIdentity,
    /// C^β f against the finite-difference f' (the β -> 1 limit).
    CaputoVsDerivative,
    /// D^β f against the finite-difference f' (the β -> 1 limit).
    DerivativeVsDerivative,
}

#[derive(Debug, Clone, Serialize)]
pub struct LimitProbeRow {
    pub beta: f64,
    pub target: ProbeTarget,
    /// Sup deviation over the trailing window (leading nodes skipped).
    pub deviation: f64,
}

/// Deviation of each operator from its integer-order limit, per order.
///
/// For every β in `orders` the table gets three rows: the integral against f,
/// and both derivative forms against the finite-difference derivative.
/// Deviations are sup norms over the trailing window (see [`tail_start`]).
pub fn limit_probe(f: &SampledFunction, orders: &[FracOrder]) -> Result<Vec<LimitProbeRow>> {
    let fd = fd_derivative(f)?;
    let lo = tail_start(f.len());
    let mut rows = Vec::with_capacity(orders.len() * 3);
    for &order in orders {
        let int = rl_integral(f, order)?;
        let cap = caputo_derivative(f, order)?;
        let rl = rl_derivative(f, order)?;
        rows.push(LimitProbeRow {
            beta: order.get(),
            target: ProbeTarget::IntegralVsIdentity,
            deviation: sup_diff(&int.values[lo..], &f.values[lo..]),
        });
        rows.push(LimitProbeRow {
            beta: order.get(),
            target: ProbeTarget::CaputoVsDerivative,
            deviation: sup_diff(&cap.values[lo..], &fd.values[lo..]),
        });
        rows.push(LimitProbeRow {
            beta: order.get(),
            target: ProbeTarget::DerivativeVsDerivative,
            deviation: sup_diff(&rl.values[lo..], &fd.values[lo..]),
        });
    }
    Ok(rows)
}

/// First index of the trailing measurement window: the leading tenth of the
/// samples (at least two nodes) is excluded, keeping norms clear of the
/// kernel singularity at the lower limit.
pub fn tail_start(len: usize) -> usize {
    (len / 10).max(2).min(len.saturating_sub(1))
}

/// Sup norm of a - b over the given slices.
pub fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Sup of |a| over a slice.
pub fn sup_abs(a: &[f64]) -> f64 {
    a.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

/// Relative sup error of `num` against `exact` over the trailing window.
/// Falls back to the absolute sup when `exact` is identically tiny.
pub fn rel_sup_error_tail(num: &SampledFunction, exact: &SampledFunction) -> f64 {
    let lo = tail_start(num.len());
    let diff = sup_diff(&num.values[lo..], &exact.values[lo..]);
    let scale = sup_abs(&exact.values[lo..]);
    if scale < 1e-12 {
        diff
    } else {
        diff / scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn ramp(n: usize) -> SampledFunction {
        SampledFunction::from_fn(0.0, 1.0 / n as f64, n + 1, |t| t).unwrap()
    }

    #[test]
    fn constructor_rejects_bad_input() {
        assert!(SampledFunction::new(0.0, 0.0, vec![1.0, 2.0]).is_err());
        assert!(SampledFunction::new(0.0, -0.1, vec![1.0, 2.0]).is_err());
        assert!(SampledFunction::new(0.0, 0.1, vec![1.0]).is_err());
        assert!(SampledFunction::new(0.0, 0.1, vec![1.0, f64::NAN]).is_err());
        assert!(SampledFunction::new(f64::INFINITY, 0.1, vec![1.0, 2.0]).is_err());
        assert!(FracOrder::new(0.0).is_err());
        assert!(FracOrder::new(1.2).is_err());
        assert!(FracOrder::new(-0.5).is_err());
        assert!(FracOrder::new(1.0).is_ok());
    }

    #[test]
    fn unit_order_integral_is_cumulative_trapezoid() {
        let f = SampledFunction::from_fn(0.0, 0.25, 5, |t| t * t).unwrap();
        let g = rl_integral(&f, FracOrder::new(1.0).unwrap()).unwrap();
        let mut acc = 0.0;
        for n in 1..f.len() {
            acc += 0.25 * 0.5 * (f.value(n - 1) + f.value(n));
            assert_relative_eq!(g.value(n), acc, max_relative = 1e-13);
        }
        assert_eq!(g.value(0), 0.0);
    }

    #[test]
    fn unit_order_derivatives_reduce_to_finite_differences() {
        let f = SampledFunction::from_fn(0.0, 0.1, 11, |t| t * t).unwrap();
        let d = rl_derivative(&f, FracOrder::new(1.0).unwrap()).unwrap();
        let c = caputo_derivative(&f, FracOrder::new(1.0).unwrap()).unwrap();
        let fd = fd_derivative(&f).unwrap();
        for n in 0..f.len() {
            assert_eq!(d.value(n), fd.value(n));
            assert_eq!(c.value(n), fd.value(n));
            // second-order differences are exact on t^2
            assert_relative_eq!(fd.value(n), 2.0 * f.time(n), epsilon = 1e-12);
        }
    }

    #[test]
    fn integral_matches_closed_form_on_ramp() {
        // I^(1/2) t = t^(3/2) / Γ(5/2), Γ(5/2) = 1.3293403881791370
        let f = ramp(512);
        let g = rl_integral(&f, FracOrder::new(0.5).unwrap()).unwrap();
        let exact =
            SampledFunction::from_fn(0.0, f.step(), f.len(), |t| t.powf(1.5) / 1.329_340_388_179_137).unwrap();
        assert!(rel_sup_error_tail(&g, &exact) < 2e-5);
    }

    #[test]
    fn caputo_of_power_half_beta_half_is_constant() {
        // C-D^(1/2) t^(1/2) = Γ(3/2) exactly
        let f = SampledFunction::from_fn(0.0, 1.0 / 512.0, 513, |t| t.sqrt()).unwrap();
        let c = caputo_derivative(&f, FracOrder::new(0.5).unwrap()).unwrap();
        let exact =
            SampledFunction::from_fn(0.0, f.step(), f.len(), |_| 0.886_226_925_452_758).unwrap();
        assert!(rel_sup_error_tail(&c, &exact) < 2e-3);
    }

    #[test]
    fn linearity_of_all_operators() {
        let n = 64;
        let h = 1.0 / n as f64;
        let f1 = SampledFunction::from_fn(0.0, h, n + 1, |t| (3.0 * t).sin()).unwrap();
        let f2 = SampledFunction::from_fn(0.0, h, n + 1, |t| t * t - 0.5).unwrap();
        let combo = SampledFunction::new(
            0.0,
            h,
            (0..=n).map(|i| 2.0 * f1.value(i) - 0.7 * f2.value(i)).collect(),
        )
        .unwrap();
        let order = FracOrder::new(0.6).unwrap();
        for op in [rl_integral, caputo_derivative, rl_derivative] {
            let a = op(&f1, order).unwrap();
            let b = op(&f2, order).unwrap();
            let c = op(&combo, order).unwrap();
            for i in 0..=n {
                assert_relative_eq!(
                    c.value(i),
                    2.0 * a.value(i) - 0.7 * b.value(i),
                    epsilon = 1e-10,
                    max_relative = 1e-10
                );
            }
        }
    }

    #[test]
    fn gap_vanishes_at_unit_order() {
        let f = SampledFunction::from_fn(0.0, 0.05, 21, |t| 1.0 + t).unwrap();
        let gap = rl_caputo_gap(&f, FracOrder::new(1.0).unwrap()).unwrap();
        assert_eq!(sup_abs(gap.values()), 0.0);
    }

    #[test]
    fn tail_window_skips_at_least_two_nodes() {
        assert_eq!(tail_start(10), 2);
        assert_eq!(tail_start(1000), 100);
        assert_eq!(tail_start(3), 2);
    }
}
