//! Classical similarity solution used as the alpha = 1 reference.
//!
//! With the face held at T0 and the solid at the melt value, the front moves
//! as s(t) = 2 lambda sqrt(d t) where lambda solves
//!
//!   sqrt(pi) lambda exp(lambda^2) erf(lambda) = Ste,
//!
//! and the liquid profile is an error function in the similarity variable
//! x / (2 sqrt(d t)). The transcendental root is bracketed and bisected; the
//! left side is strictly increasing in lambda, so the bracket is clean.

use crate::error::{Error, Result};
use crate::stefan::field::TemperatureField;
use crate::stefan::front::FrontHistory;
use crate::stefan::params::PhysicalParams;
use libm::erf;

const LAMBDA_TOL: f64 = 1e-13;

#[derive(Debug, Clone)]
pub struct SimilarityOracle {
    phys: PhysicalParams,
    lambda: f64,
}

impl SimilarityOracle {
    pub fn new(phys: PhysicalParams) -> Result<Self> {
        phys.validate()?;
        let ste = phys.stefan_number();
        let g = |lam: f64| f64::sqrt(std::f64::consts::PI) * lam * (lam * lam).exp() * erf(lam) - ste;
        let mut lo = 0.0;
        let mut hi = 1.0;
        while g(hi) < 0.0 {
            hi *= 2.0;
            if hi > 1e3 {
                return Err(Error::Runtime(format!(
                    "failed to bracket the similarity root for Ste = {ste}"
                )));
            }
        }
        while hi - lo > LAMBDA_TOL {
            let mid = 0.5 * (lo + hi);
            if g(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(SimilarityOracle { phys, lambda: 0.5 * (lo + hi) })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn params(&self) -> &PhysicalParams {
        &self.phys
    }

    /// s(t) = 2 lambda sqrt(d t).
    pub fn front_position(&self, t: f64) -> f64 {
        2.0 * self.lambda * (self.phys.diffusivity() * t).sqrt()
    }

    /// s'(t) = lambda sqrt(d / t); t must be positive.
    pub fn front_speed(&self, t: f64) -> f64 {
        self.lambda * (self.phys.diffusivity() / t).sqrt()
    }

    /// h(x) = x^2 / (4 lambda^2 d), the inverse of the front trajectory.
    pub fn melt_time(&self, x: f64) -> f64 {
        let lam = self.lambda;
        x * x / (4.0 * lam * lam * self.phys.diffusivity())
    }

    /// u(x, t) for t > 0; points at or beyond the front return the melt
    /// temperature.
    pub fn temperature(&self, x: f64, t: f64) -> f64 {
        let p = &self.phys;
        if x <= 0.0 {
            return p.boundary_temp;
        }
        let eta = x / (2.0 * (p.diffusivity() * t).sqrt());
        if eta >= self.lambda {
            return p.melt_temp;
        }
        p.boundary_temp - (p.boundary_temp - p.melt_temp) * erf(eta) / erf(self.lambda)
    }

    /// u_x(x, t) inside the liquid region.
    pub fn temperature_gradient(&self, x: f64, t: f64) -> f64 {
        let p = &self.phys;
        let d = p.diffusivity();
        let eta = x / (2.0 * (d * t).sqrt());
        let coeff = (p.boundary_temp - p.melt_temp) / (erf(self.lambda) * (std::f64::consts::PI * d * t).sqrt());
        -coeff * (-eta * eta).exp()
    }

    /// Sample the solution onto a uniform grid through `n_levels` time steps.
    /// Corner slopes are recorded from the closed form, so the sampled field
    /// carries the exact one-sided melt data the memory operators assume.
    pub fn sample(&self, dx: f64, dt: f64, n_levels: usize) -> Result<(TemperatureField, FrontHistory)> {
        let p = self.phys;
        let (mut field, front) = TemperatureField::from_profile(
            dx,
            dt,
            n_levels,
            p.boundary_temp,
            p.melt_temp,
            |t| self.front_position(t),
            |x| self.melt_time(x),
            |x, t| self.temperature(x, t),
        )?;
        for i in 1..field.minted() {
            let h = field.melt_time(i).unwrap();
            field.set_melt_gradient(i, self.temperature_gradient(field.x(i), h))?;
        }
        Ok((field, front))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // roots of sqrt(pi) L exp(L^2) erf(L) = Ste, frozen from a 50-digit
    // bisection done independently of this code
    const LAM_STE_1: f64 = 0.620_062_633_313_595_50;
    const LAM_STE_HALF: f64 = 0.464_785_920_646_244_45;
    const LAM_STE_2: f64 = 0.800_601_362_805_608_26;

    fn unit() -> SimilarityOracle {
        SimilarityOracle::new(PhysicalParams::new(1.0, 1.0, 1.0, 1.0, 1.0, 0.0).unwrap()).unwrap()
    }

    #[test]
    fn lambda_matches_frozen_roots() {
        assert!((unit().lambda() - LAM_STE_1).abs() < 1e-12);
        let half = SimilarityOracle::new(
            PhysicalParams::new(1.0, 1.0, 1.0, 2.0, 1.0, 0.0).unwrap(),
        )
        .unwrap();
        assert!((half.lambda() - LAM_STE_HALF).abs() < 1e-12);
        let two = SimilarityOracle::new(
            PhysicalParams::new(1.0, 1.0, 1.0, 0.5, 1.0, 0.0).unwrap(),
        )
        .unwrap();
        assert!((two.lambda() - LAM_STE_2).abs() < 1e-12);
    }

    #[test]
    fn small_stefan_asymptotics() {
        // lambda^2 -> Ste / 2 as Ste -> 0
        let o = SimilarityOracle::new(
            PhysicalParams::new(1.0, 1.0, 1.0, 1e4, 1.0, 0.0).unwrap(),
        )
        .unwrap();
        let lam2 = o.lambda() * o.lambda();
        assert!((lam2 / (1e-4 / 2.0) - 1.0).abs() < 1e-3, "lambda^2 = {lam2}");
    }

    #[test]
    fn temperature_spot_values() {
        // frozen 50-digit evaluations of the profile at Ste = 1, T0 = 1, Tm = 0
        let o = unit();
        assert!((o.temperature(0.3, 0.25) - 0.469_494_426_235_837_83).abs() < 1e-12);
        assert!((o.temperature(0.1, 0.04) - 0.553_923_452_844_647_09).abs() < 1e-12);
        assert_eq!(o.temperature(0.0, 0.25), 1.0);
        // on and past the front
        assert_eq!(o.temperature(o.front_position(0.25), 0.25), 0.0);
        assert_eq!(o.temperature(2.0, 0.25), 0.0);
    }

    #[test]
    fn front_and_melt_time_are_inverse() {
        let o = unit();
        for t in [0.04, 0.25, 1.0] {
            let s = o.front_position(t);
            assert!((o.melt_time(s) - t).abs() < 1e-14);
        }
        assert!((o.front_position(0.25) - 2.0 * LAM_STE_1 * 0.5).abs() < 1e-12);
    }

    #[test]
    fn gradient_matches_finite_difference() {
        let o = unit();
        let (x, t) = (0.2, 0.3);
        let e = 1e-6;
        let fd = (o.temperature(x + e, t) - o.temperature(x - e, t)) / (2.0 * e);
        assert!((o.temperature_gradient(x, t) - fd).abs() < 1e-8);
    }

    #[test]
    fn sampled_field_is_consistent() {
        let o = unit();
        let (field, front) = o.sample(0.02, 0.005, 61).unwrap();
        // front knot and melt times agree with the closed forms
        let n = 60;
        let t = field.time(n);
        assert!((front.positions()[n] - o.front_position(t)).abs() < 1e-14);
        let i = field.last_node(n);
        assert!(field.x(i) < o.front_position(t));
        let h = field.melt_time(i).unwrap();
        assert!((h - o.melt_time(field.x(i))).abs() < 1e-10);
        assert_eq!(field.max_principle_excess(), 0.0);
        // corner slopes come from the closed form, not the reconstruction
        let g = field.gradient_at_melt(i).unwrap();
        assert_eq!(g, o.temperature_gradient(field.x(i), h));
    }
}
