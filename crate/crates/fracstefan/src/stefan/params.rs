//! Material and memory parameters.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Material data for the one-phase problem. The liquid occupies 0 < x < s(t),
/// the face x = 0 is held at `boundary_temp`, and the solid ahead of the front
/// sits at the melt temperature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    /// k, thermal conductivity.
    pub conductivity: f64,
    /// ρ, mass density.
    pub density: f64,
    /// c, specific heat.
    pub specific_heat: f64,
    /// l, latent heat per unit mass.
    pub latent_heat: f64,
    /// T0, the fixed face temperature at x = 0; must exceed the melt value.
    pub boundary_temp: f64,
    /// Tm, the melt temperature.
    pub melt_temp: f64,
}

impl PhysicalParams {
    pub fn new(
        conductivity: f64,
        density: f64,
        specific_heat: f64,
        latent_heat: f64,
        boundary_temp: f64,
        melt_temp: f64,
    ) -> Result<Self> {
        let p = PhysicalParams {
            conductivity,
            density,
            specific_heat,
            latent_heat,
            boundary_temp,
            melt_temp,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("conductivity", self.conductivity),
            ("density", self.density),
            ("specific_heat", self.specific_heat),
            ("latent_heat", self.latent_heat),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::invalid(name, format!("must be positive, got {v}")));
            }
        }
        if !self.boundary_temp.is_finite() || !self.melt_temp.is_finite() {
            return Err(Error::invalid("boundary_temp", "temperatures must be finite"));
        }
        if self.boundary_temp <= self.melt_temp {
            return Err(Error::invalid(
                "boundary_temp",
                format!(
                    "the fixed face value u(0,t) = T0 must exceed the melt temperature \
                     (got T0 = {}, Tm = {})",
                    self.boundary_temp, self.melt_temp
                ),
            ));
        }
        Ok(())
    }

    /// d = k / (ρ c), thermal diffusivity.
    pub fn diffusivity(&self) -> f64 {
        self.conductivity / (self.density * self.specific_heat)
    }

    /// Ste = c (T0 - Tm) / l.
    pub fn stefan_number(&self) -> f64 {
        self.specific_heat * (self.boundary_temp - self.melt_temp) / self.latent_heat
    }
}

/// Memory-kernel parameters: the order α of the flux law and the positive
/// constant μ_α in front of the order-(1-α) derivative in the explicit flux.
/// At α = 1 the flux law is the classical gradient law, which pins μ_1 = 1
/// exactly; the constructor enforces that.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MemoryParams {
    pub alpha: f64,
    pub mu: f64,
}

impl MemoryParams {
    pub fn new(alpha: f64, mu: f64) -> Result<Self> {
        let m = MemoryParams { alpha, mu };
        m.validate()?;
        Ok(m)
    }

    /// Deserialized values bypass the constructor, so this is public.
    pub fn validate(&self) -> Result<()> {
        let (alpha, mu) = (self.alpha, self.mu);
        if !(alpha > 0.0 && alpha <= 1.0) || !alpha.is_finite() {
            return Err(Error::invalid(
                "alpha",
                format!("memory order must lie in (0, 1], got {alpha}"),
            ));
        }
        if !(mu > 0.0) || !mu.is_finite() {
            return Err(Error::invalid(
                "mu_alpha",
                format!("flux coefficient must be positive, got {mu}"),
            ));
        }
        if alpha == 1.0 && mu != 1.0 {
            return Err(Error::invalid(
                "mu_alpha",
                format!("at alpha = 1 the flux law is the classical one and mu must equal 1, got {mu}"),
            ));
        }
        Ok(())
    }

    /// The classical limit: α = 1, μ = 1.
    pub fn classical() -> Self {
        MemoryParams { alpha: 1.0, mu: 1.0 }
    }

    pub fn is_classical(&self) -> bool {
        self.alpha == 1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_params() -> PhysicalParams {
        PhysicalParams::new(1.0, 1.0, 1.0, 1.0, 1.0, 0.0).unwrap()
    }

    #[test]
    fn derived_quantities() {
        let p = PhysicalParams::new(2.0, 4.0, 0.5, 3.0, 5.0, 1.0).unwrap();
        assert_eq!(p.diffusivity(), 1.0);
        assert_eq!(p.stefan_number(), 0.5 * 4.0 / 3.0);
    }

    #[test]
    fn rejects_cold_boundary() {
        let err = PhysicalParams::new(1.0, 1.0, 1.0, 1.0, 0.0, 0.0).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("boundary_temp"), "got: {msg}");
        assert!(msg.contains("u(0,t)"), "got: {msg}");
    }

    #[test]
    fn rejects_nonpositive_material_data() {
        assert!(PhysicalParams::new(0.0, 1.0, 1.0, 1.0, 1.0, 0.0).is_err());
        assert!(PhysicalParams::new(1.0, -1.0, 1.0, 1.0, 1.0, 0.0).is_err());
        assert!(PhysicalParams::new(1.0, 1.0, 1.0, f64::NAN, 1.0, 0.0).is_err());
    }

    #[test]
    fn memory_params_enforce_classical_mu() {
        assert!(MemoryParams::new(1.0, 1.0).is_ok());
        assert!(MemoryParams::new(1.0, 1.1).is_err());
        assert!(MemoryParams::new(0.5, 2.0).is_ok());
        assert!(MemoryParams::new(0.0, 1.0).is_err());
        assert!(MemoryParams::new(1.5, 1.0).is_err());
        assert!(MemoryParams::new(0.5, 0.0).is_err());
        let _ = unit_params();
    }
}
