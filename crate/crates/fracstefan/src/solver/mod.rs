//! Time stepping for the one-phase melting problem with a memory flux.
//!
//! A run is seeded from the classical similarity solution at `t_seed` and
//! marched to `t_end` with an implicit level solve and one of two front
//! update rules per step: the cumulative identity that balances stored and
//! injected heat (robust, the default), or backward Euler on the interface
//! balance itself. Everything is single threaded and allocation-stable, so
//! a rerun with the same configuration reproduces the output bit for bit.

mod scheme;

use crate::error::{Error, Result};
use crate::stefan::field::{FluxField, TemperatureField};
use crate::stefan::flux::memory_flux;
use crate::stefan::front::FrontHistory;
use crate::stefan::oracle::SimilarityOracle;
use crate::stefan::params::{MemoryParams, PhysicalParams};
use crate::stefan::similarity::SimilarityProfile;
use serde::{Deserialize, Serialize};

/// How the front position is advanced each step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FrontUpdate {
    /// Root of the cumulative heat balance; absorbs quadrature noise well.
    #[default]
    Integral,
    /// Backward Euler on the interface balance; independent of the
    /// cumulative identity, noisier on coarse grids.
    Pointwise,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GridConfig {
    pub dx: f64,
    pub dt: f64,
    /// Hand-off time from the similarity seed to the stepper.
    pub t_seed: f64,
    pub t_end: f64,
}

impl GridConfig {
    /// The grid with both steps halved `k` times; times are untouched, so a
    /// ladder of these is a pure refinement family.
    pub fn halved(&self, k: u32) -> GridConfig {
        let f = f64::from(1u32 << k);
        GridConfig { dx: self.dx / f, dt: self.dt / f, ..*self }
    }
}

fn default_newton_tol() -> f64 {
    1e-13
}

fn default_max_newton_iters() -> usize {
    80
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolverConfig {
    pub physical: PhysicalParams,
    pub memory: MemoryParams,
    pub grid: GridConfig,
    #[serde(default)]
    pub front_update: FrontUpdate,
    /// Relative bracket width at which the front root is accepted.
    #[serde(default = "default_newton_tol")]
    pub newton_tol: f64,
    #[serde(default = "default_max_newton_iters")]
    pub max_newton_iters: usize,
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        self.physical.validate()?;
        self.memory.validate()?;
        let g = &self.grid;
        for (name, v) in [("dx", g.dx), ("dt", g.dt), ("t_seed", g.t_seed), ("t_end", g.t_end)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::invalid("grid", format!("{name} must be positive, got {v}")));
            }
        }
        if g.t_end < g.t_seed {
            return Err(Error::invalid(
                "grid",
                format!("t_end = {} precedes t_seed = {}", g.t_end, g.t_seed),
            ));
        }
        for (name, v) in [("t_seed", g.t_seed), ("t_end", g.t_end)] {
            let steps = v / g.dt;
            if (steps - steps.round()).abs() > 1e-9 * steps.max(1.0) {
                return Err(Error::invalid(
                    "grid",
                    format!("{name} = {v} is not a whole number of steps of dt = {}", g.dt),
                ));
            }
        }
        if !(self.newton_tol > 0.0) || !self.newton_tol.is_finite() {
            return Err(Error::invalid(
                "newton_tol",
                format!("must be positive, got {}", self.newton_tol),
            ));
        }
        if self.max_newton_iters == 0 {
            return Err(Error::invalid("max_newton_iters", "must be at least 1"));
        }
        Ok(())
    }

    fn level_of(&self, t: f64) -> usize {
        (t / self.grid.dt).round() as usize
    }
}

/// A completed run: the stored field and front, the flux reconstructed from
/// them, and what the monitors saw.
#[derive(Debug)]
pub struct SolveOutput {
    pub field: TemperatureField,
    pub front: FrontHistory,
    pub flux: FluxField,
    pub warnings: Vec<String>,
    /// Worst overshoot of the field outside [Tm, T0]. Classical runs keep
    /// this at rounding level; with memory the node behind the front
    /// undershoots by O(dx), so this is monitored, not enforced.
    pub max_principle_excess: f64,
}

/// The similarity solution sampled through `t_seed`: the initial condition
/// every run starts from. At alpha = 1 this is the error-function solution;
/// with memory it is the profile of `SimilarityProfile`, backfilled over the
/// full node histories, so the continuum solution of the seeded problem is
/// the similarity solution itself and residuals measure scheme error alone.
pub fn seed_solution(cfg: &SolverConfig) -> Result<(TemperatureField, FrontHistory)> {
    cfg.validate()?;
    let n_levels = cfg.level_of(cfg.grid.t_seed) + 1;
    if cfg.memory.is_classical() {
        let oracle = SimilarityOracle::new(cfg.physical)?;
        check_seed_geometry(&cfg.grid, oracle.front_position(cfg.grid.t_seed), oracle.front_speed(cfg.grid.t_seed))?;
        oracle.sample(cfg.grid.dx, cfg.grid.dt, n_levels)
    } else {
        let profile = SimilarityProfile::solve(cfg.physical, cfg.memory)?;
        check_seed_geometry(&cfg.grid, profile.front_position(cfg.grid.t_seed), profile.front_speed(cfg.grid.t_seed))?;
        profile.sample(cfg.grid.dx, cfg.grid.dt, n_levels)
    }
}

fn check_seed_geometry(grid: &GridConfig, s_seed: f64, v_seed: f64) -> Result<()> {
    if s_seed <= grid.dx {
        return Err(Error::invalid(
            "grid",
            format!(
                "the seed front {s_seed:.4} has not cleared the first cell of dx = {}; \
                 lower dx or raise t_seed",
                grid.dx
            ),
        ));
    }
    if v_seed * grid.dt >= grid.dx {
        return Err(Error::Stability {
            message: format!(
                "the front moves {v_seed:.3} per unit time at the seed and would cross \
                 a cell in one step"
            ),
            suggested_dt: 0.5 * grid.dx / v_seed,
        });
    }
    Ok(())
}

/// Run the configured problem and return the full history.
pub fn run(cfg: &SolverConfig) -> Result<SolveOutput> {
    let (field, front) = seed_solution(cfg)?;
    let n_seed = cfg.level_of(cfg.grid.t_seed);
    let n_end = cfg.level_of(cfg.grid.t_end);

    let mut stepper = scheme::Stepper::new(
        cfg.physical,
        cfg.memory,
        cfg.front_update,
        cfg.newton_tol,
        cfg.max_newton_iters,
        field,
        front.positions().to_vec(),
        n_end,
    )?;
    for _ in n_seed..n_end {
        stepper.advance()?;
    }

    let field = stepper.field;
    let s = stepper.s;
    let times: Vec<f64> = (0..s.len()).map(|m| m as f64 * cfg.grid.dt).collect();
    let front = FrontHistory::new(times, s)?;
    let flux = memory_flux(&field, &front, &cfg.physical, &cfg.memory)?;
    let mut warnings = stepper.warnings;
    let excess = field.max_principle_excess();
    let span = cfg.physical.boundary_temp - cfg.physical.melt_temp;
    // The node just behind the front undershoots the melt value by O(dx) when
    // the memory sink is strong; that shrinks under refinement and is only
    // worth flagging once it stops looking like truncation error.
    if excess > 1e-2 * span {
        warnings.push(format!(
            "temperature left the admissible band by {excess:.3e} (span {span:.3e}); \
             the band check is monitored, not enforced, but this is beyond \
             near-front truncation and the run should not be trusted"
        ));
    }
    Ok(SolveOutput { field, front, flux, warnings, max_principle_excess: excess })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_cfg() -> SolverConfig {
        SolverConfig {
            physical: PhysicalParams::new(1.0, 1.0, 1.0, 1.0, 1.0, 0.0).unwrap(),
            memory: MemoryParams::classical(),
            grid: GridConfig { dx: 0.02, dt: 0.002, t_seed: 0.04, t_end: 0.3 },
            front_update: FrontUpdate::Integral,
            newton_tol: default_newton_tol(),
            max_newton_iters: default_max_newton_iters(),
        }
    }

    #[test]
    fn config_validation_catches_misaligned_times() {
        let mut cfg = base_cfg();
        cfg.grid.t_seed = 0.0401;
        assert!(cfg.validate().is_err());
        cfg = base_cfg();
        cfg.grid.t_end = 0.03;
        assert!(cfg.validate().is_err());
        cfg = base_cfg();
        cfg.grid.dt = 0.02; // front would cross a cell per step
        assert!(matches!(seed_solution(&cfg), Err(Error::Stability { .. })));
        cfg = base_cfg();
        cfg.newton_tol = 0.0;
        assert!(cfg.validate().is_err());
        cfg = base_cfg();
        cfg.max_newton_iters = 0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn seed_run_returns_seed() {
        let mut cfg = base_cfg();
        cfg.grid.t_end = cfg.grid.t_seed;
        let out = run(&cfg).unwrap();
        assert_eq!(out.field.n_levels(), 21);
        assert!(out.warnings.is_empty());
    }

    #[test]
    fn classical_run_tracks_the_similarity_front() {
        let oracle = SimilarityOracle::new(base_cfg().physical).unwrap();
        let mut sups = Vec::new();
        for (dx, dt) in [(0.04, 0.004), (0.02, 0.002)] {
            let mut cfg = base_cfg();
            cfg.grid.dx = dx;
            cfg.grid.dt = dt;
            let out = run(&cfg).unwrap();
            let mut worst: f64 = 0.0;
            for (m, &t) in out.front.times().iter().enumerate() {
                if t < 0.08 {
                    continue;
                }
                let want = oracle.front_position(t);
                worst = worst.max((out.front.positions()[m] - want).abs() / want);
            }
            sups.push(worst);
        }
        assert!(sups[1] < 0.02, "front error on the fine grid: {:?}", sups);
        assert!(sups[1] < sups[0], "front error should shrink: {:?}", sups);
    }

    #[test]
    fn both_front_rules_agree_classically() {
        let mut cfg = base_cfg();
        let a = run(&cfg).unwrap();
        cfg.front_update = FrontUpdate::Pointwise;
        let b = run(&cfg).unwrap();
        let (pa, pb) = (a.front.positions(), b.front.positions());
        let worst = pa
            .iter()
            .zip(pb)
            .skip(40)
            .map(|(x, y)| (x - y).abs() / x)
            .fold(0.0, f64::max);
        assert!(worst < 0.02, "front rules disagree by {worst}");
    }

    #[test]
    fn diffusivity_rescale_maps_nodes_exactly() {
        // quadrupling k doubles every length; with dx scaled the same way
        // the two discrete problems are images of each other
        let cfg_u = base_cfg();
        let mut cfg_s = base_cfg();
        cfg_s.physical = PhysicalParams::new(4.0, 1.0, 1.0, 1.0, 1.0, 0.0).unwrap();
        cfg_s.grid.dx = 2.0 * cfg_u.grid.dx;
        let a = run(&cfg_u).unwrap();
        let b = run(&cfg_s).unwrap();
        for (x, y) in a.front.positions().iter().zip(b.front.positions()) {
            assert!(
                (2.0 * x - y).abs() <= 1e-12 * y.max(1e-12),
                "rescale mismatch: {x} vs {y}"
            );
        }
    }

    #[test]
    fn rerun_is_bit_identical() {
        let mut cfg = base_cfg();
        cfg.memory = MemoryParams::new(0.5, 1.0).unwrap();
        cfg.grid.t_end = 0.2;
        let a = run(&cfg).unwrap();
        let b = run(&cfg).unwrap();
        assert_eq!(a.front.positions(), b.front.positions());
        let n = a.field.n_levels() - 1;
        for i in 0..=a.field.last_node(n) {
            assert!(a.field.value(i, n).to_bits() == b.field.value(i, n).to_bits());
        }
    }

    #[test]
    fn fractional_run_stays_in_the_admissible_band() {
        // Memoryless runs obey the discrete principle almost to rounding; with
        // memory the node behind the front undershoots by a truncation-sized
        // amount, so the band check demands decay under refinement instead.
        let out = run(&base_cfg()).unwrap();
        assert!(out.max_principle_excess <= 1e-12, "classical excess {}", out.max_principle_excess);

        for alpha in [0.5, 0.75] {
            let mut excesses = Vec::new();
            for (dx, dt) in [(0.02, 0.002), (0.01, 0.001)] {
                let mut cfg = base_cfg();
                cfg.memory = MemoryParams::new(alpha, 1.0).unwrap();
                cfg.grid = GridConfig { dx, dt, t_seed: 0.04, t_end: 0.3 };
                let out = run(&cfg).unwrap();
                assert!(out.warnings.is_empty(), "alpha = {alpha}: {:?}", out.warnings);
                let p = out.front.positions();
                assert!(p.windows(2).all(|w| w[1] > w[0]), "alpha = {alpha}: front not monotone");
                excesses.push(out.max_principle_excess);
            }
            assert!(
                excesses[0] < 5e-3 && (excesses[0] < 1e-12 || excesses[1] < 0.7 * excesses[0]),
                "alpha = {alpha}: excess not shrinking: {excesses:?}"
            );
        }
    }
}
