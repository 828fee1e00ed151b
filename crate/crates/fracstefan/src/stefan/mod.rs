//! Domain model of the melting problem: material data, the free boundary with
//! its inverse melt-time map, ragged space-time fields, the memory flux, a
//! classical similarity oracle, and residual functionals for every governing
//! relation.
//!
//! The residual functionals never enforce anything; they measure how well a
//! given (field, front) pair satisfies a relation, and the callers decide what
//! to do with the number.

pub mod field;
pub mod flux;
pub mod front;
pub mod oracle;
pub mod params;
pub mod residuals;
pub mod similarity;

pub use field::{FluxField, TemperatureField};
pub use flux::{continuity_residual, implicit_flux_residual, memory_flux};
pub use front::FrontHistory;
pub use oracle::SimilarityOracle;
pub use similarity::SimilarityProfile;
pub use params::{MemoryParams, PhysicalParams};
pub use residuals::{
    governing_residual_caputo, governing_residual_rl, integral_relation_residual,
    stefan_condition_residual, ResidualWindow,
};
