//! Scenario files, the expression language and the shipped presets.

mod config;
mod expr;
mod presets;

pub use config::{
    BoundarySpec, DensityShape, DensitySpec, ExpectationResult, Expectations, InitialSpec,
    Materials, MeshSpec, OutputSpec, Scenario, SolverSpec,
};
pub use expr::Expr;
pub use presets::{preset, preset_names, PRESETS};
