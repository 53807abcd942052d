//! Material laws, cut-offs, Kirchhoff transforms and hypothesis checks.

mod cutoff;
mod kirchhoff;
mod laws;
mod validate;

pub use cutoff::{q_r, CutoffPack};
pub use kirchhoff::{adaptive_simpson, kirchhoff, kirchhoff_inverse, kirchhoff_slope, FnLaw, KirchhoffLaw};
pub use laws::{
    ConductivityLaw, HeatCapacityLaw, MaterialLaws, MobilityLaw, PhysicalConstants,
    RelaxationLaw, SaturationLaw,
};
pub use validate::{validate_hypotheses, ClauseResult, DataSamples, HypothesisReport};
