//! Elastoplastic stop operator with kinematic hardening.

mod stop;
mod tensor;
mod yield_surface;

pub use stop::{
    energy_audit, p_eval, plastic_potential, stop_init, stop_step, ElasticTensors, PlasticPoint,
    StopIncrement,
};
pub use tensor::{Isotropic4, SymTensor};
pub use yield_surface::{project_z, YieldSurface};
