//! Freeze-thaw water diffusion in visco-elasto-plastic porous solids.

pub mod constitutive;
pub mod discretization;
pub mod error;
pub mod hysteresis;
pub mod plasticity;
pub mod scenario;
pub mod solver;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/scenarios.md")]
    mod scenarios {}
    #[doc = include_str!("../../../book/src/hysteresis.md")]
    mod hysteresis {}
    #[doc = include_str!("../../../book/src/plasticity.md")]
    mod plasticity {}
    #[doc = include_str!("../../../book/src/solver.md")]
    mod solver {}
    #[doc = include_str!("../../../book/src/checks.md")]
    mod checks {}
}
