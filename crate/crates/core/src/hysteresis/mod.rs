//! Play and Preisach operators with their potentials and dissipation.

mod density;
mod play;
mod preisach;

pub use density::{DensityTable, PreisachDensity};
pub use play::{play_dissipation, play_init, play_step};
pub use preisach::{
    g_eval, modified_potential, preisach_dissipation, preisach_eval, preisach_potential,
    preisach_step, preisach_trial, preisach_trial_from, preisach_values, HysteresisIncrement, PlayBank, RGrid,
};
