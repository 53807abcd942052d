//! Semi-implicit splitting scheme and its diagnostics.

mod diagnostics;
mod momentum;
mod newton;
mod phase;
mod pressure;
mod problem;
mod run;
mod state;
mod step;
mod temperature;

pub use diagnostics::{
    cutoff_monitor, floor_constant, gravity_work, internal_energy, CutoffReport, LedgerEntry, ThetaFloor,
};
pub use momentum::{momentum_load, momentum_operator, step_momentum, MomentumOutcome};
pub use newton::NewtonResult;
pub use phase::{phase_forcing, phase_update, step_phase, Coupling, PhaseOutcome};
pub use pressure::{step_pressure, PressureOutcome};
pub use problem::{BoundaryData, HeatSources, InitialData, Problem, ScalarField, SchemeFlags, SolverConfig};
pub use run::{
    compare_levels, convergence_study, level_config, run, run_level, run_simulation, shoelace_area,
    ConvergenceReport, LevelReport, RunOutput, RunSummary, Snapshot,
};
pub use state::{DissipationTotals, Forms, SimState};
pub use step::{IterationCounts, Residuals, Simulation, StepReport};
pub use temperature::{step_temperature, HeatInput, TemperatureOutcome};
