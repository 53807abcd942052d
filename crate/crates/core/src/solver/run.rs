//! Whole runs, summaries and time-refinement studies.

use serde::Serialize;

use super::problem::{Problem, SolverConfig};
use super::state::SimState;
use super::step::{Simulation, StepReport};
use crate::error::Result;

/// Nodal fields at one output time.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub step: usize,
    pub t: f64,
    pub p: Vec<f64>,
    pub theta: Vec<f64>,
    pub chi: Vec<f64>,
    pub u: Vec<f64>,
    pub div: Vec<f64>,
}

impl Snapshot {
    pub fn of(step: usize, s: &SimState) -> Self {
        Snapshot {
            step,
            t: s.t,
            p: s.p.clone(),
            theta: s.theta.clone(),
            chi: s.chi.clone(),
            u: s.u.clone(),
            div: s.div.clone(),
        }
    }
}

/// Aggregated invariant checks of a run.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RunSummary {
    pub steps: usize,
    pub t_final: f64,
    pub chi_min: f64,
    pub chi_max: f64,
    pub chi_in_bounds: bool,
    pub theta_min: f64,
    pub theta_positive: bool,
    pub max_floor_violation: f64,
    pub floor_tolerance: f64,
    pub floor_ok: bool,
    pub floor_final: f64,
    pub dissipation_nonnegative: bool,
    pub chi_rate_ok: bool,
    pub global_defect: f64,
    pub cutoff_ever_active: bool,
    pub max_preisach_residual: f64,
    pub max_plastic_excess: f64,
    /// Shoelace area of the probe curve `(p, G[p])`.
    pub loop_area: f64,
    pub max_substeps: usize,
}

impl RunSummary {
    pub fn from_reports(reports: &[StepReport], initial: &SimState) -> Self {
        let mut s = RunSummary {
            chi_min: initial.chi.iter().cloned().fold(f64::INFINITY, f64::min),
            chi_max: initial.chi.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            theta_min: initial.theta.iter().cloned().fold(f64::INFINITY, f64::min),
            chi_rate_ok: true,
            dissipation_nonnegative: true,
            ..RunSummary::default()
        };
        for r in reports {
            s.chi_min = s.chi_min.min(r.chi_min);
            s.chi_max = s.chi_max.max(r.chi_max);
            s.theta_min = s.theta_min.min(r.theta_min);
            s.max_floor_violation = s.max_floor_violation.max(r.floor_violation());
            s.floor_tolerance = r.floor_tolerance;
            s.floor_final = r.floor;
            s.dissipation_nonnegative &= r.dissipation_nonnegative();
            s.chi_rate_ok &= r.chi_rate_ok;
            s.cutoff_ever_active |= r.cutoff.active();
            s.max_preisach_residual = s.max_preisach_residual.max(r.preisach_residual);
            s.max_plastic_excess = s.max_plastic_excess.max(r.plastic_excess);
            s.max_substeps = s.max_substeps.max(r.substeps);
        }
        if let Some(last) = reports.last() {
            s.steps = last.step;
            s.t_final = last.t;
            s.global_defect = last.ledger.global_defect;
        }
        s.chi_in_bounds = s.chi_min >= 0.0 && s.chi_max <= 1.0;
        s.theta_positive = s.theta_min > 0.0;
        s.floor_ok = s.max_floor_violation <= s.floor_tolerance;
        let curve: Vec<(f64, f64)> = reports.iter().map(|r| (r.probe_p, r.probe_g)).collect();
        s.loop_area = shoelace_area(&curve);
        s
    }
}

/// Absolute shoelace area of a polygon (closed implicitly).
pub fn shoelace_area(points: &[(f64, f64)]) -> f64 {
    if points.len() < 3 {
        return 0.0;
    }
    let mut a = 0.0;
    for k in 0..points.len() {
        let (x0, y0) = points[k];
        let (x1, y1) = points[(k + 1) % points.len()];
        a += x0 * y1 - x1 * y0;
    }
    0.5 * a.abs()
}

/// Everything a run produced, including a failure diagnosis if it stopped early.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub initial: Snapshot,
    pub reports: Vec<StepReport>,
    pub snapshots: Vec<Snapshot>,
    pub final_state: SimState,
    pub summary: RunSummary,
    pub failure: Option<String>,
}

/// Runs to `t_end`, keeping a snapshot every `snapshot_every` steps (0: final only).
pub fn run(problem: Problem, config: SolverConfig, snapshot_every: usize) -> Result<RunOutput> {
    let mut sim = Simulation::new(problem, config)?;
    run_simulation(&mut sim, snapshot_every)
}

/// Runs an existing simulation to its end time.
pub fn run_simulation(sim: &mut Simulation, snapshot_every: usize) -> Result<RunOutput> {
    let initial_state = sim.state().clone();
    let initial = Snapshot::of(0, &initial_state);
    let steps = sim.config().num_steps();
    let mut reports = Vec::with_capacity(steps);
    let mut snapshots = Vec::new();
    let mut failure = None;
    for k in 1..=steps {
        match sim.step() {
            Ok(r) => reports.push(r),
            Err(e) => {
                failure = Some(format!("step {k} at t = {}: {e}", sim.state().t));
                break;
            }
        }
        if snapshot_every > 0 && k % snapshot_every == 0 {
            snapshots.push(Snapshot::of(k, sim.state()));
        }
    }
    let final_state = sim.state().clone();
    if snapshots.last().map(|s| s.step) != Some(reports.len()) && !reports.is_empty() {
        snapshots.push(Snapshot::of(reports.len(), &final_state));
    }
    let summary = RunSummary::from_reports(&reports, &initial_state);
    Ok(RunOutput {
        initial,
        reports,
        snapshots,
        final_state,
        summary,
        failure,
    })
}

/// Configuration of refinement level `k`: `dt / 2^k`.
pub fn level_config(config: &SolverConfig, k: usize) -> SolverConfig {
    let mut c = config.clone();
    c.dt = config.dt / (1u64 << k) as f64;
    c
}

/// Runs level `k` with a snapshot at every coarse time step.
pub fn run_level(problem: &Problem, config: &SolverConfig, k: usize) -> Result<RunOutput> {
    run(problem.clone(), level_config(config, k), 1 << k)
}

/// Per-level figures of a refinement study.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelReport {
    pub level: usize,
    pub dt: f64,
    pub steps: usize,
    pub global_defect: f64,
    pub max_floor_violation: f64,
    pub floor_tolerance: f64,
    pub theta_min: f64,
    pub failure: Option<String>,
}

/// Inter-level differences and observed rates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub levels: Vec<LevelReport>,
    /// `||x_k - x_{k+1}||` in the discrete `L2(Omega x (0, T))` norm.
    pub diff_p: Vec<f64>,
    pub diff_theta: Vec<f64>,
    pub diff_u: Vec<f64>,
    /// Ratios of consecutive differences.
    pub factor_p: Vec<f64>,
    pub factor_theta: Vec<f64>,
    pub factor_u: Vec<f64>,
    /// `log2` of consecutive global defect ratios.
    pub defect_orders: Vec<f64>,
}

impl ConvergenceReport {
    pub fn min_factor(&self) -> f64 {
        self.factor_p
            .iter()
            .chain(&self.factor_theta)
            .chain(&self.factor_u)
            .cloned()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn all_levels_ok(&self) -> bool {
        self.levels.iter().all(|l| l.failure.is_none())
    }
}

fn ratios(v: &[f64]) -> Vec<f64> {
    v.windows(2).map(|w| w[0] / w[1]).collect()
}

/// Compares runs produced by [`run_level`] for levels `0..outputs.len()`.
///
/// `mass` holds the lumped nodal masses; the time weight is the coarse `dt`.
pub fn compare_levels(config: &SolverConfig, mass: &[f64], outputs: &[RunOutput]) -> ConvergenceReport {
    let dim = outputs
        .first()
        .map(|o| o.initial.u.len() / mass.len().max(1))
        .unwrap_or(1);
    let dist = |a: &RunOutput, b: &RunOutput, field: fn(&Snapshot) -> &[f64], per: usize| -> f64 {
        let mut s = 0.0;
        for (x, y) in a.snapshots.iter().zip(&b.snapshots) {
            for (j, (u, v)) in field(x).iter().zip(field(y)).enumerate() {
                s += config.dt * mass[j / per] * (u - v) * (u - v);
            }
        }
        s.sqrt()
    };
    let mut diff_p = Vec::new();
    let mut diff_theta = Vec::new();
    let mut diff_u = Vec::new();
    for w in outputs.windows(2) {
        diff_p.push(dist(&w[0], &w[1], |s| &s.p, 1));
        diff_theta.push(dist(&w[0], &w[1], |s| &s.theta, 1));
        diff_u.push(dist(&w[0], &w[1], |s| &s.u, dim));
    }
    let levels: Vec<LevelReport> = outputs
        .iter()
        .enumerate()
        .map(|(k, o)| LevelReport {
            level: k,
            dt: config.dt / (1u64 << k) as f64,
            steps: o.reports.len(),
            global_defect: o.summary.global_defect,
            max_floor_violation: o.summary.max_floor_violation,
            floor_tolerance: o.summary.floor_tolerance,
            theta_min: o.summary.theta_min,
            failure: o.failure.clone(),
        })
        .collect();
    let defect_orders = levels
        .windows(2)
        .map(|w| (w[0].global_defect / w[1].global_defect).log2())
        .collect();
    ConvergenceReport {
        factor_p: ratios(&diff_p),
        factor_theta: ratios(&diff_theta),
        factor_u: ratios(&diff_u),
        diff_p,
        diff_theta,
        diff_u,
        levels,
        defect_orders,
    }
}

/// Runs `levels` refinement levels on scoped threads and compares them.
pub fn convergence_study(problem: &Problem, config: &SolverConfig, levels: usize) -> Result<ConvergenceReport> {
    let outputs: Vec<Result<RunOutput>> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..levels)
            .map(|k| s.spawn(move || run_level(problem, config, k)))
            .collect();
        handles.into_iter().map(|h| h.join().expect("level thread panicked")).collect()
    });
    let outputs = outputs.into_iter().collect::<Result<Vec<_>>>()?;
    let mass = crate::discretization::lumped_mass(&problem.mesh);
    Ok(compare_levels(config, &mass, &outputs))
}
