//! Run directories.
//!
//! A run writes four files into its output directory:
//!
//! * `timeseries.csv`: one row per completed step, columns [`TIMESERIES_COLUMNS`];
//! * `snapshots.csv`: nodal fields in long format, columns [`SNAPSHOT_COLUMNS`],
//!   one row per (snapshot, node), the initial state included as step 0;
//! * `summary.json`: schema version, scenario echo, validation report,
//!   run summary, invariant verdicts and expectation checks;
//! * `scenario.toml`: the scenario as it was run, in canonical form.
//!
//! A run that stops early also leaves a `FAILED` marker holding the
//! diagnosis; the tables then contain everything up to the failure.
//!
//! CSV files have a header line, RFC 4180 quoting and floats printed in the
//! shortest form that parses back to the same bits (`NaN`, `inf` and `-inf`
//! for non-finite values). Booleans are `true`/`false`.

use std::fs;
use std::path::Path;

use freezethaw::constitutive::HypothesisReport;
use freezethaw::scenario::{ExpectationResult, Scenario};
use freezethaw::solver::{ConvergenceReport, RunOutput, Snapshot, StepReport};
use serde_json::{json, Value};

/// Bumped whenever a column or summary key changes meaning or disappears.
pub const SCHEMA_VERSION: u32 = 1;

pub const TIMESERIES_COLUMNS: &[&str] = &[
    "step",
    "t",
    "dt",
    "substeps",
    "internal_energy",
    "boundary_work",
    "gravity_work",
    "cut_waste",
    "defect",
    "global_defect",
    "p_min",
    "p_max",
    "theta_min",
    "theta_max",
    "chi_min",
    "chi_max",
    "chi_mean",
    "max_chi_rate",
    "chi_rate_bound",
    "chi_rate_ok",
    "diss_viscous",
    "diss_plastic",
    "diss_preisach",
    "diss_phase",
    "diss_diffusion",
    "cum_viscous",
    "cum_plastic",
    "cum_preisach",
    "cum_phase",
    "cum_diffusion",
    "floor",
    "floor_tolerance",
    "floor_violation",
    "cutoff_r",
    "cutoff_active",
    "cutoff_pressure_nodes",
    "cutoff_temperature_nodes",
    "cutoff_gradient_cells",
    "max_abs_p",
    "max_grad_sq",
    "iter_pressure",
    "iter_momentum",
    "iter_temperature",
    "sweeps",
    "res_pressure",
    "res_momentum",
    "res_temperature",
    "preisach_residual",
    "plastic_excess",
    "probe_p",
    "probe_g",
    "probe_chi",
];

pub const SNAPSHOT_COLUMNS: &[&str] =
    &["step", "t", "node", "x", "y", "p", "theta", "chi", "u_x", "u_y", "div_u"];

pub fn num(x: f64) -> String {
    format!("{x:?}")
}

fn timeseries_row(r: &StepReport) -> Vec<String> {
    let d = &r.dissipation;
    let c = &r.cumulative;
    let l = &r.ledger;
    let k = &r.cutoff;
    let mut row = vec![r.step.to_string()];
    row.extend(
        [r.t, r.dt].iter().map(|x| num(*x)),
    );
    row.push(r.substeps.to_string());
    row.extend(
        [
            l.internal,
            l.boundary_work,
            l.gravity_work,
            l.cut_waste,
            l.defect,
            l.global_defect,
            r.p_min,
            r.p_max,
            r.theta_min,
            r.theta_max,
            r.chi_min,
            r.chi_max,
            r.chi_mean,
            r.max_chi_rate,
            r.chi_rate_bound,
        ]
        .iter()
        .map(|x| num(*x)),
    );
    row.push(r.chi_rate_ok.to_string());
    row.extend(
        [
            d.viscous,
            d.plastic,
            d.preisach,
            d.phase,
            d.diffusion,
            c.viscous,
            c.plastic,
            c.preisach,
            c.phase,
            c.diffusion,
            r.floor,
            r.floor_tolerance,
            r.floor_violation(),
            k.r,
        ]
        .iter()
        .map(|x| num(*x)),
    );
    row.push(k.active().to_string());
    row.extend(
        [k.pressure_nodes.len(), k.temperature_nodes.len(), k.gradient_cells.len()]
            .iter()
            .map(|n| n.to_string()),
    );
    row.extend([k.max_abs_p, k.max_grad_sq].iter().map(|x| num(*x)));
    let it = &r.iterations;
    row.extend(
        [it.pressure, it.momentum, it.temperature, it.sweeps]
            .iter()
            .map(|n| n.to_string()),
    );
    let res = &r.residuals;
    row.extend(
        [
            res.pressure,
            res.momentum,
            res.temperature,
            r.preisach_residual,
            r.plastic_excess,
            r.probe_p,
            r.probe_g,
            r.probe_chi,
        ]
        .iter()
        .map(|x| num(*x)),
    );
    debug_assert_eq!(row.len(), TIMESERIES_COLUMNS.len());
    row
}

pub fn write_timeseries(path: &Path, reports: &[StepReport]) -> csv::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(TIMESERIES_COLUMNS)?;
    for r in reports {
        w.write_record(timeseries_row(r))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_snapshots(path: &Path, nodes: &[[f64; 2]], dim: usize, snaps: &[&Snapshot]) -> csv::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(SNAPSHOT_COLUMNS)?;
    for s in snaps {
        for (i, x) in nodes.iter().enumerate() {
            let uy = if dim == 2 { s.u[2 * i + 1] } else { 0.0 };
            let row = [
                s.step.to_string(),
                num(s.t),
                i.to_string(),
                num(x[0]),
                num(x[1]),
                num(s.p[i]),
                num(s.theta[i]),
                num(s.chi[i]),
                num(s.u[dim * i]),
                num(uy),
                num(s.div[i]),
            ];
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn validation_json(rep: &HypothesisReport) -> Value {
    json!({
        "all_passed": rep.all_passed(),
        "clauses": rep.clauses,
    })
}

/// Summary document of a run.
pub fn run_summary(
    scenario: &Scenario,
    validation: &HypothesisReport,
    forced: bool,
    out: &RunOutput,
    expectations: &[ExpectationResult],
    probe_node: usize,
) -> Value {
    let s = &out.summary;
    let invariants = json!({
        "chi_in_bounds": s.chi_in_bounds,
        "theta_positive": s.theta_positive,
        "floor_ok": s.floor_ok,
        "dissipation_nonnegative": s.dissipation_nonnegative,
        "chi_rate_ok": s.chi_rate_ok,
        "cutoff_inactive": !s.cutoff_ever_active,
    });
    let all_ok = invariants
        .as_object()
        .map(|m| m.values().all(|v| v.as_bool() == Some(true)))
        .unwrap_or(false);
    json!({
        "schema_version": SCHEMA_VERSION,
        "kind": "run",
        "scenario": scenario.name,
        "config": scenario,
        "validation": validation_json(validation),
        "forced": forced,
        "probe_node": probe_node,
        "summary": s,
        "invariants": invariants,
        "all_invariants_ok": all_ok,
        "expectations": expectations,
        "expectations_ok": expectations.iter().all(|e| e.passed),
        "failure": out.failure,
        "files": {
            "timeseries": "timeseries.csv",
            "snapshots": "snapshots.csv",
            "scenario": "scenario.toml",
        },
        "timeseries_columns": TIMESERIES_COLUMNS,
        "snapshot_columns": SNAPSHOT_COLUMNS,
    })
}

fn log2_all(v: &[f64]) -> Vec<f64> {
    v.iter().map(|x| x.log2()).collect()
}

pub fn convergence_summary(scenario: &Scenario, rep: &ConvergenceReport, threshold: f64) -> Value {
    json!({
        "schema_version": SCHEMA_VERSION,
        "kind": "convergence",
        "scenario": scenario.name,
        "config": scenario,
        "report": rep,
        "orders": {
            "p": log2_all(&rep.factor_p),
            "theta": log2_all(&rep.factor_theta),
            "u": log2_all(&rep.factor_u),
        },
        "factor_threshold": threshold,
        "factors_ok": rep.min_factor() >= threshold,
        "all_levels_ok": rep.all_levels_ok(),
    })
}

pub fn write_convergence_table(path: &Path, rep: &ConvergenceReport) -> csv::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "level", "dt", "steps", "global_defect", "max_floor_violation", "floor_tolerance",
        "theta_min", "diff_p", "diff_theta", "diff_u", "failed",
    ])?;
    for l in &rep.levels {
        let diff = |v: &[f64]| v.get(l.level).map_or(String::new(), |x| num(*x));
        w.write_record([
            l.level.to_string(),
            num(l.dt),
            l.steps.to_string(),
            num(l.global_defect),
            num(l.max_floor_violation),
            num(l.floor_tolerance),
            num(l.theta_min),
            diff(&rep.diff_p),
            diff(&rep.diff_theta),
            diff(&rep.diff_u),
            l.failure.is_some().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json(path: &Path, v: &Value) -> std::io::Result<()> {
    let mut text = serde_json::to_string_pretty(v).map_err(std::io::Error::other)?;
    text.push('\n');
    fs::write(path, text)
}
