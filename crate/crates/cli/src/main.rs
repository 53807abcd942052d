//! `freezethaw`: validate, run and refine freeze-thaw scenarios.
//!
//! Scenarios are TOML files (see `freezethaw::scenario`) or one of the
//! shipped presets (`--preset freeze_thaw`). `freezethaw presets` lists the
//! presets and `freezethaw presets --show NAME` prints one as a starting point.
//!
//! Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | hypothesis validation failed, or the scenario is invalid |
//! | 2 | usage, parse or I/O error |
//! | 3 | the simulation failed (step failure after all retries) |
//!
//! `FREEZETHAW_THREADS` caps the worker threads used by `converge`, which
//! runs its refinement levels in parallel.
//!
//! Mesh files (`mesh.file`) use the plain format of
//! `freezethaw::discretization::Mesh::from_text`:
//!
//! ```text
//! # freezethaw mesh v1
//! dim <1|2>
//! nodes <n>
//! <x> [y]                      one line per node
//! cells <m>
//! <i0> <i1> [i2]               node indices, 0-based
//! boundary <k>
//! <marker> <i0> [i1]           boundary facets with their marker
//! ```
//!
//! Density files (`density.shape = { kind = "file", path = ... }`) use
//!
//! ```text
//! # freezethaw density v1
//! r_range <r0> <r1>
//! v_range <v0> <v1>
//! shape <nr> <nv>
//! <nr * nv values, row-major in r>
//! ```

mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use freezethaw::discretization::lumped_mass;
use freezethaw::scenario::{preset, preset_names, Scenario, PRESETS};
use freezethaw::solver::{compare_levels, run_level, run_simulation, Simulation};
use freezethaw::Error;
use rayon::prelude::*;

/// Minimal Cauchy factor per halving reported as acceptable by `converge`.
const FACTOR_THRESHOLD: f64 = 1.5;

#[derive(Parser)]
#[command(name = "freezethaw", version, about = "Freeze-thaw water diffusion in visco-elasto-plastic porous solids")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// Scenario file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Shipped preset instead of a file.
    #[arg(long)]
    preset: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Check every hypothesis on the laws and data, clause by clause.
    Validate {
        #[command(flatten)]
        source: Source,
    },
    /// Run a scenario and write its tables and summary.
    Run {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        out_dir: PathBuf,
        /// Overrides `solver.seed`.
        #[arg(long)]
        seed: Option<u64>,
        /// Run even if validation fails.
        #[arg(long)]
        force: bool,
    },
    /// Time-refinement study over dt, dt/2, dt/4, ...
    Converge {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u32).range(3..=8))]
        levels: u32,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        force: bool,
    },
    /// List the shipped presets or print one.
    Presets {
        #[arg(long)]
        show: Option<String>,
    },
}

/// Error carrying its exit code.
struct Fail(u8, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse { .. } | Error::Io(_) => 2,
            Error::InvalidParameter(_) | Error::InvalidSetup(_) | Error::InvalidState(_) => 1,
            _ => 3,
        };
        Fail(code, e.to_string())
    }
}

fn io_fail(path: &Path, e: impl std::fmt::Display) -> Fail {
    Fail(2, format!("{}: {e}", path.display()))
}

fn load(source: &Source, seed: Option<u64>) -> Result<Scenario, Fail> {
    let mut sc = match (&source.config, &source.preset) {
        (Some(path), _) => Scenario::load(path).map_err(|e| match e {
            Error::Io(io) => io_fail(path, io),
            Error::Parse { .. } => Fail(2, format!("{}: {e}", path.display())),
            other => other.into(),
        })?,
        (None, Some(name)) => preset(name).map_err(|e| Fail(2, e.to_string()))?,
        (None, None) => unreachable!("clap enforces one source"),
    };
    if let Some(s) = seed {
        sc.solver.seed = s;
    }
    Ok(sc)
}

fn validate_gate(sc: &Scenario, force: bool) -> Result<freezethaw::constitutive::HypothesisReport, Fail> {
    let rep = sc.validate()?;
    if !rep.all_passed() {
        for c in rep.failed() {
            eprintln!("FAIL {} {}: {}", c.clause, c.description, c.witness.as_deref().unwrap_or(""));
        }
        if !force {
            return Err(Fail(1, "validation failed; rerun with --force to run anyway".into()));
        }
        eprintln!("validation failed, continuing because of --force");
    }
    Ok(rep)
}

fn prepare_dir(dir: &Path) -> Result<(), Fail> {
    std::fs::create_dir_all(dir).map_err(|e| io_fail(dir, e))?;
    let marker = dir.join("FAILED");
    if marker.exists() {
        std::fs::remove_file(&marker).map_err(|e| io_fail(&marker, e))?;
    }
    Ok(())
}

fn cmd_validate(source: &Source) -> Result<(), Fail> {
    let sc = load(source, None)?;
    let rep = sc.validate()?;
    print!("{rep}");
    if rep.all_passed() {
        println!("all {} clauses passed", rep.clauses.len());
        Ok(())
    } else {
        let n = rep.failed().count();
        Err(Fail(1, format!("{n} of {} clauses failed", rep.clauses.len())))
    }
}

fn cmd_run(source: &Source, out_dir: &Path, seed: Option<u64>, force: bool) -> Result<(), Fail> {
    let sc = load(source, seed)?;
    let validation = validate_gate(&sc, force)?;
    prepare_dir(out_dir)?;
    let problem = sc.build_problem()?;
    let nodes = problem.mesh.nodes().to_vec();
    let dim = problem.mesh.dim();
    let mut sim = Simulation::new(problem, sc.solver_config())?;
    let probe = sim.probe_node();
    let out = run_simulation(&mut sim, sc.output.snapshot_every)?;

    let expectations = sc.output.expect.check(&out);
    let ts = out_dir.join("timeseries.csv");
    output::write_timeseries(&ts, &out.reports).map_err(|e| io_fail(&ts, e))?;
    let sn = out_dir.join("snapshots.csv");
    let snaps: Vec<_> = std::iter::once(&out.initial).chain(&out.snapshots).collect();
    output::write_snapshots(&sn, &nodes, dim, &snaps).map_err(|e| io_fail(&sn, e))?;
    let echo = out_dir.join("scenario.toml");
    std::fs::write(&echo, sc.to_toml_string()?).map_err(|e| io_fail(&echo, e))?;
    let summary = output::run_summary(&sc, &validation, force, &out, &expectations, probe);
    let sj = out_dir.join("summary.json");
    output::write_json(&sj, &summary).map_err(|e| io_fail(&sj, e))?;

    let s = &out.summary;
    println!(
        "{}: {} steps to t = {}, chi in [{}, {}], min theta {}, global defect {:e}, loop area {:e}",
        sc.name, s.steps, s.t_final, s.chi_min, s.chi_max, s.theta_min, s.global_defect, s.loop_area
    );
    println!(
        "invariants: {}",
        if summary["all_invariants_ok"] == true { "all green" } else { "VIOLATED" }
    );
    for e in &expectations {
        let tag = if e.passed { "ok" } else { "MISSED" };
        println!("expect {} {}: observed {} ({tag})", e.name, e.threshold, e.observed);
    }
    if let Some(f) = &out.failure {
        let marker = out_dir.join("FAILED");
        std::fs::write(&marker, format!("{f}\n")).map_err(|e| io_fail(&marker, e))?;
        return Err(Fail(3, format!("run failed: {f}")));
    }
    Ok(())
}

fn thread_pool() -> Result<rayon::ThreadPool, Fail> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("FREEZETHAW_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| Fail(2, format!("FREEZETHAW_THREADS must be a positive integer, got '{v}'")))?;
        b = b.num_threads(n.max(1));
    }
    b.build().map_err(|e| Fail(2, format!("cannot start worker threads: {e}")))
}

fn cmd_converge(source: &Source, out_dir: &Path, levels: usize, seed: Option<u64>, force: bool) -> Result<(), Fail> {
    let sc = load(source, seed)?;
    validate_gate(&sc, force)?;
    prepare_dir(out_dir)?;
    let problem = sc.build_problem()?;
    let config = sc.solver_config();
    let pool = thread_pool()?;
    let outputs = pool.install(|| {
        (0..levels)
            .into_par_iter()
            .map(|k| run_level(&problem, &config, k))
            .collect::<Vec<_>>()
    });
    let outputs = outputs.into_iter().collect::<Result<Vec<_>, _>>()?;
    let mass = lumped_mass(&problem.mesh);
    let rep = compare_levels(&config, &mass, &outputs);

    let table = out_dir.join("convergence.csv");
    output::write_convergence_table(&table, &rep).map_err(|e| io_fail(&table, e))?;
    let summary = output::convergence_summary(&sc, &rep, FACTOR_THRESHOLD);
    let sj = out_dir.join("convergence.json");
    output::write_json(&sj, &summary).map_err(|e| io_fail(&sj, e))?;

    for l in &rep.levels {
        println!(
            "level {} dt {:e}: {} steps, global defect {:e}, floor violation {:e} (tol {:e}){}",
            l.level,
            l.dt,
            l.steps,
            l.global_defect,
            l.max_floor_violation,
            l.floor_tolerance,
            l.failure.as_ref().map_or(String::new(), |f| format!(", FAILED: {f}"))
        );
    }
    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>().join(" ");
    println!("Cauchy factors p [{}] theta [{}] u [{}]", fmt(&rep.factor_p), fmt(&rep.factor_theta), fmt(&rep.factor_u));
    println!("defect orders [{}]", fmt(&rep.defect_orders));
    println!(
        "min factor {:.3} {} {FACTOR_THRESHOLD}",
        rep.min_factor(),
        if rep.min_factor() >= FACTOR_THRESHOLD { ">=" } else { "<" }
    );
    if !rep.all_levels_ok() {
        let marker = out_dir.join("FAILED");
        std::fs::write(&marker, "one or more refinement levels failed\n").map_err(|e| io_fail(&marker, e))?;
        return Err(Fail(3, "one or more refinement levels failed".into()));
    }
    Ok(())
}

fn cmd_presets(show: Option<&str>) -> Result<(), Fail> {
    match show {
        None => {
            for name in preset_names() {
                let sc = preset(name)?;
                println!("{name:<14} {}", sc.description);
            }
        }
        Some(name) => {
            let src = PRESETS
                .iter()
                .find(|p| p.0 == name)
                .ok_or_else(|| Fail(2, format!("unknown preset '{name}'")))?;
            print!("{}", src.1);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match &cli.command {
        Command::Validate { source } => cmd_validate(source),
        Command::Run { source, out_dir, seed, force } => cmd_run(source, out_dir, *seed, *force),
        Command::Converge { source, out_dir, levels, seed, force } => {
            cmd_converge(source, out_dir, *levels as usize, *seed, *force)
        }
        Command::Presets { show } => cmd_presets(show.as_deref()),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(Fail(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
