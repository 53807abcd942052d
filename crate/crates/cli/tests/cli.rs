use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

#[allow(dead_code)]
#[path = "../src/output.rs"]
mod output;

use output::{SCHEMA_VERSION, SNAPSHOT_COLUMNS, TIMESERIES_COLUMNS};

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_freezethaw"))
        .args(args)
        .env("FREEZETHAW_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn run_into(dir: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["run", "--out-dir", dir.to_str().unwrap()];
    args.extend_from_slice(extra);
    cli(&args)
}

fn header(path: &Path) -> Vec<String> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.headers().unwrap().iter().map(String::from).collect()
}

/// Copy of a preset as printed by `presets --show`, written into `dir`.
fn preset_file(dir: &Path, preset: &str) -> String {
    let shown = cli(&["presets", "--show", preset]);
    assert_eq!(code(&shown), 0);
    let text = String::from_utf8(shown.stdout).unwrap();
    let path = dir.join(format!("{preset}.toml"));
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn default_run_writes_the_documented_schema() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = run_into(&out, &["--preset", "default"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("invariants: all green"));

    assert_eq!(header(&out.join("timeseries.csv")), TIMESERIES_COLUMNS);
    assert_eq!(header(&out.join("snapshots.csv")), SNAPSHOT_COLUMNS);
    assert!(!out.join("FAILED").exists());

    let s: Value = serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(s["schema_version"], SCHEMA_VERSION);
    assert_eq!(s["kind"], "run");
    assert_eq!(s["scenario"], "default");
    for key in ["config", "validation", "summary", "invariants", "expectations", "files", "probe_node"] {
        assert!(s.get(key).is_some(), "missing {key}");
    }
    assert_eq!(s["all_invariants_ok"], true);
    assert_eq!(s["validation"]["all_passed"], true);
    assert!(s["failure"].is_null());
    assert_eq!(s["timeseries_columns"].as_array().unwrap().len(), TIMESERIES_COLUMNS.len());

    // 500 steps, one row each.
    let rows = csv::Reader::from_path(out.join("timeseries.csv")).unwrap().records().count();
    assert_eq!(rows, 500);
    assert_eq!(s["summary"]["steps"], 500);

    // The echoed scenario runs again as a file.
    let again = dir.path().join("again");
    let echo = out.join("scenario.toml");
    let o = run_into(&again, &["--config", echo.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert_eq!(
        fs::read(out.join("timeseries.csv")).unwrap(),
        fs::read(again.join("timeseries.csv")).unwrap()
    );
}

#[test]
fn runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = preset_file(dir.path(), "freeze_thaw");
    let go = |name: &str| {
        let o = run_into(&dir.path().join(name), &["--config", &cfg, "--seed", "42"]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    };
    go("a");
    go("b");
    for f in ["timeseries.csv", "snapshots.csv", "summary.json", "scenario.toml"] {
        assert_eq!(
            fs::read(dir.path().join("a").join(f)).unwrap(),
            fs::read(dir.path().join("b").join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn zero_forcing_timeseries_is_constant() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_into(dir.path(), &["--preset", "zero_forcing"]);
    assert_eq!(code(&o), 0);
    let mut r = csv::Reader::from_path(dir.path().join("timeseries.csv")).unwrap();
    let h = r.headers().unwrap().clone();
    let col = |name: &str| h.iter().position(|c| c == name).unwrap();
    let rows: Vec<_> = r.records().map(|x| x.unwrap()).collect();
    for name in ["p_min", "p_max", "theta_min", "theta_max", "chi_min", "chi_max", "probe_p", "probe_g"] {
        let first = &rows[0][col(name)];
        assert!(rows.iter().all(|row| &row[col(name)] == first), "{name} moves");
    }
    for name in ["defect", "global_defect", "diss_plastic", "diss_preisach"] {
        assert!(rows.iter().all(|row| row[col(name)].parse::<f64>().unwrap() == 0.0), "{name}");
    }
}

#[test]
fn csv_floats_round_trip_exactly() {
    for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE, 273.15] {
        assert_eq!(output::num(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
    }
    assert_eq!(output::num(f64::NAN), "NaN");
    assert_eq!(output::num(f64::INFINITY), "inf");
    assert_eq!(output::num(f64::NEG_INFINITY), "-inf");
    assert!("-inf".parse::<f64>().unwrap().is_infinite());
}

#[test]
fn exit_codes() {
    assert_eq!(code(&cli(&["validate", "--preset", "default"])), 0);

    let o = cli(&["validate", "--preset", "linear_regime"]);
    assert_eq!(code(&o), 1);
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains("(iii)") && text.contains("(vi)"), "{text}");

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "[solver\ndt = 1\n").unwrap();
    assert_eq!(code(&cli(&["validate", "--config", bad.to_str().unwrap()])), 2);
    let missing = dir.path().join("missing.toml");
    assert_eq!(code(&cli(&["validate", "--config", missing.to_str().unwrap()])), 2);
    assert_eq!(code(&cli(&["presets", "--show", "nope"])), 2);
    assert_eq!(code(&cli(&["run", "--preset", "default"])), 2);

    // An unreachable tolerance with a single iteration fails every step.
    let cfg = preset_file(dir.path(), "default");
    let text = fs::read_to_string(&cfg).unwrap().replace(
        "[solver]\n",
        "[solver]\ntolerance = 1e-300\nmax_iterations = 1\nmax_halvings = 1\n",
    );
    fs::write(&cfg, text).unwrap();
    let out = dir.path().join("strict");
    let o = run_into(&out, &["--config", &cfg]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("FAILED").exists());
    let s: Value = serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert!(!s["failure"].is_null());
}

#[test]
fn forced_runs_are_marked() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = preset_file(dir.path(), "linear_regime");
    let text = fs::read_to_string(&cfg).unwrap().replace("t_end = 0.1", "t_end = 0.01");
    fs::write(&cfg, text).unwrap();
    assert_eq!(code(&run_into(&dir.path().join("a"), &["--config", &cfg])), 1);
    let o = run_into(&dir.path().join("b"), &["--config", &cfg, "--force"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let s: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("b/summary.json")).unwrap()).unwrap();
    assert_eq!(s["forced"], true);
    assert_eq!(s["validation"]["all_passed"], false);
}

#[test]
fn converge_writes_its_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = preset_file(dir.path(), "default");
    let text = fs::read_to_string(&cfg).unwrap().replace("t_end = 0.5", "t_end = 0.05");
    fs::write(&cfg, text).unwrap();
    let out = dir.path().join("conv");
    let o = cli(&["converge", "--config", &cfg, "--out-dir", out.to_str().unwrap(), "--levels", "3"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv::Reader::from_path(out.join("convergence.csv")).unwrap().records().count();
    assert_eq!(rows, 3);
    let s: Value = serde_json::from_str(&fs::read_to_string(out.join("convergence.json")).unwrap()).unwrap();
    assert_eq!(s["kind"], "convergence");
    assert_eq!(s["all_levels_ok"], true);
    assert_eq!(s["orders"]["p"].as_array().unwrap().len(), 1);
    assert_eq!(code(&cli(&["converge", "--preset", "default", "--out-dir", "x", "--levels", "2"])), 2);
}

#[test]
fn presets_are_listed_and_shown() {
    let o = cli(&["presets"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let names: Vec<_> = text.lines().map(|l| l.split_whitespace().next().unwrap()).collect();
    assert_eq!(names, ["default", "freeze_thaw", "zero_forcing", "linear_regime"]);
    let o = cli(&["presets", "--show", "freeze_thaw"]);
    assert!(String::from_utf8(o.stdout).unwrap().starts_with("name = \"freeze_thaw\""));
}
