use std::f64::consts::PI;
use std::fs;

use freezethaw::discretization::build_mesh;
use freezethaw::hysteresis::{DensityTable, PreisachDensity};
use freezethaw::scenario::{preset, preset_names, Expr, Scenario};
use freezethaw::Error;
use proptest::prelude::*;

#[test]
fn presets_round_trip_through_toml() {
    let names: Vec<_> = preset_names().collect();
    assert_eq!(names, ["default", "freeze_thaw", "zero_forcing", "linear_regime"]);
    for name in names {
        let sc = preset(name).unwrap();
        assert_eq!(sc.name, name);
        let text = sc.to_toml_string().unwrap();
        assert_eq!(Scenario::from_toml_str(&text).unwrap(), sc, "{name}");
        sc.build_problem().unwrap();
    }
    assert!(matches!(preset("nope"), Err(Error::InvalidParameter(_))));
}

#[test]
fn shipped_presets_validate_as_documented() {
    for name in ["default", "freeze_thaw", "zero_forcing"] {
        let rep = preset(name).unwrap().validate().unwrap();
        assert!(rep.all_passed(), "{name}:\n{rep}");
    }
    let rep = preset("linear_regime").unwrap().validate().unwrap();
    let failed: Vec<_> = rep.failed().map(|c| c.clause.as_str()).collect();
    assert_eq!(failed, ["(iii)", "(vi)", "saturation-constants"]);
}

#[test]
fn expression_examples() {
    let e = Expr::parse("1 + 2 * 3 ^ 2").unwrap();
    assert_eq!(e.eval(0.0, 0.0, 0.0), 19.0);
    assert!(e.is_steady());
    let e = Expr::parse("-2 ^ 2").unwrap();
    assert_eq!(e.eval(0.0, 0.0, 0.0), -4.0);
    let e = Expr::parse("2 ^ 3 ^ 2").unwrap();
    assert_eq!(e.eval(0.0, 0.0, 0.0), 512.0);
    let e = Expr::compile("theta_c - 10 * sin(2 * pi * t)", &[("theta_c", 273.15)]).unwrap();
    assert!(!e.is_steady());
    assert!((e.eval(0.0, 0.0, 0.25) - 263.15).abs() < 1e-12);
    let e = Expr::parse("clamp(x, 0, 1) + step(y) + min(t, 2) + max(-1, floor(2.5))").unwrap();
    assert_eq!(e.eval(3.0, 0.0, 5.0), 1.0 + 1.0 + 2.0 + 2.0);
    assert_eq!(e.source(), "clamp(x, 0, 1) + step(y) + min(t, 2) + max(-1, floor(2.5))");

    for (bad, col) in [("1 +", 4), ("sin(x", 6), ("foo(1)", 1), ("2 * z", 5), ("min(1)", 1)] {
        match Expr::parse(bad) {
            Err(Error::Parse { line: 1, column, .. }) => assert_eq!(column, col, "{bad}"),
            other => panic!("{bad}: {other:?}"),
        }
    }
}

#[test]
fn expression_errors_point_into_the_file() {
    let src = "name = \"x\"\n\n[initial]\np = \"cos(pi * )\"\n";
    match Scenario::from_toml_str(src) {
        Err(Error::Parse { line, column, message }) => {
            assert_eq!(line, 4);
            // The closing parenthesis sits at column 15 of the line.
            assert_eq!(column, 15);
            assert!(message.starts_with("initial.p: "), "{message}");
        }
        other => panic!("{other:?}"),
    }
    let src = "[solver]\ndt = \"fast\"\n";
    assert!(matches!(Scenario::from_toml_str(src), Err(Error::Parse { line: 2, .. })));
}

#[test]
fn external_density_and_mesh_files_resolve_relative_to_the_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let table = DensityTable::new((0.0, 2.0), (-1.0, 1.0), 2, 2, vec![0.1, 0.2, 0.05, 0.0]).unwrap();
    fs::create_dir(dir.path().join("data")).unwrap();
    fs::write(dir.path().join("data/psi.txt"), table.to_text()).unwrap();
    let mesh = build_mesh(1, &[(0.0, 2.0)], &[10]).unwrap();
    fs::write(dir.path().join("data/bar.mesh"), mesh.to_text()).unwrap();
    let src = "[mesh]\nfile = \"data/bar.mesh\"\n\n[density.shape]\nkind = \"file\"\npath = \"data/psi.txt\"\n";
    let path = dir.path().join("case.toml");
    fs::write(&path, src).unwrap();

    let sc = Scenario::load(&path).unwrap();
    assert_eq!(sc.build_density().unwrap(), PreisachDensity::Table(table));
    assert_eq!(sc.build_mesh().unwrap(), mesh);

    // Without a base directory the relative path does not resolve.
    let sc = Scenario::from_toml_str(src).unwrap();
    assert!(matches!(sc.build_mesh(), Err(Error::Io(_))));
}

#[test]
fn per_marker_coefficients_and_expectations() {
    let mut sc = preset("default").unwrap();
    sc.boundary.alpha_by_marker.insert("2".into(), 0.0);
    let p = sc.build_problem().unwrap();
    assert_eq!(p.boundary.alpha, [1.0, 0.0]);
    sc.boundary.alpha_by_marker.insert("x".into(), 0.0);
    assert!(sc.build_problem().is_err());

    let mut sc = preset("default").unwrap();
    sc.initial.u = vec!["0".into(), "0".into()];
    assert!(matches!(sc.build_problem(), Err(Error::InvalidParameter(_))));
}

#[derive(Debug, Clone)]
enum Tree {
    Num(u8),
    Var(usize),
    Neg(Box<Tree>),
    Bin(char, Box<Tree>, Box<Tree>),
    Sin(Box<Tree>),
    Tanh(Box<Tree>),
}

impl Tree {
    fn render(&self) -> String {
        match self {
            Tree::Num(n) => format!("{}.{}", n / 10, n % 10),
            Tree::Var(k) => ["x", "y", "t", "pi"][*k].to_string(),
            Tree::Neg(a) => format!("-({})", a.render()),
            Tree::Bin(op, a, b) => format!("({}) {op} ({})", a.render(), b.render()),
            Tree::Sin(a) => format!("sin({})", a.render()),
            Tree::Tanh(a) => format!("tanh({})", a.render()),
        }
    }

    fn value(&self, v: [f64; 3]) -> f64 {
        match self {
            Tree::Num(n) => format!("{}.{}", n / 10, n % 10).parse().unwrap(),
            Tree::Var(3) => PI,
            Tree::Var(k) => v[*k],
            Tree::Neg(a) => -a.value(v),
            Tree::Bin(op, a, b) => {
                let (a, b) = (a.value(v), b.value(v));
                match op {
                    '+' => a + b,
                    '-' => a - b,
                    '*' => a * b,
                    _ => a / b,
                }
            }
            Tree::Sin(a) => a.value(v).sin(),
            Tree::Tanh(a) => a.value(v).tanh(),
        }
    }
}

fn tree() -> impl Strategy<Value = Tree> {
    let leaf = prop_oneof![any::<u8>().prop_map(Tree::Num), (0usize..4).prop_map(Tree::Var)];
    leaf.prop_recursive(5, 40, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|a| Tree::Neg(Box::new(a))),
            inner.clone().prop_map(|a| Tree::Sin(Box::new(a))),
            inner.clone().prop_map(|a| Tree::Tanh(Box::new(a))),
            (prop::sample::select(vec!['+', '-', '*', '/']), inner.clone(), inner)
                .prop_map(|(op, a, b)| Tree::Bin(op, Box::new(a), Box::new(b))),
        ]
    })
}

proptest! {
    #[test]
    fn expressions_evaluate_like_rust(t in tree(), v in prop::array::uniform3(-3.0f64..3.0)) {
        let e = Expr::parse(&t.render()).unwrap();
        let got = e.eval(v[0], v[1], v[2]);
        let want = t.value(v);
        prop_assert!(got.to_bits() == want.to_bits() || (got.is_nan() && want.is_nan()),
            "{} -> {got} vs {want}", t.render());
    }

    #[test]
    fn scenarios_round_trip(
        dt in 1e-5f64..1e-1,
        cells in 2usize..500,
        alpha in 0.0f64..10.0,
        seed in any::<u64>(),
        p0 in tree(),
    ) {
        let mut sc = preset("freeze_thaw").unwrap();
        sc.solver.dt = dt;
        sc.mesh.cells = vec![cells];
        sc.boundary.alpha = alpha;
        sc.solver.seed = seed;
        sc.initial.p = p0.render();
        let text = sc.to_toml_string().unwrap();
        prop_assert_eq!(Scenario::from_toml_str(&text).unwrap(), sc);
    }
}
