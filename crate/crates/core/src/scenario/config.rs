//! Scenario files.
//!
//! A scenario is one TOML document with the sections `mesh`, `materials`,
//! `density`, `boundary`, `initial`, `solver` and `output`. Every key is
//! optional; missing keys take the documented defaults, unknown keys are
//! rejected. Space- and time-dependent data are strings in the expression
//! language of [`Expr`](super::Expr), with the extra constants `theta_c` and
//! `theta_bar` taken from `materials.constants`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::expr::Expr;
use crate::constitutive::{
    validate_hypotheses, ConductivityLaw, HeatCapacityLaw, HypothesisReport, MaterialLaws,
    MobilityLaw, PhysicalConstants, RelaxationLaw, SaturationLaw,
};
use crate::discretization::{build_mesh, Mesh};
use crate::error::{Error, Result};
use crate::hysteresis::{DensityTable, PreisachDensity, RGrid};
use crate::plasticity::{ElasticTensors, YieldSurface};
use crate::solver::{
    BoundaryData, HeatSources, InitialData, Problem, RunOutput, ScalarField, SchemeFlags,
    SolverConfig,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub description: String,
    pub mesh: MeshSpec,
    pub materials: Materials,
    pub density: DensitySpec,
    pub boundary: BoundarySpec,
    pub initial: InitialSpec,
    pub solver: SolverSpec,
    pub output: OutputSpec,
    /// Directory against which relative file paths are resolved.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario {
            name: "unnamed".into(),
            description: String::new(),
            mesh: MeshSpec::default(),
            materials: Materials::default(),
            density: DensitySpec::default(),
            boundary: BoundarySpec::default(),
            initial: InitialSpec::default(),
            solver: SolverSpec::default(),
            output: OutputSpec::default(),
            base_dir: None,
        }
    }
}

/// Structured mesh (`dim`, `extent`, `cells`) or a mesh `file`.
///
/// Structured markers: in 1D left = 1, right = 2; in 2D bottom = 1,
/// right = 2, top = 3, left = 4.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeshSpec {
    pub dim: usize,
    pub extent: Vec<[f64; 2]>,
    pub cells: Vec<usize>,
    pub file: Option<String>,
}

impl Default for MeshSpec {
    fn default() -> Self {
        MeshSpec {
            dim: 1,
            extent: vec![[0.0, 1.0]],
            cells: vec![199],
            file: None,
        }
    }
}

/// Material laws apart from the Preisach density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Materials {
    pub saturation: SaturationLaw,
    pub mobility: MobilityLaw,
    pub heat_capacity: HeatCapacityLaw,
    pub conductivity: ConductivityLaw,
    pub relaxation: RelaxationLaw,
    pub constants: PhysicalConstants,
    pub tensors: ElasticTensors,
    pub yield_surface: YieldSurface,
}

impl Default for Materials {
    fn default() -> Self {
        let l = MaterialLaws::default();
        Materials {
            saturation: l.saturation,
            mobility: l.mobility,
            heat_capacity: l.heat_capacity,
            conductivity: l.conductivity,
            relaxation: l.relaxation,
            constants: l.constants,
            tensors: l.tensors,
            yield_surface: l.yield_surface,
        }
    }
}

/// Preisach density and the number of memory levels used to discretize it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DensitySpec {
    pub levels: usize,
    pub shape: DensityShape,
}

impl Default for DensitySpec {
    fn default() -> Self {
        DensitySpec {
            levels: 64,
            shape: DensityShape::default(),
        }
    }
}

fn box_value() -> f64 {
    0.2
}
fn unit_r() -> [f64; 2] {
    [0.0, 1.0]
}
fn unit_v() -> [f64; 2] {
    [-1.0, 1.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DensityShape {
    /// Constant `value` on `r_range x v_range`.
    Box {
        #[serde(default = "box_value")]
        value: f64,
        #[serde(default = "unit_r")]
        r_range: [f64; 2],
        #[serde(default = "unit_v")]
        v_range: [f64; 2],
    },
    /// Inline piecewise-constant table, row-major in `r`.
    Table {
        r_range: [f64; 2],
        v_range: [f64; 2],
        nr: usize,
        nv: usize,
        values: Vec<f64>,
    },
    SeparableExp {
        amplitude: f64,
        r_scale: f64,
        v_scale: f64,
    },
    /// No hysteresis.
    Zero,
    /// Table in the density text format, see [`DensityTable::from_text`].
    File { path: String },
}

impl Default for DensityShape {
    fn default() -> Self {
        DensityShape::Box {
            value: box_value(),
            r_range: unit_r(),
            v_range: unit_v(),
        }
    }
}

/// Robin coefficients, outer data and displacement constraints.
///
/// `alpha` and `omega` apply to every boundary facet unless overridden per
/// marker, e.g. `alpha_by_marker = { "2" = 0.0 }`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundarySpec {
    pub alpha: f64,
    pub omega: f64,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub alpha_by_marker: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub omega_by_marker: BTreeMap<String, f64>,
    pub p_star: String,
    pub theta_star: String,
    /// Markers with `u = 0`.
    pub dirichlet: Vec<u32>,
    pub gravity: [f64; 2],
}

impl Default for BoundarySpec {
    fn default() -> Self {
        BoundarySpec {
            alpha: 1.0,
            omega: 100.0,
            alpha_by_marker: BTreeMap::new(),
            omega_by_marker: BTreeMap::new(),
            p_star: "0".into(),
            theta_star: "theta_c".into(),
            dirichlet: vec![1],
            gravity: [0.0, 0.0],
        }
    }
}

/// Initial fields; `u` has one expression per space dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialSpec {
    pub p: String,
    pub theta: String,
    pub chi: String,
    pub u: Vec<String>,
}

impl Default for InitialSpec {
    fn default() -> Self {
        InitialSpec {
            p: "0".into(),
            theta: "theta_c".into(),
            chi: "1".into(),
            u: vec!["0".into()],
        }
    }
}

/// Numerical parameters; see [`SolverConfig`] for their meaning.
/// A missing `cutoff_r` means no cut-off.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSpec {
    pub dt: f64,
    pub t_end: f64,
    pub cutoff_r: Option<f64>,
    pub eta: f64,
    pub spectral_modes: Option<usize>,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub max_halvings: usize,
    pub sweeps: usize,
    pub heat_supply: f64,
    pub floor_rate: f64,
    pub initial_noise: f64,
    pub seed: u64,
    pub flags: SchemeFlags,
    pub heat_sources: HeatSources,
}

impl Default for SolverSpec {
    fn default() -> Self {
        let c = SolverConfig::default();
        SolverSpec {
            dt: c.dt,
            t_end: c.t_end,
            cutoff_r: None,
            eta: c.eta,
            spectral_modes: c.spectral_modes,
            tolerance: c.tolerance,
            max_iterations: c.max_iterations,
            max_halvings: c.max_halvings,
            sweeps: c.sweeps,
            heat_supply: c.heat_supply,
            floor_rate: c.floor_rate,
            initial_noise: c.initial_noise,
            seed: c.seed,
            flags: c.flags,
            heat_sources: c.heat_sources,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    /// Snapshot cadence in steps; 0 keeps only the initial and final fields.
    pub snapshot_every: usize,
    /// Node of the hysteresis probe; the middle node when absent.
    pub probe_node: Option<usize>,
    pub expect: Expectations,
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec {
            snapshot_every: 100,
            probe_node: None,
            expect: Expectations::default(),
        }
    }
}

/// Qualitative targets a scenario documents for itself.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Expectations {
    /// `min chi` must drop below this value at some step.
    pub chi_dip_below: Option<f64>,
    /// After the dip, `min chi` must climb back above this value.
    pub chi_return_above: Option<f64>,
}

/// One checked expectation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpectationResult {
    pub name: String,
    pub threshold: f64,
    pub observed: f64,
    pub passed: bool,
}

impl Expectations {
    pub fn check(&self, out: &RunOutput) -> Vec<ExpectationResult> {
        let mut res = Vec::new();
        let dip = out
            .reports
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.chi_min.total_cmp(&b.1.chi_min));
        let (dip_step, dip_value) = dip.map_or((0, f64::NAN), |(k, r)| (k, r.chi_min));
        if let Some(th) = self.chi_dip_below {
            res.push(ExpectationResult {
                name: "chi_dip_below".into(),
                threshold: th,
                observed: dip_value,
                passed: dip_value < th,
            });
        }
        if let Some(th) = self.chi_return_above {
            let after = out.reports[dip_step.min(out.reports.len())..]
                .iter()
                .map(|r| r.chi_min)
                .fold(f64::NAN, f64::max);
            res.push(ExpectationResult {
                name: "chi_return_above".into(),
                threshold: th,
                observed: after,
                passed: after > th,
            });
        }
        res
    }
}

fn line_col(src: &str, offset: usize) -> (usize, usize) {
    let before = &src[..offset.min(src.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, col)
}

impl Scenario {
    /// Parses a scenario and compiles its expressions.
    pub fn from_toml_str(src: &str) -> Result<Self> {
        let sc: Scenario = toml::from_str(src).map_err(|e| {
            let (line, column) = e.span().map_or((1, 1), |s| line_col(src, s.start));
            Error::Parse {
                line,
                column,
                message: e.message().trim().to_string(),
            }
        })?;
        for (key, text) in sc.expressions() {
            if let Err(Error::Parse { column, message, .. }) = Expr::compile(text, &sc.constants()) {
                let (line, col) = match src.find(text) {
                    Some(off) => {
                        let (l, c) = line_col(src, off);
                        (l, c + column - 1)
                    }
                    None => (1, 1),
                };
                return Err(Error::Parse {
                    line,
                    column: col,
                    message: format!("{key}: {message}"),
                });
            }
        }
        Ok(sc)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Internal(format!("cannot serialize scenario: {e}")))
    }

    /// Reads a scenario file; relative paths inside resolve against its directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let mut sc = Scenario::from_toml_str(&text)?;
        sc.base_dir = path.parent().map(Path::to_path_buf);
        Ok(sc)
    }

    fn resolve(&self, rel: &str) -> PathBuf {
        match &self.base_dir {
            Some(d) if Path::new(rel).is_relative() => d.join(rel),
            _ => PathBuf::from(rel),
        }
    }

    fn constants(&self) -> [(&'static str, f64); 2] {
        let c = &self.materials.constants;
        [("theta_c", c.theta_c), ("theta_bar", c.theta_bar)]
    }

    fn expressions(&self) -> Vec<(String, &str)> {
        let mut v = vec![
            ("boundary.p_star".to_string(), self.boundary.p_star.as_str()),
            ("boundary.theta_star".to_string(), self.boundary.theta_star.as_str()),
            ("initial.p".to_string(), self.initial.p.as_str()),
            ("initial.theta".to_string(), self.initial.theta.as_str()),
            ("initial.chi".to_string(), self.initial.chi.as_str()),
        ];
        for (k, u) in self.initial.u.iter().enumerate() {
            v.push((format!("initial.u[{k}]"), u.as_str()));
        }
        v
    }

    fn field(&self, text: &str) -> Result<ScalarField> {
        let e = Arc::new(Expr::compile(text, &self.constants())?);
        Ok(ScalarField::new(move |x, t| e.eval(x[0], x[1], t)))
    }

    pub fn build_mesh(&self) -> Result<Mesh> {
        if let Some(f) = &self.mesh.file {
            let path = self.resolve(f);
            let text = std::fs::read_to_string(&path)?;
            return Mesh::from_text(&text);
        }
        let extents: Vec<(f64, f64)> = self.mesh.extent.iter().map(|e| (e[0], e[1])).collect();
        build_mesh(self.mesh.dim, &extents, &self.mesh.cells)
    }

    pub fn build_density(&self) -> Result<PreisachDensity> {
        Ok(match &self.density.shape {
            DensityShape::Box {
                value,
                r_range,
                v_range,
            } => PreisachDensity::Table(DensityTable::uniform(
                *value,
                (r_range[0], r_range[1]),
                (v_range[0], v_range[1]),
            )?),
            DensityShape::Table {
                r_range,
                v_range,
                nr,
                nv,
                values,
            } => PreisachDensity::Table(DensityTable::new(
                (r_range[0], r_range[1]),
                (v_range[0], v_range[1]),
                *nr,
                *nv,
                values.clone(),
            )?),
            DensityShape::SeparableExp {
                amplitude,
                r_scale,
                v_scale,
            } => PreisachDensity::separable_exp(*amplitude, *r_scale, *v_scale)?,
            DensityShape::Zero => PreisachDensity::zero(),
            DensityShape::File { path } => {
                let text = std::fs::read_to_string(self.resolve(path))?;
                PreisachDensity::Table(DensityTable::from_text(&text)?)
            }
        })
    }

    pub fn laws(&self) -> Result<MaterialLaws> {
        let m = &self.materials;
        Ok(MaterialLaws {
            saturation: m.saturation,
            mobility: m.mobility,
            heat_capacity: m.heat_capacity,
            conductivity: m.conductivity,
            relaxation: m.relaxation,
            constants: m.constants,
            tensors: m.tensors,
            yield_surface: m.yield_surface,
            density: self.build_density()?,
        })
    }

    pub fn build_problem(&self) -> Result<Problem> {
        let mesh = self.build_mesh()?;
        let laws = self.laws()?;
        let grid = RGrid::for_density(&laws.density, self.density.levels)?;
        let b = &self.boundary;
        let per_facet = |default: f64, map: &BTreeMap<String, f64>, what: &str| -> Result<Vec<f64>> {
            let mut by_marker = BTreeMap::new();
            for (k, v) in map {
                let m: u32 = k.trim().parse().map_err(|_| {
                    Error::InvalidParameter(format!("boundary.{what}_by_marker: '{k}' is not a marker number"))
                })?;
                by_marker.insert(m, *v);
            }
            Ok(mesh
                .facets()
                .iter()
                .map(|f| by_marker.get(&f.marker).copied().unwrap_or(default))
                .collect())
        };
        let alpha = per_facet(b.alpha, &b.alpha_by_marker, "alpha")?;
        let omega = per_facet(b.omega, &b.omega_by_marker, "omega")?;
        if self.initial.u.len() != mesh.dim() {
            return Err(Error::InvalidParameter(format!(
                "initial.u needs {} expression(s), got {}",
                mesh.dim(),
                self.initial.u.len()
            )));
        }
        let problem = Problem {
            boundary: BoundaryData {
                alpha,
                omega,
                p_star: self.field(&b.p_star)?,
                theta_star: self.field(&b.theta_star)?,
                dirichlet: b.dirichlet.clone(),
            },
            initial: InitialData {
                p: self.field(&self.initial.p)?,
                theta: self.field(&self.initial.theta)?,
                chi: self.field(&self.initial.chi)?,
                u: self.initial.u.iter().map(|u| self.field(u)).collect::<Result<_>>()?,
            },
            gravity: b.gravity,
            mesh,
            laws,
            grid,
        };
        problem.check()?;
        Ok(problem)
    }

    pub fn solver_config(&self) -> SolverConfig {
        let s = &self.solver;
        SolverConfig {
            dt: s.dt,
            t_end: s.t_end,
            cutoff_r: s.cutoff_r.unwrap_or(f64::INFINITY),
            eta: s.eta,
            spectral_modes: s.spectral_modes,
            tolerance: s.tolerance,
            max_iterations: s.max_iterations,
            max_halvings: s.max_halvings,
            sweeps: s.sweeps,
            flags: s.flags,
            heat_sources: s.heat_sources,
            heat_supply: s.heat_supply,
            floor_rate: s.floor_rate,
            initial_noise: s.initial_noise,
            seed: s.seed,
            probe_node: self.output.probe_node,
        }
    }

    /// Checks the hypotheses on the laws and on the sampled data.
    pub fn validate(&self) -> Result<HypothesisReport> {
        let problem = self.build_problem()?;
        let samples = problem.data_samples(self.solver.t_end);
        Ok(validate_hypotheses(&problem.laws, Some(&samples)))
    }
}
