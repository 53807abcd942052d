//! Problem data and solver configuration.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::constitutive::{DataSamples, MaterialLaws};
use crate::discretization::{boundary_weights, Mesh};
use crate::error::{invalid_param, Result};
use crate::hysteresis::RGrid;

/// Scalar field of position and time.
#[derive(Clone)]
pub struct ScalarField(pub Arc<dyn Fn([f64; 2], f64) -> f64 + Send + Sync>);

impl ScalarField {
    pub fn new(f: impl Fn([f64; 2], f64) -> f64 + Send + Sync + 'static) -> Self {
        ScalarField(Arc::new(f))
    }

    pub fn constant(c: f64) -> Self {
        ScalarField::new(move |_, _| c)
    }

    #[inline]
    pub fn eval(&self, x: [f64; 2], t: f64) -> f64 {
        (self.0)(x, t)
    }
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("ScalarField")
    }
}

/// Boundary coefficients and outer data.
#[derive(Debug, Clone)]
pub struct BoundaryData {
    /// Permeability per boundary facet.
    pub alpha: Vec<f64>,
    /// Heat transfer coefficient per boundary facet.
    pub omega: Vec<f64>,
    pub p_star: ScalarField,
    pub theta_star: ScalarField,
    /// Facet markers on which `u = 0`.
    pub dirichlet: Vec<u32>,
}

/// Initial fields; displacement components are given per dimension.
#[derive(Debug, Clone)]
pub struct InitialData {
    pub p: ScalarField,
    pub theta: ScalarField,
    pub chi: ScalarField,
    pub u: Vec<ScalarField>,
}

/// Everything that defines a simulation apart from the numerics.
#[derive(Debug, Clone)]
pub struct Problem {
    pub mesh: Mesh,
    pub laws: MaterialLaws,
    pub grid: RGrid,
    pub boundary: BoundaryData,
    pub initial: InitialData,
    /// Constant volume force.
    pub gravity: [f64; 2],
}

impl Problem {
    pub fn check(&self) -> Result<()> {
        let nf = self.mesh.facets().len();
        if self.boundary.alpha.len() != nf || self.boundary.omega.len() != nf {
            return Err(invalid_param("alpha and omega need one value per boundary facet"));
        }
        if self.initial.u.len() != self.mesh.dim() {
            return Err(invalid_param("initial displacement needs one component per dimension"));
        }
        self.laws.constants.validate()?;
        self.laws.yield_surface.validate()?;
        self.laws.tensors.ae_scalar()?;
        Ok(())
    }

    /// Extrema of the data sampled on nodes and boundary nodes up to `t_end`.
    pub fn data_samples(&self, t_end: f64) -> DataSamples {
        let m = &self.mesh;
        let a = boundary_weights(m, &self.boundary.alpha);
        let w = boundary_weights(m, &self.boundary.omega);
        let on_boundary = m.marked_nodes(&m.markers());
        let times: Vec<f64> = (0..=64).map(|k| t_end * k as f64 / 64.0).collect();
        let mut p_star_max: f64 = 0.0;
        let mut theta_star_min = f64::INFINITY;
        for (i, x) in m.nodes().iter().enumerate() {
            if !on_boundary[i] {
                continue;
            }
            for &t in &times {
                p_star_max = p_star_max.max(self.boundary.p_star.eval(*x, t).abs());
                theta_star_min = theta_star_min.min(self.boundary.theta_star.eval(*x, t));
            }
        }
        let mut s = DataSamples {
            gravity: self.gravity.to_vec(),
            alpha_min: self.boundary.alpha.iter().cloned().fold(f64::INFINITY, f64::min),
            alpha_total: a.iter().sum(),
            omega_min: self.boundary.omega.iter().cloned().fold(f64::INFINITY, f64::min),
            omega_total: w.iter().sum(),
            p_star_max_abs: p_star_max,
            theta_star_min,
            p0_max_abs: 0.0,
            theta0_min: f64::INFINITY,
            chi0_min: f64::INFINITY,
            chi0_max: f64::NEG_INFINITY,
        };
        for x in m.nodes() {
            s.p0_max_abs = s.p0_max_abs.max(self.initial.p.eval(*x, 0.0).abs());
            s.theta0_min = s.theta0_min.min(self.initial.theta.eval(*x, 0.0));
            let c = self.initial.chi.eval(*x, 0.0);
            s.chi0_min = s.chi0_min.min(c);
            s.chi0_max = s.chi0_max.max(c);
        }
        s
    }
}

/// Switches for the four sub-steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SchemeFlags {
    pub phase: bool,
    pub pressure: bool,
    pub momentum: bool,
    pub temperature: bool,
}

impl Default for SchemeFlags {
    fn default() -> Self {
        SchemeFlags {
            phase: true,
            pressure: true,
            momentum: true,
            temperature: true,
        }
    }
}

/// Switches for the individual heat sources.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HeatSources {
    pub viscous: bool,
    pub plastic: bool,
    pub diffusion: bool,
    pub preisach: bool,
    pub phase: bool,
}

impl Default for HeatSources {
    fn default() -> Self {
        HeatSources {
            viscous: true,
            plastic: true,
            diffusion: true,
            preisach: true,
            phase: true,
        }
    }
}

/// Numerical parameters of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub dt: f64,
    pub t_end: f64,
    /// Cut-off level; infinite disables the cut-off.
    pub cutoff_r: f64,
    /// Fourth-order regularization, spectral mode only.
    pub eta: f64,
    /// Number of cosine modes for the pressure; `None` selects finite elements.
    pub spectral_modes: Option<usize>,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub max_halvings: usize,
    /// Maximal number of splitting sweeps per step (1 = plain splitting).
    pub sweeps: usize,
    pub flags: SchemeFlags,
    pub heat_sources: HeatSources,
    /// Additional uniform volumetric heat supply.
    pub heat_supply: f64,
    /// Slope of the dt-proportional tolerance of the temperature floor check.
    pub floor_rate: f64,
    /// Amplitude of seeded perturbations of the initial pressure.
    pub initial_noise: f64,
    pub seed: u64,
    /// Node at which the hysteresis probe is recorded.
    pub probe_node: Option<usize>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            dt: 1e-3,
            t_end: 1.0,
            cutoff_r: f64::INFINITY,
            eta: 0.0,
            spectral_modes: None,
            tolerance: 1e-10,
            max_iterations: 50,
            max_halvings: 5,
            sweeps: 1,
            flags: SchemeFlags::default(),
            heat_sources: HeatSources::default(),
            heat_supply: 0.0,
            floor_rate: 1.0,
            initial_noise: 0.0,
            seed: 0,
            probe_node: None,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(invalid_param(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(invalid_param("t_end must be finite and nonnegative"));
        }
        if !(self.cutoff_r > 1.0) {
            return Err(invalid_param(format!("cut-off level must exceed 1, got {}", self.cutoff_r)));
        }
        if !(0.0..1.0).contains(&self.eta) {
            return Err(invalid_param(format!("eta must lie in [0, 1), got {}", self.eta)));
        }
        if self.eta > 0.0 && self.spectral_modes.is_none() {
            return Err(invalid_param("eta > 0 requires the spectral pressure mode"));
        }
        if !(self.tolerance > 0.0) || self.max_iterations == 0 || self.sweeps == 0 {
            return Err(invalid_param("tolerance, iteration and sweep limits must be positive"));
        }
        Ok(())
    }

    /// Number of steps of size `dt` covering `[0, t_end]`.
    pub fn num_steps(&self) -> usize {
        (self.t_end / self.dt - 1e-9).ceil().max(0.0) as usize
    }
}
