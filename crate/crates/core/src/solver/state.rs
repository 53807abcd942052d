//! Simulation state and the mesh-dependent operators shared by the sub-steps.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::problem::{Problem, SolverConfig};
use crate::constitutive::CutoffPack;
use crate::discretization::{
    assemble_elasticity, body_load, boundary_weights, cell_strain, elasticity_matrix, lumped_mass,
    nodal_divergence, stiffness, BandMatrix, ElasticForms, SpectralBasis1D,
};
use crate::error::{invalid_param, Error, Result};
use crate::hysteresis::{preisach_values, PlayBank};
use crate::plasticity::PlasticPoint;

/// Operators that depend only on the mesh and the coefficients.
#[derive(Debug, Clone)]
pub struct Forms {
    /// Lumped nodal masses `m_i`.
    pub lumped: Vec<f64>,
    /// Laplacian with unit coefficient.
    pub stiffness: BandMatrix,
    /// Lumped boundary weights of `alpha`.
    pub alpha: Vec<f64>,
    /// Lumped boundary weights of `omega`.
    pub omega: Vec<f64>,
    /// Viscosity operator (unconstrained).
    pub viscous: BandMatrix,
    /// Hardening operator (unconstrained).
    pub hardening: BandMatrix,
    /// Elasticity operator of `Ae` (unconstrained).
    pub elastic: BandMatrix,
    /// Dirichlet data and the coercivity check.
    pub constraints: ElasticForms,
    pub gravity: Vec<f64>,
    pub spectral: Option<SpectralBasis1D>,
}

impl Forms {
    pub fn new(problem: &Problem, config: &SolverConfig) -> Result<Self> {
        let mesh = &problem.mesh;
        let t = &problem.laws.tensors;
        let constraints = assemble_elasticity(mesh, &t.b, &problem.boundary.dirichlet)?;
        let spectral = match config.spectral_modes {
            Some(n) => Some(SpectralBasis1D::new(mesh, n)?),
            None => None,
        };
        Ok(Forms {
            lumped: lumped_mass(mesh),
            stiffness: stiffness(mesh, &vec![1.0; mesh.num_cells()])?,
            alpha: boundary_weights(mesh, &problem.boundary.alpha),
            omega: boundary_weights(mesh, &problem.boundary.omega),
            viscous: elasticity_matrix(mesh, &t.b),
            hardening: elasticity_matrix(mesh, &t.ah),
            elastic: elasticity_matrix(mesh, &t.ae),
            constraints,
            gravity: body_load(mesh, &problem.gravity),
            spectral,
        })
    }
}

/// Cumulative dissipated energy per channel.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DissipationTotals {
    pub viscous: f64,
    pub plastic: f64,
    pub preisach: f64,
    pub phase: f64,
    pub diffusion: f64,
}

impl DissipationTotals {
    pub fn add(&mut self, other: &DissipationTotals) {
        self.viscous += other.viscous;
        self.plastic += other.plastic;
        self.preisach += other.preisach;
        self.phase += other.phase;
        self.diffusion += other.diffusion;
    }

    pub fn min_channel(&self) -> f64 {
        self.viscous
            .min(self.plastic)
            .min(self.preisach)
            .min(self.phase)
            .min(self.diffusion)
    }
}

/// Complete discrete state at one time level.
#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub t: f64,
    pub p: Vec<f64>,
    pub theta: Vec<f64>,
    pub chi: Vec<f64>,
    /// Displacement, components interleaved per node.
    pub u: Vec<f64>,
    /// Nodal divergence of `u`.
    pub div: Vec<f64>,
    /// Stored water `(chi + rho* (1 - chi)) (f_R(p) + G0[p] + div u)` per node.
    pub water: Vec<f64>,
    pub banks: Vec<PlayBank>,
    /// `G0` of each bank.
    pub g0: Vec<f64>,
    /// `U0` of each bank.
    pub u0: Vec<f64>,
    /// One plastic point per cell.
    pub points: Vec<PlasticPoint>,
    /// Coefficients of `v = M_R(p)` in the cosine basis (spectral mode).
    pub coefficients: Option<Vec<f64>>,
    pub dissipation: DissipationTotals,
}

impl SimState {
    /// Samples the initial data and initializes banks and plastic points.
    pub fn initial(problem: &Problem, config: &SolverConfig, forms: &Forms) -> Result<Self> {
        let mesh = &problem.mesh;
        let laws = &problem.laws;
        let cut = CutoffPack::new(laws, config.cutoff_r)?;
        let dim = mesh.dim();
        let n = mesh.num_nodes();
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut p = Vec::with_capacity(n);
        let mut theta = Vec::with_capacity(n);
        let mut chi = Vec::with_capacity(n);
        let mut u = vec![0.0; dim * n];
        for (i, x) in mesh.nodes().iter().enumerate() {
            let mut pi = problem.initial.p.eval(*x, 0.0);
            if config.initial_noise > 0.0 {
                pi += config.initial_noise * rng.random_range(-1.0..1.0);
            }
            p.push(pi);
            let th = problem.initial.theta.eval(*x, 0.0);
            let c = problem.initial.chi.eval(*x, 0.0);
            if !(th > 0.0 && th.is_finite()) {
                return Err(invalid_param(format!("initial temperature must be positive, got {th} at node {i}")));
            }
            if !(0.0..=1.0).contains(&c) {
                return Err(invalid_param(format!("initial liquid fraction must lie in [0, 1], got {c} at node {i}")));
            }
            theta.push(th);
            chi.push(c);
            for comp in 0..dim {
                u[dim * i + comp] = problem.initial.u[comp].eval(*x, 0.0);
            }
        }
        if p.iter().chain(&u).any(|v| !v.is_finite()) {
            return Err(invalid_param("initial data must be finite"));
        }
        forms.constraints.zero_fixed(&mut u);

        let coefficients = match &forms.spectral {
            Some(basis) => {
                let v: Vec<f64> = p.iter().map(|x| cut.m(*x)).collect();
                let c = basis.project(&v);
                let vs = basis.synthesize(&c);
                p = vs.iter().map(|v| cut.m_inverse(*v)).collect::<Result<_>>()?;
                Some(c)
            }
            None => None,
        };

        let banks: Vec<PlayBank> = p.iter().map(|x| PlayBank::init(*x, &problem.grid)).collect();
        let points = (0..mesh.num_cells())
            .map(|k| PlasticPoint::new(cell_strain(mesh, k, &u), &laws.tensors, &laws.yield_surface))
            .collect();
        let div = nodal_divergence(mesh, &forms.lumped, &u);
        let mut water = Vec::with_capacity(n);
        let mut g0 = Vec::with_capacity(n);
        let mut u0 = Vec::with_capacity(n);
        for i in 0..n {
            let (g, u) = preisach_values(&banks[i], &laws.density, &problem.grid)?;
            water.push(laws.constants.mix(chi[i]) * (cut.f(p[i]) + g + div[i]));
            g0.push(g);
            u0.push(u);
        }
        Ok(SimState {
            t: 0.0,
            p,
            theta,
            chi,
            u,
            div,
            water,
            banks,
            g0,
            u0,
            points,
            coefficients,
            dissipation: DissipationTotals::default(),
        })
    }

    /// Checks the state invariants that must hold exactly.
    pub fn check_invariants(&self, problem: &Problem) -> Result<()> {
        if let Some(i) = self.chi.iter().position(|c| !(0.0..=1.0).contains(c)) {
            return Err(Error::InvalidState(format!("chi = {} at node {i}", self.chi[i])));
        }
        if let Some(i) = self.theta.iter().position(|t| !(*t > 0.0)) {
            return Err(Error::PositivityViolation(format!("theta = {} at node {i}", self.theta[i])));
        }
        for (i, b) in self.banks.iter().enumerate() {
            if b.band_excess(&problem.grid) > 1e-12 * (1.0 + b.last_input.abs()) {
                return Err(Error::InvalidState(format!("play band violated at node {i}")));
            }
        }
        let z = &problem.laws.yield_surface;
        for (k, pt) in self.points.iter().enumerate() {
            if z.excess(&pt.sigma_p) > 1e-12 {
                return Err(Error::InvalidState(format!("plastic stress leaves the yield set in cell {k}")));
            }
        }
        Ok(())
    }
}
