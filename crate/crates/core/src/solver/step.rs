//! One time step: phase, pressure, momentum, temperature, then bookkeeping.

use super::diagnostics::{cutoff_monitor, gravity_work, internal_energy, CutoffReport, LedgerEntry, ThetaFloor};
use super::momentum::{momentum_operator, step_momentum, MomentumOutcome};
use super::phase::{step_phase, Coupling, PhaseOutcome};
use super::pressure::{step_pressure, PressureOutcome};
use super::problem::{Problem, SolverConfig};
use super::state::{DissipationTotals, Forms, SimState};
use super::temperature::{step_temperature, HeatInput};
use crate::constitutive::CutoffPack;
use crate::discretization::BandLu;
use crate::error::{Error, Result};
use crate::hysteresis::HysteresisIncrement;

/// Iteration counts summed over sub-steps and sweeps.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IterationCounts {
    pub pressure: usize,
    pub momentum: usize,
    pub temperature: usize,
    pub sweeps: usize,
}

impl IterationCounts {
    fn add(&mut self, o: &IterationCounts) {
        self.pressure += o.pressure;
        self.momentum += o.momentum;
        self.temperature += o.temperature;
        self.sweeps += o.sweeps;
    }
}

/// Largest relative residuals of the nonlinear solves.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Residuals {
    pub pressure: f64,
    pub momentum: f64,
    pub temperature: f64,
}

impl Residuals {
    fn max_with(&mut self, o: &Residuals) {
        self.pressure = self.pressure.max(o.pressure);
        self.momentum = self.momentum.max(o.momentum);
        self.temperature = self.temperature.max(o.temperature);
    }
}

/// Diagnostics of one completed time step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    pub step: usize,
    pub t: f64,
    pub dt: f64,
    /// Number of sub-steps actually taken (1 without halving).
    pub substeps: usize,
    pub iterations: IterationCounts,
    pub residuals: Residuals,
    pub p_min: f64,
    pub p_max: f64,
    pub theta_min: f64,
    pub theta_max: f64,
    pub chi_min: f64,
    pub chi_max: f64,
    /// Mass-weighted mean liquid fraction.
    pub chi_mean: f64,
    pub max_chi_rate: f64,
    /// A priori bound `max |F| / gamma_flat` on the liquid fraction rate.
    pub chi_rate_bound: f64,
    /// Whether `|chi_t| <= |F| / gamma` held node by node.
    pub chi_rate_ok: bool,
    /// Energy dissipated during this step, per channel.
    pub dissipation: DissipationTotals,
    pub cumulative: DissipationTotals,
    pub ledger: LedgerEntry,
    /// Floor value `phi(t)`.
    pub floor: f64,
    /// Allowed undershoot `floor_rate * dt`.
    pub floor_tolerance: f64,
    pub cutoff: CutoffReport,
    /// Largest `|work - dU0 - |dD0||` over nodes.
    pub preisach_residual: f64,
    /// Smallest `p' dG0 - dU0 - |dD0|` over nodes.
    pub preisach_endpoint_excess: f64,
    /// Largest distance of a plastic stress from the yield set.
    pub plastic_excess: f64,
    pub probe_p: f64,
    pub probe_g: f64,
    pub probe_chi: f64,
}

impl StepReport {
    /// `max(0, phi(t) - min theta)`.
    pub fn floor_violation(&self) -> f64 {
        (self.floor - self.theta_min).max(0.0)
    }

    pub fn dissipation_nonnegative(&self) -> bool {
        self.dissipation.min_channel() >= 0.0
    }
}

struct SubStep {
    state: SimState,
    iterations: IterationCounts,
    residuals: Residuals,
    max_chi_rate: f64,
    chi_rate_bound: f64,
    chi_rate_ok: bool,
    dissipation: DissipationTotals,
    boundary: f64,
    cut_waste: f64,
    supply: f64,
    preisach_residual: f64,
    preisach_endpoint_excess: f64,
}

/// A running simulation: problem, numerics, current state and ledger.
pub struct Simulation {
    problem: Problem,
    config: SolverConfig,
    forms: Forms,
    state: SimState,
    floor: ThetaFloor,
    operators: Vec<(f64, BandLu)>,
    ledger: LedgerEntry,
    steps: usize,
}

impl Simulation {
    pub fn new(problem: Problem, config: SolverConfig) -> Result<Self> {
        problem.check()?;
        config.validate()?;
        let forms = Forms::new(&problem, &config)?;
        let state = SimState::initial(&problem, &config, &forms)?;
        let floor = ThetaFloor::new(&problem.laws, config.t_end.max(config.dt));
        let mut sim = Simulation {
            problem,
            config,
            forms,
            state,
            floor,
            operators: Vec::new(),
            ledger: LedgerEntry::default(),
            steps: 0,
        };
        let cut = sim.cut();
        sim.ledger.internal = internal_energy(&sim.problem, &cut, &sim.forms, &sim.state)?;
        sim.ledger.gravity_work = gravity_work(&sim.forms, &sim.state.u);
        Ok(sim)
    }

    fn cut(&self) -> CutoffPack<'_> {
        CutoffPack {
            laws: &self.problem.laws,
            r: self.config.cutoff_r,
        }
    }

    pub fn problem(&self) -> &Problem {
        &self.problem
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn forms(&self) -> &Forms {
        &self.forms
    }

    pub fn state(&self) -> &SimState {
        &self.state
    }

    pub fn floor(&self) -> &ThetaFloor {
        &self.floor
    }

    pub fn ledger(&self) -> &LedgerEntry {
        &self.ledger
    }

    pub fn steps_taken(&self) -> usize {
        self.steps
    }

    pub fn probe_node(&self) -> usize {
        self.config
            .probe_node
            .unwrap_or(self.problem.mesh.num_nodes() / 2)
            .min(self.problem.mesh.num_nodes() - 1)
    }

    fn operator(&mut self, dt: f64) -> Result<usize> {
        if let Some(k) = self.operators.iter().position(|(d, _)| *d == dt) {
            return Ok(k);
        }
        let lu = momentum_operator(&self.forms, dt)?;
        self.operators.push((dt, lu));
        Ok(self.operators.len() - 1)
    }

    /// Advances by the configured `dt` (the last step is shortened to hit `t_end`).
    pub fn step(&mut self) -> Result<StepReport> {
        let remaining = self.config.t_end - self.state.t;
        let dt = if remaining > 0.0 && remaining < self.config.dt * (1.0 - 1e-9) {
            remaining
        } else {
            self.config.dt
        };
        self.step_by(dt)
    }

    /// Advances by `dt`, halving on recoverable failures.
    pub fn step_by(&mut self, dt: f64) -> Result<StepReport> {
        let start = self.state.clone();
        let e_start = self.ledger.internal;
        let mut subs = Vec::new();
        self.advance(start.clone(), dt, 0, &mut subs)?;

        let mut iterations = IterationCounts::default();
        let mut residuals = Residuals::default();
        let mut dissipation = DissipationTotals::default();
        let (mut max_rate, mut bound, mut rate_ok) = (0.0_f64, 0.0_f64, true);
        let (mut boundary, mut cut_waste, mut supply) = (0.0, 0.0, 0.0);
        let (mut pres_res, mut pres_excess) = (0.0_f64, f64::INFINITY);
        for s in &subs {
            iterations.add(&s.iterations);
            residuals.max_with(&s.residuals);
            dissipation.add(&s.dissipation);
            max_rate = max_rate.max(s.max_chi_rate);
            bound = bound.max(s.chi_rate_bound);
            rate_ok &= s.chi_rate_ok;
            boundary += s.boundary;
            cut_waste += s.cut_waste;
            supply += s.supply;
            pres_res = pres_res.max(s.preisach_residual);
            pres_excess = pres_excess.min(s.preisach_endpoint_excess);
        }
        let new_state = subs.pop().map(|s| s.state).unwrap_or(start);
        let cut = self.cut();
        let internal = internal_energy(&self.problem, &cut, &self.forms, &new_state)?;
        let g_new = gravity_work(&self.forms, &new_state.u);
        let defect = internal - e_start + boundary + cut_waste - (g_new - self.ledger.gravity_work) - supply;
        let ledger = LedgerEntry {
            internal,
            boundary_work: self.ledger.boundary_work + boundary,
            gravity_work: g_new,
            cut_waste,
            defect,
            global_defect: self.ledger.global_defect + defect.abs(),
        };

        let probe = self.probe_node();
        let laws = &self.problem.laws;
        let probe_p = new_state.p[probe];
        let probe_g = cut.f(probe_p) + new_state.g0[probe];
        let z = &laws.yield_surface;
        let plastic_excess = new_state
            .points
            .iter()
            .map(|pt| z.excess(&pt.sigma_p))
            .fold(0.0_f64, f64::max);
        let (p_min, p_max) = extrema(&new_state.p);
        let (theta_min, theta_max) = extrema(&new_state.theta);
        let (chi_min, chi_max) = extrema(&new_state.chi);
        let cutoff = cutoff_monitor(&self.problem, &new_state, self.config.cutoff_r);

        self.steps += 1;
        let report = StepReport {
            step: self.steps,
            t: new_state.t,
            dt,
            substeps: subs.len() + 1,
            iterations,
            residuals,
            p_min,
            p_max,
            theta_min,
            theta_max,
            chi_min,
            chi_max,
            chi_mean: new_state.chi.iter().zip(&self.forms.lumped).map(|(c, m)| c * m).sum::<f64>()
                / self.forms.lumped.iter().sum::<f64>(),
            max_chi_rate: max_rate,
            chi_rate_bound: bound,
            chi_rate_ok: rate_ok,
            dissipation,
            cumulative: new_state.dissipation,
            ledger,
            floor: self.floor.at(new_state.t),
            floor_tolerance: self.config.floor_rate * self.config.dt,
            cutoff,
            preisach_residual: pres_res,
            preisach_endpoint_excess: if pres_excess.is_finite() { pres_excess } else { 0.0 },
            plastic_excess,
            probe_p,
            probe_g,
            probe_chi: new_state.chi[probe],
        };
        self.ledger = ledger;
        self.state = new_state;
        Ok(report)
    }

    fn advance(&mut self, state: SimState, dt: f64, depth: usize, out: &mut Vec<SubStep>) -> Result<()> {
        let k = self.operator(dt)?;
        match attempt(&self.problem, &self.config, &self.forms, &self.operators[k].1, &state, dt) {
            Ok(sub) => {
                out.push(sub);
                Ok(())
            }
            Err(e @ (Error::StepFailure(_) | Error::PositivityViolation(_))) => {
                if depth >= self.config.max_halvings {
                    return Err(Error::StepFailure(format!(
                        "step at t = {} failed after {depth} halvings: {e}",
                        state.t
                    )));
                }
                let h = 0.5 * dt;
                self.advance(state, h, depth + 1, out)?;
                let mid = out.last().unwrap().state.clone();
                self.advance(mid, h, depth + 1, out)
            }
            Err(e) => Err(e),
        }
    }
}

fn extrema(v: &[f64]) -> (f64, f64) {
    v.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(*x), b.max(*x)))
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
}

/// One splitting step of size `dt` from `state`, without retries.
fn attempt(
    problem: &Problem,
    config: &SolverConfig,
    forms: &Forms,
    operator: &BandLu,
    state: &SimState,
    dt: f64,
) -> Result<SubStep> {
    let cut = CutoffPack {
        laws: &problem.laws,
        r: config.cutoff_r,
    };
    let laws = &problem.laws;
    let mesh = &problem.mesh;
    let flags = config.flags;
    let n = mesh.num_nodes();
    let t_new = state.t + dt;

    let mut c_p = state.p.clone();
    let mut c_theta = state.theta.clone();
    let mut c_div = state.div.clone();
    let mut iterations = IterationCounts::default();
    let mut residuals = Residuals::default();

    let mut sweep = 0;
    loop {
        sweep += 1;
        let coupling = Coupling {
            p: &c_p,
            theta: &c_theta,
            div: &c_div,
        };
        let phase = if flags.phase {
            step_phase(problem, &cut, &state.chi, &state.banks, &state.g0, &state.u0, coupling, dt)?
        } else {
            frozen_phase(&cut, state, coupling)
        };
        let pressure = if flags.pressure {
            step_pressure(problem, &cut, forms, config, state, &phase.chi, &c_div, dt)?
        } else {
            frozen_pressure(problem, &cut, state, &phase.chi, &c_div)?
        };
        let momentum = if flags.momentum {
            step_momentum(problem, &cut, forms, config, operator, state, &pressure.p, &phase.chi, &c_theta, dt)?
        } else {
            MomentumOutcome {
                u: state.u.clone(),
                div: state.div.clone(),
                points: state.points.clone(),
                viscous: vec![0.0; mesh.num_cells()],
                plastic: vec![0.0; mesh.num_cells()],
                iterations: 0,
                residual: 0.0,
            }
        };

        // Heat sources.
        let c = &laws.constants;
        let src = config.heat_sources;
        let mut input = HeatInput::zero(mesh.num_cells(), n);
        let mut diss = DissipationTotals::default();
        let mut cut_waste = 0.0;
        for k in 0..mesh.num_cells() {
            let gp = mesh.gradient(k, &pressure.p);
            let gv = mesh.gradient(k, &pressure.v);
            let sq = gp[0] * gp[0] + gp[1] * gp[1];
            let mu = if sq > 0.0 {
                (gv[0] * gp[0] + gv[1] * gp[1]) / sq
            } else {
                let cell = &mesh.cells()[k];
                cut.mu(cell.iter().map(|&i| pressure.p[i]).sum::<f64>() / cell.len() as f64)
            };
            let m = mesh.cell_measure(k);
            let diffusion = m * mu * cut.q(sq);
            cut_waste += m * mu * (sq - cut.q(sq));
            diss.viscous += momentum.viscous[k];
            diss.plastic += momentum.plastic[k];
            diss.diffusion += dt * diffusion;
            let mut s = 0.0;
            if src.viscous {
                s += momentum.viscous[k] / dt;
            }
            if src.plastic {
                s += momentum.plastic[k] / dt;
            }
            if src.diffusion {
                s += diffusion;
            }
            input.cell_sources[k] = s;
        }
        for i in 0..n {
            let m = forms.lumped[i];
            let pre = m * c.mix(phase.chi[i]) * pressure.increments[i].d_d0_abs;
            let ph = m * phase.gamma[i] * phase.rate[i] * phase.rate[i] * dt;
            diss.preisach += pre;
            diss.phase += ph;
            let mut s = config.heat_supply * m;
            if src.preisach {
                s += pre / dt;
            }
            if src.phase {
                s += ph / dt;
            }
            input.node_sources[i] = s;
            input.sink[i] = c.latent_heat / c.theta_c * phase.rate[i] + c.beta * (momentum.div[i] - state.div[i]) / dt;
        }
        let (theta, t_iter, t_res, heat_boundary) = if flags.temperature {
            let out = step_temperature(problem, &cut, forms, config, &state.theta, &input, t_new, dt)?;
            (out.theta, out.iterations, out.residual, out.boundary_rate)
        } else {
            (state.theta.clone(), 0, 0.0, 0.0)
        };

        iterations.pressure += pressure.iterations;
        iterations.momentum += momentum.iterations;
        iterations.temperature += t_iter;
        iterations.sweeps = sweep;
        residuals.max_with(&Residuals {
            pressure: pressure.residual,
            momentum: momentum.residual,
            temperature: t_res,
        });

        let change = max_diff(&pressure.p, &c_p)
            .max(max_diff(&theta, &c_theta))
            .max(max_diff(&momentum.div, &c_div));
        let stable = change <= config.tolerance * (1.0 + theta.iter().fold(0.0_f64, |m, x| m.max(x.abs())));
        if sweep >= config.sweeps || stable {
            let mut p_boundary = 0.0;
            for (i, x) in mesh.nodes().iter().enumerate() {
                let p = pressure.p[i];
                p_boundary += forms.alpha[i] * (p - problem.boundary.p_star.eval(*x, t_new)) * p;
            }
            let (pres_res, pres_excess) = increment_checks(&pressure.increments);
            let mut dissipation = state.dissipation;
            dissipation.add(&diss);
            let supply = dt * config.heat_supply * forms.lumped.iter().sum::<f64>();
            return Ok(SubStep {
                state: SimState {
                    t: t_new,
                    p: pressure.p,
                    theta,
                    chi: phase.chi,
                    u: momentum.u,
                    div: momentum.div,
                    water: pressure.water,
                    banks: pressure.banks,
                    g0: pressure.g0,
                    u0: pressure.u0,
                    points: momentum.points,
                    coefficients: pressure.coefficients,
                    dissipation,
                },
                iterations,
                residuals,
                max_chi_rate: phase.max_rate,
                chi_rate_bound: phase.rate_bound,
                chi_rate_ok: phase.bound_ok,
                dissipation: diss,
                boundary: dt * (p_boundary + heat_boundary),
                cut_waste: dt * cut_waste,
                supply,
                preisach_residual: pres_res,
                preisach_endpoint_excess: pres_excess,
            });
        }
        c_p = pressure.p;
        c_theta = theta;
        c_div = momentum.div;
    }
}

fn increment_checks(incs: &[HysteresisIncrement]) -> (f64, f64) {
    incs.iter().fold((0.0_f64, f64::INFINITY), |(r, e), inc| {
        (r.max(inc.identity_residual().abs()), e.min(inc.endpoint_excess()))
    })
}

fn frozen_phase(cut: &CutoffPack, state: &SimState, coupling: Coupling) -> PhaseOutcome {
    let n = state.chi.len();
    PhaseOutcome {
        chi: state.chi.clone(),
        rate: vec![0.0; n],
        gamma: (0..n)
            .map(|i| cut.gamma(coupling.p[i], coupling.theta[i], coupling.div[i]))
            .collect(),
        forcing: vec![0.0; n],
        max_rate: 0.0,
        rate_bound: 0.0,
        bound_ok: true,
    }
}

fn frozen_pressure(
    problem: &Problem,
    cut: &CutoffPack,
    state: &SimState,
    chi: &[f64],
    div: &[f64],
) -> Result<PressureOutcome> {
    let laws = &problem.laws;
    let water = (0..state.p.len())
        .map(|i| laws.constants.mix(chi[i]) * (cut.f(state.p[i]) + state.g0[i] + div[i]))
        .collect();
    Ok(PressureOutcome {
        v: state.p.iter().map(|p| cut.m(*p)).collect(),
        p: state.p.clone(),
        banks: state.banks.clone(),
        g0: state.g0.clone(),
        u0: state.u0.clone(),
        water,
        increments: vec![HysteresisIncrement::default(); state.p.len()],
        coefficients: state.coefficients.clone(),
        iterations: 0,
        residual: 0.0,
    })
}
