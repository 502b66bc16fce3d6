//! Time stepping: initial data, the loosely coupled step, and whole runs.

use crate::diagnostics::{energy_record, ritz_state, EnergyRecord};
use crate::error::{invalid, Error, Result};
use crate::mms::{CaseKind, MmsCase};
use crate::params::PhysicalParams;
use crate::subproblems::{build_fluid_system, build_poro_system, Discretization, FluidSystem, PoroSystem, State};

/// How the discrete initial data is produced from the exact solution at `t = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitMode {
    /// Nodal interpolation.
    #[default]
    Interp,
    /// Stokes, elasticity and Darcy Ritz projections.
    Ritz,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunConfig {
    /// Cells per unit length of each subdomain.
    pub cells: usize,
    /// Coefficients, penalties and `dt`.
    pub params: PhysicalParams,
    pub t_final: f64,
    pub case: CaseKind,
    /// Solve the two subproblems of a step on separate threads.
    pub parallel: bool,
    pub record_energy: bool,
    pub init: InitMode,
}

impl RunConfig {
    pub fn new(cells: usize, params: PhysicalParams, t_final: f64) -> Self {
        Self {
            cells,
            params,
            t_final,
            case: CaseKind::Manufactured,
            parallel: true,
            record_energy: false,
            init: InitMode::Interp,
        }
    }

    /// `T / dt`, which must be an integer to within `1e-9`.
    pub fn steps(&self) -> Result<usize> {
        let (t, dt) = (self.t_final, self.params.dt);
        if !(t > 0.0 && t.is_finite()) {
            return invalid(format!("final time must be positive, got {t}"));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return invalid(format!("dt must be positive, got {dt}"));
        }
        let r = t / dt;
        let n = r.round();
        if (r - n).abs() > 1e-9 || n < 1.0 {
            return invalid(format!("T / dt = {r} is not a positive integer"));
        }
        Ok(n as usize)
    }
}

/// Final state of a run and, optionally, the energy record of every step.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub final_state: State,
    pub steps: usize,
    pub energy: Vec<EnergyRecord>,
}

/// Assembled and factorized subproblems of one configuration.
#[derive(Debug)]
pub struct Simulation {
    pub config: RunConfig,
    pub disc: Discretization,
    pub fluid: FluidSystem,
    pub poro: PoroSystem,
    pub mms: MmsCase,
}

fn join<T>(h: std::thread::ScopedJoinHandle<'_, Result<T>>) -> Result<T> {
    h.join().map_err(|_| Error::Solver("worker thread panicked".into()))?
}

impl Simulation {
    pub fn new(config: RunConfig) -> Result<Self> {
        config.params.validate()?;
        config.steps()?;
        let disc = Discretization::new(config.cells)?;
        let p = &config.params;
        let (fluid, poro) = if config.parallel {
            std::thread::scope(|s| {
                let f = s.spawn(|| build_fluid_system(&disc, p));
                let q = s.spawn(|| build_poro_system(&disc, p));
                (join(f), join(q))
            })
        } else {
            (build_fluid_system(&disc, p), build_poro_system(&disc, p))
        };
        Ok(Self {
            mms: MmsCase::new(config.case, p),
            config,
            disc,
            fluid: fluid?,
            poro: poro?,
        })
    }

    pub fn initial_state(&self) -> Result<State> {
        let (d, m) = (&self.disc, &self.mms);
        match self.config.init {
            InitMode::Ritz => ritz_state(d, &self.config.params, m, 0.0),
            InitMode::Interp => Ok(State {
                u: d.u_map.interpolate_vector(|x, y| m.exact_u(0.0, x, y)),
                p: d.p_map.interpolate_scalar(|x, y| m.exact_p(0.0, x, y)),
                eta: d.eta_map.interpolate_vector(|x, y| m.exact_eta(0.0, x, y)),
                xi: d.eta_map.interpolate_vector(|x, y| m.exact_xi(0.0, x, y)),
                phi: d.phi_map.interpolate_scalar(|x, y| m.exact_phi(0.0, x, y)),
                t: 0.0,
            }),
        }
    }

    /// One step to `t_next`. Both subproblems read only `prev`.
    pub fn advance_to(&self, prev: &State, t_next: f64) -> Result<State> {
        let (d, m) = (&self.disc, &self.mms);
        let (fluid, poro) = if self.config.parallel {
            std::thread::scope(|s| {
                let f = s.spawn(|| self.fluid.step(d, prev, m, t_next));
                let q = s.spawn(|| self.poro.step(d, prev, m, t_next));
                (join(f), join(q))
            })
        } else {
            (self.fluid.step(d, prev, m, t_next), self.poro.step(d, prev, m, t_next))
        };
        let (u, p) = fluid?;
        let (eta, xi, phi) = poro?;
        Ok(State { u, p, eta, xi, phi, t: t_next })
    }

    pub fn advance(&self, prev: &State) -> Result<State> {
        self.advance_to(prev, prev.t + self.config.params.dt)
    }

    pub fn run(&self) -> Result<Trajectory> {
        self.run_from(self.initial_state()?)
    }

    /// Runs to the final time from an arbitrary state at `t = 0`.
    pub fn run_from(&self, init: State) -> Result<Trajectory> {
        let steps = self.config.steps()?;
        let dt = self.config.params.dt;
        let mut energy = Vec::new();
        let mut state = init;
        for k in 0..steps {
            let next = self.advance_to(&state, (k + 1) as f64 * dt)?;
            if self.config.record_energy {
                energy.push(energy_record(&self.disc, &self.config.params, k + 1, &state, &next));
            }
            state = next;
        }
        Ok(Trajectory {
            final_state: state,
            steps,
            energy,
        })
    }
}

pub fn run(config: RunConfig) -> Result<Trajectory> {
    Simulation::new(config)?.run()
}
