//! Batch ADMM, STOC-ADMM, SVRG-ADMM and the two momentum-accelerated
//! variance-reduced variants, plus the parameter formulas.

pub mod asvrg;
pub mod batch;
pub mod config;
pub mod params;
pub mod state;
pub mod stoc;

use std::fmt;
use std::str::FromStr;

pub use asvrg::{asvrg_admm_gc_epoch, asvrg_admm_sc_epoch, check_momentum, svrg_admm_epoch};
pub use batch::{batch_admm_epoch, solve_x_subproblem, XSolve};
pub use config::{Gamma, MomentumSchedule, SolverConfig, XUpdate};
pub use params::{
    beta_star, effective_gamma, gamma_min, optimal_theta_sc, rho_rate, theta_next, theta_upper_bound, OptimalTheta,
    RateParams,
};
pub use state::{AdmmState, Problem, Workspace};
pub use stoc::{stoc_admm_epoch, stoc_admm_step};

use crate::error::{Error, Result};
use crate::linalg::SpectralConstants;
use crate::losses::FiniteSum;
use crate::vr::{delta_b, Snapshot};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SolverKind {
    Batch,
    Stoc,
    Svrg,
    AsvrgSc,
    AsvrgGc,
}

impl SolverKind {
    pub const ALL: [SolverKind; 5] = [
        SolverKind::Batch,
        SolverKind::Stoc,
        SolverKind::Svrg,
        SolverKind::AsvrgSc,
        SolverKind::AsvrgGc,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Batch => "batch",
            SolverKind::Stoc => "stoc",
            SolverKind::Svrg => "svrg",
            SolverKind::AsvrgSc => "asvrg_sc",
            SolverKind::AsvrgGc => "asvrg_gc",
        }
    }

    pub fn is_variance_reduced(self) -> bool {
        matches!(self, SolverKind::Svrg | SolverKind::AsvrgSc | SolverKind::AsvrgGc)
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SolverKind::ALL
            .into_iter()
            .find(|k| k.name() == s.trim())
            .ok_or_else(|| Error::InvalidParameter(format!("unknown solver '{s}'")))
    }
}

/// `θ₀ = 1 − δ(b)/(α − 1)` with `α = 1/(Lη)`.
pub fn initial_decaying_theta(n: usize, b: usize, l: f64, eta: f64) -> Result<f64> {
    if delta_b(n, b)? == 0.0 {
        return Ok(1.0);
    }
    theta_upper_bound(n, b, l, eta)
}

/// A solver bound to one problem, owning its state for the whole run.
pub struct Solver<'p, F> {
    kind: SolverKind,
    problem: &'p Problem<F>,
    config: SolverConfig,
    state: AdmmState,
    ws: Workspace,
}

impl<'p, F: FiniteSum> Solver<'p, F> {
    /// Validates `config` for `kind` and builds the initial state from
    /// `x̃⁰ = z̃⁰ = 0`, `ỹ⁰ = 0`. The constant-weight solvers start from
    /// `λ̃⁰ = −(1/β)(Aᵀ)^†∇f(0)`; the others from `λ̃⁰ = 0`.
    pub fn new(
        kind: SolverKind,
        problem: &'p Problem<F>,
        config: SolverConfig,
        spectra: Option<&SpectralConstants>,
    ) -> Result<Self> {
        let n = problem.loss.num_samples();
        config.validate_common(n)?;
        let mut ws = Workspace::new(spectra);
        let mut state = AdmmState::zeros(problem.dim(), problem.dual_dim());
        match kind {
            SolverKind::Batch | SolverKind::Stoc => {}
            SolverKind::Svrg | SolverKind::AsvrgSc => {
                if kind == SolverKind::AsvrgSc && matches!(config.schedule, MomentumSchedule::DecayingTheta(_)) {
                    return Err(Error::InvalidParameter(
                        "asvrg_sc needs a constant momentum weight".into(),
                    ));
                }
                let snap = Snapshot::new(&problem.loss, &state.x_tilde)?;
                state.passes += 1.0;
                state.lambda_tilde = ws.dual_from_gradient(&problem.a, &snap.full_grad, config.beta)?;
                state.snapshot = Some(snap);
            }
            SolverKind::AsvrgGc => {
                let MomentumSchedule::DecayingTheta(theta0) = config.schedule else {
                    return Err(Error::InvalidParameter("asvrg_gc needs a decaying momentum weight".into()));
                };
                state.theta = match theta0 {
                    Some(t) => t,
                    None => initial_decaying_theta(n, config.batch_size, problem.loss.smoothness(), config.eta)?,
                };
                check_momentum(state.theta, problem, &config)?;
            }
        }
        if let MomentumSchedule::ConstantTheta(t) = config.schedule {
            if kind == SolverKind::AsvrgSc {
                check_momentum(t, problem, &config)?;
                state.theta = t;
            }
        }
        Ok(Self {
            kind,
            problem,
            config,
            state,
            ws,
        })
    }

    pub fn kind(&self) -> SolverKind {
        self.kind
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn state(&self) -> &AdmmState {
        &self.state
    }

    pub fn into_state(self) -> AdmmState {
        self.state
    }

    /// Runs one epoch and returns its wall-clock duration in seconds.
    pub fn epoch(&mut self) -> Result<f64> {
        let start = clock::start();
        let (st, p, c, ws) = (&mut self.state, self.problem, &self.config, &mut self.ws);
        match self.kind {
            SolverKind::Batch => batch_admm_epoch(st, p, c, ws)?,
            SolverKind::Stoc => stoc_admm_epoch(st, p, c)?,
            SolverKind::Svrg => svrg_admm_epoch(st, p, c, ws)?,
            SolverKind::AsvrgSc => asvrg_admm_sc_epoch(st, p, c, ws)?,
            SolverKind::AsvrgGc => asvrg_admm_gc_epoch(st, p, c, ws)?,
        }
        Ok(clock::seconds_since(start))
    }

    /// Runs `config.epochs` epochs, calling `observe(state, wall_seconds)`
    /// after each one. Observation time is not included in the timings.
    pub fn run<C>(mut self, mut observe: C) -> Result<AdmmState>
    where
        C: FnMut(&AdmmState, f64) -> Result<()>,
    {
        let mut wall = 0.0;
        for _ in 0..self.config.epochs {
            wall += self.epoch()?;
            observe(&self.state, wall)?;
        }
        Ok(self.state)
    }
}

/// Epoch timer. `wasm32-unknown-unknown` has no clock, so timings are zero
/// there.
mod clock {
    #[cfg(not(all(target_arch = "wasm32", target_os = "unknown")))]
    pub type Start = std::time::Instant;
    #[cfg(all(target_arch = "wasm32", target_os = "unknown"))]
    pub type Start = ();

    #[cfg(not(all(target_arch = "wasm32", target_os = "unknown")))]
    pub fn start() -> Start {
        std::time::Instant::now()
    }
    #[cfg(all(target_arch = "wasm32", target_os = "unknown"))]
    pub fn start() -> Start {}

    #[cfg(not(all(target_arch = "wasm32", target_os = "unknown")))]
    pub fn seconds_since(start: Start) -> f64 {
        start.elapsed().as_secs_f64()
    }
    #[cfg(all(target_arch = "wasm32", target_os = "unknown"))]
    pub fn seconds_since(_: Start) -> f64 {
        0.0
    }
}
