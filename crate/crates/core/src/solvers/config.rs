use crate::error::{Error, Result};

/// Momentum weight rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MomentumSchedule {
    /// Constant `θ`, strongly convex case.
    ConstantTheta(f64),
    /// `θ_s` from the decaying recursion, general convex case. `None`
    /// selects `θ₀ = 1 − δ(b)/(α − 1)` with `α = 1/(Lη)`.
    DecayingTheta(Option<f64>),
    /// `θ ≡ 1` (plain SVRG-ADMM).
    FixedOne,
}

/// Linearization constant `γ` of `G = γI − (ηβ/θ)AᵀA`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gamma {
    /// `γ = γ_min(η, β, θ)`, recomputed whenever `θ` changes.
    Auto,
    Fixed(f64),
}

/// How batch ADMM solves its `x`-subproblem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum XUpdate {
    /// Newton steps with CG inner solves to `inner_tol`.
    Exact,
    /// Single linearized step `x ← x − η(∇f(x) + βAᵀ(Ax − y + λ))/γ`.
    Linearized,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Inner iterations per epoch (VR solvers).
    pub m: usize,
    /// Step size `η` (initial step `η₀` for STOC-ADMM).
    pub eta: f64,
    /// Penalty `β`.
    pub beta: f64,
    /// Mini-batch size `b`.
    pub batch_size: usize,
    pub gamma: Gamma,
    /// Number of epochs `T`.
    pub epochs: usize,
    pub seed: u64,
    pub schedule: MomentumSchedule,
    pub x_update: XUpdate,
    /// Absolute gradient tolerance of exact inner solves.
    pub inner_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            m: 100,
            eta: 0.1,
            beta: 1.0,
            batch_size: 1,
            gamma: Gamma::Fixed(1.0),
            epochs: 10,
            seed: 1,
            schedule: MomentumSchedule::FixedOne,
            x_update: XUpdate::Exact,
            inner_tol: 1e-11,
        }
    }
}

impl SolverConfig {
    /// `m = 2n/b`, the epoch length used in the benchmark presets.
    pub fn default_epoch_length(n: usize, b: usize) -> usize {
        (2 * n / b.max(1)).max(1)
    }

    pub fn validate_common(&self, n: usize) -> Result<()> {
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(Error::InvalidParameter(format!("eta must be positive, got {}", self.eta)));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::InvalidParameter(format!("beta must be positive, got {}", self.beta)));
        }
        if self.batch_size == 0 || self.batch_size > n {
            return Err(Error::InvalidParameter(format!(
                "batch size {} must lie in [1, {n}]",
                self.batch_size
            )));
        }
        if self.m == 0 {
            return Err(Error::InvalidParameter("m must be at least 1".into()));
        }
        if let Gamma::Fixed(g) = self.gamma {
            if !(g > 0.0 && g.is_finite()) {
                return Err(Error::InvalidParameter(format!("gamma must be positive, got {g}")));
            }
        }
        Ok(())
    }
}
