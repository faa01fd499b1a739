//! Momentum recursion, linearization constant and the linear-rate formulas.

use crate::error::{Error, Result};
use crate::linalg::SpectralConstants;
use crate::solvers::config::{Gamma, SolverConfig};
use crate::vr::delta_b;

/// Conditioning data for the rate formulas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateParams {
    pub mu: f64,
    pub l_f: f64,
    pub l: f64,
    pub kappa: f64,
    pub kappa_f: f64,
    pub omega: f64,
}

impl RateParams {
    /// Uses the conservative `L_f = L` when `l_f` is `None`.
    pub fn new(mu: f64, l: f64, l_f: Option<f64>, spectra: &SpectralConstants) -> Result<Self> {
        if !(mu > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "strong convexity modulus must be positive, got {mu}"
            )));
        }
        let l_f = l_f.unwrap_or(l);
        if !(l >= mu && l_f >= mu) {
            return Err(Error::InvalidParameter(format!(
                "smoothness constants (L = {l}, L_f = {l_f}) must be at least mu = {mu}"
            )));
        }
        if !(spectra.aat_min_eig > 0.0) {
            return Err(Error::InvalidParameter("sigma_min(AAᵀ) must be positive".into()));
        }
        Ok(Self {
            mu,
            l_f,
            l,
            kappa: l / mu,
            kappa_f: l_f / mu,
            omega: spectra.omega(),
        })
    }
}

/// Decaying momentum recursion `θ_s = (√(θ⁴ + 4θ²) − θ²)/2`, the positive
/// root of `(1 − θ_s)/θ_s² = 1/θ²`.
pub fn theta_next(theta_prev: f64) -> Result<f64> {
    if !(theta_prev > 0.0 && theta_prev <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "theta must lie in (0, 1], got {theta_prev}"
        )));
    }
    let t2 = theta_prev * theta_prev;
    // 2θ² / (√(θ⁴+4θ²) + θ²) is the same root without cancellation.
    Ok(2.0 * t2 / ((t2 * t2 + 4.0 * t2).sqrt() + t2))
}

/// `γ_min = ηβ‖AᵀA‖₂/θ + 1`, the smallest `γ` with `G ⪰ I`.
pub fn gamma_min(eta: f64, beta: f64, theta: f64, ata_norm: f64) -> Result<f64> {
    if !(theta > 0.0) {
        return Err(Error::InvalidParameter(format!("theta must be positive, got {theta}")));
    }
    if eta < 0.0 || beta < 0.0 || ata_norm < 0.0 {
        return Err(Error::InvalidParameter("eta, beta and ‖AᵀA‖ must be non-negative".into()));
    }
    Ok(eta * beta * ata_norm / theta + 1.0)
}

/// `γ` for a given `θ` under `config.gamma`.
pub fn effective_gamma(config: &SolverConfig, theta: f64, ata_norm: f64) -> Result<f64> {
    match config.gamma {
        Gamma::Fixed(g) => Ok(g),
        Gamma::Auto => gamma_min(config.eta, config.beta, theta, ata_norm),
    }
}

/// Per-epoch contraction factor
/// `ρ = θ‖θG + ηβAᵀA‖₂/(ηmμ) + (1 − θ) + L_f θ/(βmσ_min)`.
///
/// `θG + ηβAᵀA = θγI`, so the first norm is `θγ`; under `Gamma::Auto`
/// that is `ηβ‖AᵀA‖₂ + θ`, which stays finite at `θ = 0`.
pub fn rho_rate(theta: f64, params: &RateParams, config: &SolverConfig, spectra: &SpectralConstants) -> f64 {
    let (eta, beta, m) = (config.eta, config.beta, config.m as f64);
    let theta_gamma = match config.gamma {
        Gamma::Auto => eta * beta * spectra.ata_norm + theta,
        Gamma::Fixed(g) => theta * g,
    };
    let term1 = theta * theta_gamma / (eta * m * params.mu);
    let term3 = params.l_f * theta / (beta * m * spectra.aat_min_eig);
    term1 + (1.0 - theta) + term3
}

/// Optimal constant momentum weight and the matching step size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimalTheta {
    pub theta: f64,
    pub alpha: f64,
    pub eta: f64,
}

/// `θ* = (m − 2√(κ_f ω)) / (m − 2√(κ_f ω) + 2κ(δ(b) + 1))`, with
/// `α = (m − 2√(κ_f ω))/(2κ) + δ(b) + 1` and `η = 1/(Lα)`.
pub fn optimal_theta_sc(m: usize, n: usize, b: usize, params: &RateParams) -> Result<OptimalTheta> {
    let delta = delta_b(n, b)?;
    let root = 2.0 * (params.kappa_f * params.omega).sqrt();
    let m = m as f64;
    let lower = 2.0 * params.kappa + root;
    if !(m > lower) {
        return Err(Error::InvalidParameter(format!(
            "m = {m} must exceed 2κ + 2√(κ_f ω) = {lower:.3}"
        )));
    }
    let excess = m - root;
    let theta = excess / (excess + 2.0 * params.kappa * (delta + 1.0));
    let alpha = excess / (2.0 * params.kappa) + delta + 1.0;
    Ok(OptimalTheta {
        theta,
        alpha,
        eta: 1.0 / (params.l * alpha),
    })
}

/// `β* = √(L_f μ / (σ_min ‖AᵀA‖₂))`.
pub fn beta_star(params: &RateParams, spectra: &SpectralConstants) -> Result<f64> {
    if !(spectra.aat_min_eig > 0.0 && spectra.ata_norm > 0.0) {
        return Err(Error::InvalidParameter("beta* needs positive spectra".into()));
    }
    Ok((params.l_f * params.mu / (spectra.aat_min_eig * spectra.ata_norm)).sqrt())
}

/// Largest admissible constant `θ`: `1 − δ(b)/(α − 1)`.
pub fn theta_upper_bound(n: usize, b: usize, l: f64, eta: f64) -> Result<f64> {
    let delta = delta_b(n, b)?;
    let alpha = 1.0 / (l * eta);
    if !(alpha > 1.0 + delta) {
        return Err(Error::InvalidParameter(format!(
            "alpha = 1/(L eta) = {alpha:.4} must exceed 1 + delta(b) = {:.4}",
            1.0 + delta
        )));
    }
    Ok(1.0 - delta / (alpha - 1.0))
}
