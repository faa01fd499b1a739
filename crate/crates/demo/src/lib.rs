//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Three operations are exported: the decaying momentum schedule, the
//! strongly convex rate as a function of the momentum weight, and a short
//! race between SVRG-ADMM, ASVRG-ADMM and STOC-ADMM on a seeded fused-lasso
//! problem.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wasm_bindgen::prelude::*;

use asvrg_admm::linalg::{SparseMatrixCsr, SpectralConstants};
use asvrg_admm::losses::{Dataset, FiniteSum, Loss, LossKind};
use asvrg_admm::metrics::compute_reference;
use asvrg_admm::prox::Regularizer;
use asvrg_admm::solvers::{
    beta_star, optimal_theta_sc, rho_rate, theta_next, Gamma, MomentumSchedule, Problem, RateParams, Solver,
    SolverConfig, SolverKind,
};

fn js_err(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

/// `θ₀, θ₁, …, θ_steps` of the decaying recursion.
#[wasm_bindgen]
pub fn theta_schedule(theta0: f64, steps: usize) -> Result<Vec<f64>, JsError> {
    let mut out = Vec::with_capacity(steps + 1);
    let mut t = theta0;
    out.push(t);
    for _ in 0..steps {
        t = theta_next(t).map_err(js_err)?;
        out.push(t);
    }
    Ok(out)
}

/// `ρ(θ)` sampled on a grid, with the optimal weight and its step size.
#[wasm_bindgen]
pub struct RateCurve {
    thetas: Vec<f64>,
    rhos: Vec<f64>,
    theta_star: f64,
    eta_star: f64,
    beta_star: f64,
    m: usize,
}

#[wasm_bindgen]
impl RateCurve {
    #[wasm_bindgen(getter)]
    pub fn thetas(&self) -> Vec<f64> {
        self.thetas.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn rhos(&self) -> Vec<f64> {
        self.rhos.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn theta_star(&self) -> f64 {
        self.theta_star
    }

    #[wasm_bindgen(getter)]
    pub fn eta_star(&self) -> f64 {
        self.eta_star
    }

    #[wasm_bindgen(getter)]
    pub fn beta_star(&self) -> f64 {
        self.beta_star
    }

    #[wasm_bindgen(getter)]
    pub fn m(&self) -> usize {
        self.m
    }
}

/// Rate curve for condition numbers `kappa = L/μ` and `omega = ‖AᵀA‖/σ_min`
/// with `n` samples, batch size `b` and epoch length `m` (0 picks the
/// smallest admissible length, doubled).
#[wasm_bindgen]
pub fn rate_curve(kappa: f64, omega: f64, n: usize, b: usize, m: usize, points: usize) -> Result<RateCurve, JsError> {
    if !(kappa >= 1.0 && omega >= 1.0) || points < 2 {
        return Err(JsError::new("need kappa >= 1, omega >= 1 and at least two points"));
    }
    let spectra = SpectralConstants { ata_norm: omega, aat_min_eig: 1.0, tol: 0.0, iters_used: 0 };
    let params = RateParams::new(1.0, kappa, None, &spectra).map_err(js_err)?;
    let m = if m == 0 { 2 * (2.0 * kappa + 2.0 * (kappa * omega).sqrt()).ceil() as usize } else { m };
    let opt = optimal_theta_sc(m, n, b, &params).map_err(js_err)?;
    let beta = beta_star(&params, &spectra).map_err(js_err)?;
    let config = SolverConfig { m, eta: opt.eta, beta, batch_size: b, gamma: Gamma::Auto, ..SolverConfig::default() };
    let thetas: Vec<f64> = (1..=points).map(|k| k as f64 / points as f64).collect();
    let rhos = thetas.iter().map(|&t| rho_rate(t, &params, &config, &spectra)).collect();
    Ok(RateCurve { thetas, rhos, theta_star: opt.theta, eta_star: opt.eta, beta_star: beta, m })
}

/// Per-epoch objective gaps of each solver, against a batch reference.
#[wasm_bindgen]
pub struct Race {
    names: Vec<String>,
    gaps: Vec<Vec<f64>>,
    passes: Vec<Vec<f64>>,
}

#[wasm_bindgen]
impl Race {
    pub fn solver_count(&self) -> usize {
        self.names.len()
    }

    pub fn name(&self, k: usize) -> String {
        self.names[k].clone()
    }

    pub fn gaps(&self, k: usize) -> Vec<f64> {
        self.gaps[k].clone()
    }

    pub fn passes(&self, k: usize) -> Vec<f64> {
        self.passes[k].clone()
    }
}

/// Seeded logistic data with a planted piecewise-constant weight vector,
/// and the chain penalty `A = [D; I]` with `D` the first differences.
fn chain_problem_data(n: usize, d: usize, seed: u64) -> Result<(Dataset, SparseMatrixCsr), JsError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w: Vec<f64> = (0..d).map(|j| if j < d / 3 { 1.0 } else if j < 2 * d / 3 { 0.0 } else { -1.0 }).collect();
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let mut row: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let nrm = row.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-12);
        row.iter_mut().for_each(|v| *v /= nrm);
        let margin: f64 = row.iter().zip(&w).map(|(a, b)| a * b).sum();
        let p = 1.0 / (1.0 + (-4.0 * margin).exp());
        labels.push(if rng.random::<f64>() < p { 1.0 } else { -1.0 });
        rows.push(row);
    }
    let data = Dataset::from_dense(&rows, labels).map_err(js_err)?;
    let trips: Vec<(usize, usize, f64)> = (0..d.saturating_sub(1)).flat_map(|j| [(j, j, 1.0), (j, j + 1, -1.0)]).collect();
    let g = SparseMatrixCsr::from_triplets(d.saturating_sub(1), d, &trips).map_err(js_err)?;
    let a = g.vstack(&SparseMatrixCsr::identity(d)).map_err(js_err)?;
    Ok((data, a))
}

/// Runs the three stochastic solvers for `epochs` epochs with step
/// `eta_scale / L` (the VR solvers) and `4·eta_scale / L` (STOC-ADMM).
#[wasm_bindgen]
pub fn race(n: usize, d: usize, seed: u64, epochs: usize, lambda1: f64, eta_scale: f64) -> Result<Race, JsError> {
    if n < 10 || d < 2 || epochs == 0 {
        return Err(JsError::new("need n >= 10, d >= 2 and at least one epoch"));
    }
    let (data, a) = chain_problem_data(n, d, seed)?;
    let loss = Loss::new(LossKind::Logistic, &data).map_err(js_err)?;
    let problem = Problem::new(loss, Regularizer::L1(lambda1), a).map_err(js_err)?;
    let reference = compute_reference(&problem, 1e-9).map_err(js_err)?;
    let l = problem.loss.smoothness();
    let b = (n / 50).max(1);
    let mut names = Vec::new();
    let mut gaps = Vec::new();
    let mut passes = Vec::new();
    for kind in [SolverKind::Svrg, SolverKind::AsvrgGc, SolverKind::Stoc] {
        let stoc = kind == SolverKind::Stoc;
        let config = SolverConfig {
            m: if stoc { 1 } else { SolverConfig::default_epoch_length(n, b) },
            eta: if stoc { 4.0 * eta_scale / l } else { eta_scale / l },
            beta: 1.0,
            batch_size: if stoc { 1 } else { b },
            gamma: Gamma::Fixed(1.0),
            epochs,
            seed,
            schedule: match kind {
                SolverKind::AsvrgGc => MomentumSchedule::DecayingTheta(None),
                _ => MomentumSchedule::FixedOne,
            },
            ..SolverConfig::default()
        };
        let solver = Solver::new(kind, &problem, config, None).map_err(js_err)?;
        let mut g = vec![problem.objective(&vec![0.0; d]) - reference.objective_star];
        let mut p = vec![solver.state().passes];
        solver
            .run(|state, _| {
                g.push((problem.objective(&state.x_tilde) - reference.objective_star).max(1e-16));
                p.push(state.passes);
                Ok(())
            })
            .map_err(js_err)?;
        names.push(kind.name().to_string());
        gaps.push(g);
        passes.push(p);
    }
    Ok(Race { names, gaps, passes })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_decays_from_its_start() {
        let s = theta_schedule(1.0, 20).unwrap();
        assert_eq!(s.len(), 21);
        assert!(s.windows(2).all(|w| w[1] < w[0]));
        assert!(s[20] <= 2.0 / 22.0);
    }

    #[test]
    fn rate_curve_is_minimized_near_theta_star() {
        let c = rate_curve(20.0, 4.0, 1000, 10, 0, 200).unwrap();
        let at = |t: f64| {
            let k = c.thetas.iter().position(|&x| x >= t).unwrap();
            c.rhos[k]
        };
        let best = c.rhos.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(at(c.theta_star) <= best * 1.02);
        assert!(c.rhos.iter().any(|&r| r < 1.0));
    }

    #[test]
    fn race_produces_decreasing_gaps() {
        let r = race(300, 12, 1, 8, 1e-3, 0.4).unwrap();
        assert_eq!(r.solver_count(), 3);
        for k in 0..3 {
            let g = r.gaps(k);
            assert_eq!(g.len(), 9);
            assert!(g.iter().all(|v| v.is_finite()));
            assert!(g[8] < g[1], "{}: {g:?}", r.name(k));
        }
    }
}
