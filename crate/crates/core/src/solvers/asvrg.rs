//! Variance-reduced stochastic ADMM with momentum: constant-weight
//! (strongly convex), decaying-weight (general convex) and plain SVRG-ADMM.

use crate::error::{Error, Result};
use crate::linalg::dense::{axpy, DenseVector};
use crate::losses::FiniteSum;
use crate::prox::y_update_into;
use crate::solvers::config::{MomentumSchedule, SolverConfig};
use crate::solvers::params::{effective_gamma, theta_next, theta_upper_bound};
use crate::solvers::state::{AdmmState, Problem, Workspace};
use crate::vr::{vr_gradient_into, BatchSampler, Snapshot};

/// Checks `θ` against `0 < θ ≤ 1 − δ(b)/(α − 1)` and `η < 1/(2L)`.
/// `θ = 1` is exempt: it is plain SVRG-ADMM with its own step rule.
pub fn check_momentum<F: FiniteSum>(theta: f64, problem: &Problem<F>, config: &SolverConfig) -> Result<()> {
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(Error::InvalidParameter(format!("theta must lie in (0, 1], got {theta}")));
    }
    if theta == 1.0 {
        return Ok(());
    }
    let l = problem.loss.smoothness();
    if !(config.eta * 2.0 * l < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "eta = {} must be below 1/(2L) = {}",
            config.eta,
            0.5 / l
        )));
    }
    let bound = theta_upper_bound(problem.loss.num_samples(), config.batch_size, l, config.eta)?;
    if theta > bound * (1.0 + 1e-12) {
        return Err(Error::InvalidParameter(format!(
            "theta = {theta} exceeds 1 - delta(b)/(alpha - 1) = {bound}"
        )));
    }
    Ok(())
}

struct InnerSums {
    x_sum: DenseVector,
    y_sum: DenseVector,
}

/// `m` inner steps from `(x₀, z₀, λ₀) = (state.x, state.z, state.lambda_dual)`
/// anchored at `state.x_tilde` with the current snapshot.
fn inner_loop<F: FiniteSum>(
    state: &mut AdmmState,
    problem: &Problem<F>,
    config: &SolverConfig,
    theta: f64,
    gamma: f64,
) -> Result<InnerSums> {
    let a = &problem.a;
    let loss = &problem.loss;
    let (d1, d2) = (problem.dim(), problem.dual_dim());
    let beta = config.beta;
    let step = config.eta / (gamma * theta);
    let snap = state.snapshot.as_ref().expect("snapshot set before inner loop");
    let mut sampler = BatchSampler::new(loss.num_samples(), config.batch_size, config.seed, state.epoch as u64)?;

    let mut az = vec![0.0; d2];
    let mut r = vec![0.0; d2];
    let mut atr = vec![0.0; d1];
    let mut grad = vec![0.0; d1];
    let mut sums = InnerSums {
        x_sum: vec![0.0; d1],
        y_sum: vec![0.0; d2],
    };

    a.spmv_into(&state.z, &mut az);
    for _ in 0..config.m {
        let batch = sampler.draw();
        y_update_into(&problem.reg, &az, &state.lambda_dual, beta, &mut state.y);
        vr_gradient_into(snap, loss, &state.x, &batch, &mut grad);
        for (((ri, a_i), yi), u) in r.iter_mut().zip(&az).zip(&state.y).zip(&state.lambda_dual) {
            *ri = a_i - yi + u;
        }
        a.spmv_t_into(&r, &mut atr);
        axpy(beta, &atr, &mut grad);
        axpy(-step, &grad, &mut state.z);
        for ((xi, xt), zi) in state.x.iter_mut().zip(&state.x_tilde).zip(&state.z) {
            *xi = (1.0 - theta) * xt + theta * zi;
        }
        a.spmv_into(&state.z, &mut az);
        for ((u, a_i), yi) in state.lambda_dual.iter_mut().zip(&az).zip(&state.y) {
            *u += a_i - yi;
        }
        axpy(1.0, &state.x, &mut sums.x_sum);
        axpy(1.0, &state.y, &mut sums.y_sum);
        state.step += 1;
    }
    state.passes += 2.0 * (config.m * config.batch_size) as f64 / loss.num_samples() as f64;
    Ok(sums)
}

fn ensure_snapshot<F: FiniteSum>(state: &mut AdmmState, problem: &Problem<F>) -> Result<()> {
    let fresh = matches!(&state.snapshot, Some(s) if s.x_tilde == state.x_tilde);
    if !fresh {
        state.snapshot = Some(Snapshot::new(&problem.loss, &state.x_tilde)?);
        state.passes += 1.0;
    }
    Ok(())
}

fn finish_averages(state: &mut AdmmState, sums: &InnerSums, theta: f64, m: usize) {
    let inv_m = 1.0 / m as f64;
    for (xt, s) in state.x_tilde.iter_mut().zip(&sums.x_sum) {
        *xt = s * inv_m;
    }
    for (yt, s) in state.y_tilde.iter_mut().zip(&sums.y_sum) {
        *yt = (1.0 - theta) * *yt + theta * inv_m * s;
    }
}

/// Constant-`θ` epoch. Also used for SVRG-ADMM (`θ = 1`).
fn constant_theta_epoch<F: FiniteSum>(
    state: &mut AdmmState,
    problem: &Problem<F>,
    config: &SolverConfig,
    ws: &mut Workspace,
    theta: f64,
) -> Result<()> {
    check_momentum(theta, problem, config)?;
    let ata = match config.gamma {
        crate::solvers::config::Gamma::Auto => ws.ata_norm(&problem.a)?,
        crate::solvers::config::Gamma::Fixed(_) => 0.0,
    };
    let gamma = effective_gamma(config, theta, ata)?;
    state.theta = theta;
    state.gamma = gamma;

    ensure_snapshot(state, problem)?;
    state.x.clone_from(&state.x_tilde);
    state.z.clone_from(&state.x_tilde);
    state.y.clone_from(&state.y_tilde);
    state.lambda_dual.clone_from(&state.lambda_tilde);

    let sums = inner_loop(state, problem, config, theta, gamma)?;
    finish_averages(state, &sums, theta, config.m);

    let snap = Snapshot::new(&problem.loss, &state.x_tilde)?;
    state.passes += 1.0;
    state.lambda_tilde = ws.dual_from_gradient(&problem.a, &snap.full_grad, config.beta)?;
    state.snapshot = Some(snap);
    state.z_tilde.clone_from(&state.z);
    state.epoch += 1;
    state.ensure_finite()
}

/// One epoch with constant momentum weight `θ` from
/// `MomentumSchedule::ConstantTheta` (or `θ = 1` for `FixedOne`):
/// restart `x₀ = z₀ = x̃`, `λ₀ = λ̃`, run `m` inner steps, then
/// `x̃ = mean xₖ`, `ỹ = (1 − θ)ỹ + (θ/m)Σyₖ`, `λ̃ = −(1/β)(Aᵀ)^†∇f(x̃)`.
pub fn asvrg_admm_sc_epoch<F: FiniteSum>(
    state: &mut AdmmState,
    problem: &Problem<F>,
    config: &SolverConfig,
    ws: &mut Workspace,
) -> Result<()> {
    let theta = match config.schedule {
        MomentumSchedule::ConstantTheta(t) => t,
        MomentumSchedule::FixedOne => 1.0,
        MomentumSchedule::DecayingTheta(_) => {
            return Err(Error::InvalidParameter(
                "constant-weight epoch needs a ConstantTheta or FixedOne schedule".into(),
            ))
        }
    };
    constant_theta_epoch(state, problem, config, ws, theta)
}

/// SVRG-ADMM epoch: the constant-weight epoch with `θ = 1`, regardless of
/// `config.schedule`.
pub fn svrg_admm_epoch<F: FiniteSum>(
    state: &mut AdmmState,
    problem: &Problem<F>,
    config: &SolverConfig,
    ws: &mut Workspace,
) -> Result<()> {
    constant_theta_epoch(state, problem, config, ws, 1.0)
}

/// One epoch with decaying weight: `x₀ = (1 − θ)x̃ + θz̃`, `z₀ = z̃`,
/// `λ₀ = λ̃`; afterwards `z̃ = zₘ`, `λ̃ = λₘ` and `θ ← theta_next(θ)`.
/// Uses `state.theta` as `θ_{s−1}`.
pub fn asvrg_admm_gc_epoch<F: FiniteSum>(
    state: &mut AdmmState,
    problem: &Problem<F>,
    config: &SolverConfig,
    ws: &mut Workspace,
) -> Result<()> {
    if !matches!(config.schedule, MomentumSchedule::DecayingTheta(_)) {
        return Err(Error::InvalidParameter(
            "decaying-weight epoch needs a DecayingTheta schedule".into(),
        ));
    }
    let theta = state.theta;
    check_momentum(theta, problem, config)?;
    let s_theta_ok = theta < 1.0 || {
        // θ = 1 is only admissible when δ(b) = 0.
        crate::vr::delta_b(problem.loss.num_samples(), config.batch_size)? == 0.0
    };
    if !s_theta_ok {
        return Err(Error::InvalidParameter(format!(
            "theta = 1 needs b = n in the decaying schedule (b = {})",
            config.batch_size
        )));
    }
    let ata = match config.gamma {
        crate::solvers::config::Gamma::Auto => ws.ata_norm(&problem.a)?,
        crate::solvers::config::Gamma::Fixed(_) => 0.0,
    };
    let gamma = effective_gamma(config, theta, ata)?;
    state.gamma = gamma;

    ensure_snapshot(state, problem)?;
    for ((xi, xt), zt) in state.x.iter_mut().zip(&state.x_tilde).zip(&state.z_tilde) {
        *xi = (1.0 - theta) * xt + theta * zt;
    }
    state.z.clone_from(&state.z_tilde);
    state.y.clone_from(&state.y_tilde);
    state.lambda_dual.clone_from(&state.lambda_tilde);

    let sums = inner_loop(state, problem, config, theta, gamma)?;
    finish_averages(state, &sums, theta, config.m);
    state.lambda_tilde.clone_from(&state.lambda_dual);
    state.z_tilde.clone_from(&state.z);
    state.theta = theta_next(theta)?;
    state.epoch += 1;
    state.ensure_finite()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::SparseMatrixCsr;
    use crate::losses::{Dataset, Loss, LossKind};
    use crate::prox::Regularizer;
    use crate::solvers::config::Gamma;

    fn toy_data() -> Dataset {
        Dataset::from_dense(
            &[
                vec![1.0, 0.5, 0.0],
                vec![-0.3, 1.0, 0.2],
                vec![0.4, -0.2, 1.0],
                vec![0.9, 0.1, -0.5],
                vec![-0.6, -0.8, 0.3],
                vec![0.2, 0.7, 0.6],
            ],
            vec![1.0, -1.0, 1.0, 1.0, -1.0, 1.0],
        )
        .unwrap()
    }

    fn graph() -> SparseMatrixCsr {
        let g = SparseMatrixCsr::from_dense(&[vec![1.0, -1.0, 0.0], vec![0.0, 1.0, 1.0]]).unwrap();
        SparseMatrixCsr::vstack(&g, &SparseMatrixCsr::identity(3)).unwrap()
    }

    fn init(problem: &Problem<Loss<'_>>, beta: f64, ws: &mut Workspace) -> AdmmState {
        let mut st = AdmmState::zeros(problem.dim(), problem.dual_dim());
        let g = problem.loss.full_grad(&st.x_tilde);
        st.lambda_tilde = ws.dual_from_gradient(&problem.a, &g, beta).unwrap();
        st
    }

    #[test]
    fn theta_one_matches_svrg_bitwise() {
        let data = toy_data();
        let loss = Loss::new(LossKind::L2Logistic { lambda2: 0.01 }, &data).unwrap();
        let p = Problem::new(loss, Regularizer::L1(1e-3), graph()).unwrap();
        let base = SolverConfig { m: 12, eta: 0.2, beta: 0.5, batch_size: 2, seed: 9, ..Default::default() };
        let sc = SolverConfig { schedule: MomentumSchedule::ConstantTheta(1.0), ..base };
        let (mut ws1, mut ws2) = (Workspace::default(), Workspace::default());
        let mut s1 = init(&p, base.beta, &mut ws1);
        let mut s2 = init(&p, base.beta, &mut ws2);
        for _ in 0..5 {
            asvrg_admm_sc_epoch(&mut s1, &p, &sc, &mut ws1).unwrap();
            svrg_admm_epoch(&mut s2, &p, &base, &mut ws2).unwrap();
            assert_eq!(s1, s2);
        }
    }

    #[test]
    fn full_batch_single_step_is_seed_independent() {
        let data = toy_data();
        let loss = Loss::new(LossKind::Logistic, &data).unwrap();
        let p = Problem::new(loss, Regularizer::L1(1e-3), graph()).unwrap();
        let l = p.loss.smoothness();
        let cfg = |seed| SolverConfig {
            m: 1,
            eta: 0.4 / l,
            beta: 0.5,
            batch_size: 6,
            seed,
            schedule: MomentumSchedule::DecayingTheta(None),
            ..Default::default()
        };
        let run = |seed| {
            let mut st = AdmmState::zeros(3, 5);
            st.theta = 1.0;
            let mut ws = Workspace::default();
            for _ in 0..4 {
                asvrg_admm_gc_epoch(&mut st, &p, &cfg(seed), &mut ws).unwrap();
            }
            st
        };
        assert_eq!(run(1), run(12345));
    }

    #[test]
    fn first_decaying_epoch_with_unit_weight_starts_at_z_tilde() {
        let data = toy_data();
        let loss = Loss::new(LossKind::Logistic, &data).unwrap();
        let p = Problem::new(loss, Regularizer::None, graph()).unwrap();
        let l = p.loss.smoothness();
        let cfg = SolverConfig {
            m: 1,
            eta: 0.4 / l,
            batch_size: 6,
            schedule: MomentumSchedule::DecayingTheta(None),
            ..Default::default()
        };
        let mut st = AdmmState::zeros(3, 5);
        st.theta = 1.0;
        st.x_tilde = vec![5.0, 5.0, 5.0];
        st.z_tilde = vec![0.1, -0.2, 0.3];
        // x₀ = z̃, and with b = n the estimate at x₀ is exactly ∇f(z̃).
        let snap = Snapshot::new(&p.loss, &st.x_tilde).unwrap();
        let mut expected_grad = snap.full_grad.clone();
        for i in 0..6 {
            p.loss.add_grad_difference(i, &st.z_tilde, &st.x_tilde, 1.0 / 6.0, &mut expected_grad);
        }
        let exact = p.loss.full_grad(&st.z_tilde);
        for (e, g) in expected_grad.iter().zip(&exact) {
            assert!((e - g).abs() < 1e-12);
        }
        asvrg_admm_gc_epoch(&mut st, &p, &cfg, &mut Workspace::default()).unwrap();
        // h = 0 gives y₁ = Az̃, so z₁ = z̃ − η∇f(z̃).
        let z1 = st.z_tilde.clone();
        for k in 0..3 {
            let want = [0.1, -0.2, 0.3][k] - cfg.eta * exact[k];
            assert!((z1[k] - want).abs() < 1e-12, "{k}: {} vs {want}", z1[k]);
        }
    }

    #[test]
    fn decaying_epoch_advances_theta() {
        let data = toy_data();
        let loss = Loss::new(LossKind::Logistic, &data).unwrap();
        let p = Problem::new(loss, Regularizer::L1(1e-3), graph()).unwrap();
        let l = p.loss.smoothness();
        let cfg = SolverConfig {
            m: 4,
            eta: 0.1 / l,
            batch_size: 2,
            gamma: Gamma::Auto,
            schedule: MomentumSchedule::DecayingTheta(None),
            ..Default::default()
        };
        let mut st = AdmmState::zeros(3, 5);
        st.theta = theta_upper_bound(6, 2, l, cfg.eta).unwrap();
        let mut ws = Workspace::default();
        for _ in 0..6 {
            let prev = st.theta;
            asvrg_admm_gc_epoch(&mut st, &p, &cfg, &mut ws).unwrap();
            let lhs = (1.0 - st.theta) / (st.theta * st.theta);
            assert!((lhs - 1.0 / (prev * prev)).abs() <= 1e-12 * lhs.max(1.0));
            assert!(st.theta < prev);
        }
    }

    #[test]
    fn dual_and_interpolation_identities_hold_per_step() {
        let data = toy_data();
        let loss = Loss::new(LossKind::L2Logistic { lambda2: 0.05 }, &data).unwrap();
        let p = Problem::new(loss, Regularizer::L1(1e-2), graph()).unwrap();
        let l = p.loss.smoothness();
        let theta = 0.6;
        let cfg = SolverConfig {
            m: 1,
            eta: 0.1 / l,
            batch_size: 3,
            gamma: Gamma::Auto,
            schedule: MomentumSchedule::ConstantTheta(theta),
            ..Default::default()
        };
        let mut ws = Workspace::default();
        let mut st = init(&p, cfg.beta, &mut ws);
        for _ in 0..10 {
            let lambda0 = st.lambda_tilde.clone();
            let x_anchor = st.x_tilde.clone();
            asvrg_admm_sc_epoch(&mut st, &p, &cfg, &mut ws).unwrap();
            let az = p.a.spmv(&st.z).unwrap();
            for j in 0..5 {
                let want = az[j] - st.y[j];
                assert!((st.lambda_dual[j] - lambda0[j] - want).abs() <= 1e-13);
            }
            for (k, xa) in x_anchor.iter().enumerate() {
                assert_eq!(st.x[k], (1.0 - theta) * xa + theta * st.z[k]);
            }
        }
    }

    #[test]
    fn momentum_bound_is_enforced() {
        let data = toy_data();
        let loss = Loss::new(LossKind::Logistic, &data).unwrap();
        let p = Problem::new(loss, Regularizer::None, graph()).unwrap();
        let l = p.loss.smoothness();
        let cfg = SolverConfig { eta: 0.1 / l, batch_size: 1, ..Default::default() };
        let bound = theta_upper_bound(6, 1, l, cfg.eta).unwrap();
        assert!(check_momentum(bound, &p, &cfg).is_ok());
        assert!(check_momentum(bound + 0.01, &p, &cfg).is_err());
        assert!(check_momentum(1.0, &p, &cfg).is_ok());
        assert!(check_momentum(0.0, &p, &cfg).is_err());
        let big_step = SolverConfig { eta: 0.6 / l, ..cfg };
        assert!(check_momentum(0.5, &p, &big_step).is_err());
        let bad = SolverConfig { schedule: MomentumSchedule::DecayingTheta(None), ..cfg };
        let mut st = AdmmState::zeros(3, 5);
        assert!(asvrg_admm_sc_epoch(&mut st, &p, &bad, &mut Workspace::default()).is_err());
    }
}
