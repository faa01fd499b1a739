//! Stochastic ADMM with a single-sample gradient and decaying step `η₀/√k`.

use crate::error::{Error, Result};
use crate::linalg::cg::conjugate_gradient;
use crate::linalg::dense::DenseVector;
use crate::losses::FiniteSum;
use crate::prox::y_update_into;
use crate::solvers::config::SolverConfig;
use crate::solvers::state::{AdmmState, Problem};
use crate::vr::BatchSampler;

/// One step with sample `i`: `y ← prox(Ax + λ)`, then
/// `x ← argmin gᵀx + ‖x − x_prev‖²/(2η_k) + (β/2)‖Ax − y + λ‖²` with
/// `g = ∇f_i(x_prev)` and `η_k = η₀/√k`, then `λ ← λ + Ax − y`.
///
/// The `x` step solves `(I/η_k + βAᵀA)x = x_prev/η_k − g + βAᵀ(y − λ)` by CG
/// warm-started at `x_prev`.
pub fn stoc_admm_step<F: FiniteSum>(
    state: &mut AdmmState,
    problem: &Problem<F>,
    config: &SolverConfig,
    k: usize,
    sample: usize,
) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidParameter("step index k must be at least 1".into()));
    }
    let n = problem.loss.num_samples();
    if sample >= n {
        return Err(Error::IndexOutOfRange { index: sample, len: n });
    }
    let a = &problem.a;
    let (d1, d2) = (problem.dim(), problem.dual_dim());
    let beta = config.beta;
    let eta_k = config.eta / (k as f64).sqrt();
    let inv_eta = 1.0 / eta_k;

    let mut ax = vec![0.0; d2];
    a.spmv_into(&state.x, &mut ax);
    y_update_into(&problem.reg, &ax, &state.lambda_dual, beta, &mut state.y);

    let mut g = vec![0.0; d1];
    problem.loss.sample_grad_into(sample, &state.x, &mut g);
    let shifted: DenseVector = state.y.iter().zip(&state.lambda_dual).map(|(y, u)| y - u).collect();
    let mut rhs = vec![0.0; d1];
    a.spmv_t_into(&shifted, &mut rhs);
    for ((r, xi), gi) in rhs.iter_mut().zip(&state.x).zip(&g) {
        *r = beta * *r + inv_eta * xi - gi;
    }

    let tmp = std::cell::RefCell::new(vec![0.0; d2]);
    let op = |v: &[f64], out: &mut [f64]| {
        let mut t = tmp.borrow_mut();
        a.spmv_into(v, &mut t);
        a.spmv_t_into(&t, out);
        for (o, vi) in out.iter_mut().zip(v) {
            *o = beta * *o + inv_eta * vi;
        }
    };
    let (x_new, _) = conjugate_gradient(op, &rhs, Some(&state.x), config.inner_tol.max(1e-14), 10 * d1 + 100)?;

    a.spmv_into(&x_new, &mut ax);
    for ((u, axi), yi) in state.lambda_dual.iter_mut().zip(&ax).zip(&state.y) {
        *u += axi - yi;
    }
    state.x = x_new;
    state.z.clone_from(&state.x);
    state.step = state.step.max(k);
    state.passes += 1.0 / n as f64;
    Ok(())
}

/// `n` consecutive steps. Samples are drawn uniformly with replacement from
/// the stream of `(seed, epoch)`; the step counter continues across epochs.
pub fn stoc_admm_epoch<F: FiniteSum>(state: &mut AdmmState, problem: &Problem<F>, config: &SolverConfig) -> Result<()> {
    let n = problem.loss.num_samples();
    let mut sampler = BatchSampler::new(n, 1, config.seed, state.epoch as u64)?;
    for _ in 0..n {
        let i = sampler.draw()[0];
        let k = state.step + 1;
        stoc_admm_step(state, problem, config, k, i)?;
    }
    state.x_tilde.clone_from(&state.x);
    state.z_tilde.clone_from(&state.x);
    state.y_tilde.clone_from(&state.y);
    state.lambda_tilde.clone_from(&state.lambda_dual);
    state.epoch += 1;
    state.ensure_finite()
}
