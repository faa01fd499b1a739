//! Deterministic ADMM: exact `y` prox, exact or linearized `x` step, dual ascent.

use crate::error::{Error, Result};
use crate::linalg::cg::conjugate_gradient;
use crate::linalg::dense::{axpy, dot, norm, DenseVector};
use crate::losses::FiniteSum;
use crate::prox::y_update_into;
use crate::solvers::config::{Gamma, SolverConfig, XUpdate};
use crate::solvers::state::{AdmmState, Problem, Workspace};

/// Outcome of an exact `x`-subproblem solve.
#[derive(Debug, Clone)]
pub struct XSolve {
    pub x: DenseVector,
    /// `‖∇f(x) + βAᵀ(Ax − v)‖` at the returned point.
    pub grad_norm: f64,
    /// Full-gradient and Hessian-vector evaluations, in passes over the data.
    pub passes: f64,
}

/// Minimises `f(x) + (β/2)‖Ax − v‖²` by damped Newton with CG inner solves.
/// Errors if the gradient norm does not reach `tol`.
pub fn solve_x_subproblem<F: FiniteSum>(
    problem: &Problem<F>,
    v: &[f64],
    beta: f64,
    x0: &[f64],
    tol: f64,
    max_newton: usize,
) -> Result<XSolve> {
    let sol = newton_x_solve(problem, v, beta, x0, tol, max_newton)?;
    if sol.grad_norm <= tol {
        Ok(sol)
    } else {
        Err(Error::NotConverged {
            what: "exact x-subproblem",
            iters: max_newton,
            estimate: sol.grad_norm,
        })
    }
}

/// As [`solve_x_subproblem`] but returns the last iterate when the line
/// search stalls or the iteration cap is hit.
pub fn newton_x_solve<F: FiniteSum>(
    problem: &Problem<F>,
    v: &[f64],
    beta: f64,
    x0: &[f64],
    tol: f64,
    max_newton: usize,
) -> Result<XSolve> {
    let a = &problem.a;
    let loss = &problem.loss;
    let d1 = problem.dim();
    let d2 = problem.dual_dim();
    let mut x = x0.to_vec();
    let mut passes = 0.0;
    let mut r = vec![0.0; d2];
    let mut atr = vec![0.0; d1];

    let merit = |x: &[f64], r: &mut [f64]| -> f64 {
        a.spmv_into(x, r);
        let pen: f64 = r.iter().zip(v).map(|(ri, vi)| (ri - vi).powi(2)).sum();
        loss.value(x) + 0.5 * beta * pen
    };
    let gradient = |x: &[f64], r: &mut [f64], atr: &mut [f64]| -> DenseVector {
        let mut g = loss.full_grad(x);
        a.spmv_into(x, r);
        for (ri, vi) in r.iter_mut().zip(v) {
            *ri -= vi;
        }
        a.spmv_t_into(r, atr);
        axpy(beta, atr, &mut g);
        g
    };

    let mut g = gradient(&x, &mut r, &mut atr);
    passes += 1.0;
    let mut gn = norm(&g);
    let mut phi = merit(&x, &mut r);
    for _ in 0..max_newton {
        if gn <= tol {
            return Ok(XSolve { x, grad_norm: gn, passes });
        }
        let hv_count = std::cell::Cell::new(0usize);
        let tmp = std::cell::RefCell::new(vec![0.0; d2]);
        let tmp_t = std::cell::RefCell::new(vec![0.0; d1]);
        let hess = |p: &[f64], out: &mut [f64]| {
            hv_count.set(hv_count.get() + 1);
            loss.hess_vec_into(&x, p, out);
            let mut t = tmp.borrow_mut();
            let mut tt = tmp_t.borrow_mut();
            a.spmv_into(p, &mut t);
            a.spmv_t_into(&t, &mut tt);
            axpy(beta, &tt, out);
        };
        let neg_g: DenseVector = g.iter().map(|v| -v).collect();
        let forcing = (0.1f64).min(gn.sqrt()).max(1e-14);
        let (p, _) = match conjugate_gradient(hess, &neg_g, None, forcing, 50 * d1.max(10)) {
            Ok(res) => res,
            Err(Error::NotConverged { .. }) => (neg_g.clone(), 0),
            Err(e) => return Err(e),
        };
        passes += hv_count.get() as f64;

        let slope = dot(&g, &p);
        let mut t = 1.0;
        let mut accepted = false;
        let mut trial = vec![0.0; d1];
        for _ in 0..40 {
            for ((ti, xi), pi) in trial.iter_mut().zip(&x).zip(&p) {
                *ti = xi + t * pi;
            }
            let phi_t = merit(&trial, &mut r);
            passes += 1.0;
            if phi_t <= phi + 1e-4 * t * slope || (phi_t - phi).abs() <= 1e-15 * phi.abs().max(1.0) {
                let g_t = gradient(&trial, &mut r, &mut atr);
                passes += 1.0;
                let gn_t = norm(&g_t);
                if phi_t <= phi + 1e-4 * t * slope || gn_t < gn {
                    x.copy_from_slice(&trial);
                    g = g_t;
                    gn = gn_t;
                    phi = phi_t;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    Ok(XSolve { x, grad_norm: gn, passes })
}

/// One batch ADMM iteration: `y ← prox(Ax + λ)`, `x ← argmin_x f(x) +
/// (β/2)‖Ax − y + λ‖²`, `λ ← λ + Ax − y`.
pub fn batch_admm_epoch<F: FiniteSum>(
    state: &mut AdmmState,
    problem: &Problem<F>,
    config: &SolverConfig,
    ws: &mut Workspace,
) -> Result<()> {
    let a = &problem.a;
    let beta = config.beta;
    let d2 = problem.dual_dim();
    let mut ax = vec![0.0; d2];
    a.spmv_into(&state.x, &mut ax);
    let mut y = vec![0.0; d2];
    y_update_into(&problem.reg, &ax, &state.lambda_dual, beta, &mut y);

    let v: DenseVector = y.iter().zip(&state.lambda_dual).map(|(yi, u)| yi - u).collect();
    let x_new = match config.x_update {
        XUpdate::Exact => {
            let sol = solve_x_subproblem(problem, &v, beta, &state.x, config.inner_tol, 200)?;
            state.passes += sol.passes;
            sol.x
        }
        XUpdate::Linearized => {
            let ata = ws.ata_norm(a)?;
            let gamma = match config.gamma {
                Gamma::Fixed(g) => g,
                Gamma::Auto => config.eta * beta * ata + 1.0,
            };
            state.gamma = gamma;
            let mut g = problem.loss.full_grad(&state.x);
            state.passes += 1.0;
            let r: DenseVector = ax.iter().zip(&v).map(|(p, q)| p - q).collect();
            let mut atr = vec![0.0; problem.dim()];
            a.spmv_t_into(&r, &mut atr);
            axpy(beta, &atr, &mut g);
            let mut x = state.x.clone();
            axpy(-config.eta / gamma, &g, &mut x);
            x
        }
    };

    a.spmv_into(&x_new, &mut ax);
    for ((u, axi), yi) in state.lambda_dual.iter_mut().zip(&ax).zip(&y) {
        *u += axi - yi;
    }
    state.x = x_new;
    state.z.clone_from(&state.x);
    state.y = y;
    state.x_tilde.clone_from(&state.x);
    state.z_tilde.clone_from(&state.x);
    state.y_tilde.clone_from(&state.y);
    state.lambda_tilde.clone_from(&state.lambda_dual);
    state.epoch += 1;
    state.step += 1;
    state.ensure_finite()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::SparseMatrixCsr;
    use crate::losses::LeastSquares;
    use crate::prox::Regularizer;
    use approx::assert_relative_eq;

    /// f(x) = ½(x − 3)² on one sample, h = 0, A = 2 (1-D). KKT: x* = 3,
    /// y* = 6, λ* = 0.
    fn quad_1d() -> Problem<LeastSquares> {
        let ls = LeastSquares::new(SparseMatrixCsr::identity(1), vec![3.0], 0.0).unwrap();
        let a = SparseMatrixCsr::from_dense(&[vec![2.0]]).unwrap();
        Problem::new(ls, Regularizer::None, a).unwrap()
    }

    #[test]
    fn converges_to_kkt_point() {
        let p = quad_1d();
        let cfg = SolverConfig { beta: 1.0, ..Default::default() };
        let mut st = AdmmState::zeros(1, 1);
        let mut ws = Workspace::default();
        for _ in 0..200 {
            batch_admm_epoch(&mut st, &p, &cfg, &mut ws).unwrap();
        }
        assert_relative_eq!(st.x[0], 3.0, epsilon = 1e-8);
        assert!(p.constraint_violation(&st.x, &st.y) <= 1e-8);
    }

    #[test]
    fn optimal_state_is_a_fixed_point() {
        let p = quad_1d();
        let cfg = SolverConfig { beta: 0.7, ..Default::default() };
        let mut st = AdmmState::zeros(1, 1);
        st.x = vec![3.0];
        st.y = vec![6.0];
        let before = st.clone();
        batch_admm_epoch(&mut st, &p, &cfg, &mut Workspace::default()).unwrap();
        assert_relative_eq!(st.x[0], before.x[0], epsilon = 1e-10);
        assert_relative_eq!(st.y[0], before.y[0], epsilon = 1e-10);
        assert_relative_eq!(st.lambda_dual[0], 0.0, epsilon = 1e-10);
    }

    #[test]
    fn dual_step_equals_residual() {
        let p = quad_1d();
        let cfg = SolverConfig { beta: 2.0, ..Default::default() };
        let mut st = AdmmState::zeros(1, 1);
        let mut ws = Workspace::default();
        for _ in 0..5 {
            let prev = st.lambda_dual.clone();
            batch_admm_epoch(&mut st, &p, &cfg, &mut ws).unwrap();
            let resid = 2.0 * st.x[0] - st.y[0];
            assert_relative_eq!(st.lambda_dual[0] - prev[0], resid, epsilon = 1e-14);
        }
    }

    #[test]
    fn linearized_variant_also_converges() {
        let p = quad_1d();
        let cfg = SolverConfig {
            beta: 0.5,
            eta: 0.5,
            gamma: Gamma::Auto,
            x_update: XUpdate::Linearized,
            ..Default::default()
        };
        let mut st = AdmmState::zeros(1, 1);
        let mut ws = Workspace::default();
        for _ in 0..2000 {
            batch_admm_epoch(&mut st, &p, &cfg, &mut ws).unwrap();
        }
        assert_relative_eq!(st.x[0], 3.0, epsilon = 1e-6);
    }
}
