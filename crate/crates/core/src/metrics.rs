//! Optimality gap, KKT-certified reference optimum, held-out evaluation and
//! per-epoch trace records.

use crate::error::{check_len, Error, Result};
use crate::linalg::dense::{dot, norm, norm_inf, sub, DenseVector};
use crate::losses::{Dataset, FiniteSum, LossKind};
use crate::solvers::batch::newton_x_solve;
use crate::solvers::state::{AdmmState, Problem};

/// A primal-dual point satisfying the KKT conditions to `kkt_residual`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "harness", derive(serde::Serialize, serde::Deserialize))]
pub struct ReferenceSolution {
    pub x_star: DenseVector,
    pub y_star: DenseVector,
    /// Scaled dual: `∇f(x*) + βAᵀλ* = 0`.
    pub lambda_star: DenseVector,
    pub grad_f_star: DenseVector,
    /// `h'(y*) = βλ*`, the subgradient forced by the KKT conditions.
    pub h_subgrad_star: DenseVector,
    /// `f(x*) + h(Ax*)`.
    pub objective_star: f64,
    pub kkt_residual: f64,
    pub beta: f64,
    pub iterations: usize,
}

/// The three KKT residuals of a scaled-dual point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KktResiduals {
    /// `‖Ax − y‖`
    pub primal: f64,
    /// `‖∇f(x) + βAᵀλ‖`
    pub stationarity: f64,
    /// Max componentwise distance of `βλ` to `∂h(y)`.
    pub subgradient: f64,
}

impl KktResiduals {
    pub fn max(&self) -> f64 {
        self.primal.max(self.stationarity).max(self.subgradient)
    }
}

pub fn kkt_residuals<F: FiniteSum>(
    problem: &Problem<F>,
    x: &[f64],
    y: &[f64],
    lambda_dual: &[f64],
    beta: f64,
) -> KktResiduals {
    let mut g = problem.loss.full_grad(x);
    let mut at_l = vec![0.0; problem.dim()];
    problem.a.spmv_t_into(lambda_dual, &mut at_l);
    for (gi, a) in g.iter_mut().zip(&at_l) {
        *gi += beta * a;
    }
    let scaled: DenseVector = lambda_dual.iter().map(|u| beta * u).collect();
    KktResiduals {
        primal: problem.constraint_violation(x, y),
        stationarity: norm(&g),
        subgradient: problem.reg.subgradient_residual(y, &scaled),
    }
}

/// Residual ratio that triggers a penalty change in the reference solve.
const BALANCE: f64 = 2.0;

/// Options for [`compute_reference_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceOptions {
    pub tol: f64,
    /// Initial penalty; adapted by residual balancing.
    pub beta: f64,
    pub max_iter: usize,
}

impl Default for ReferenceOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            beta: 1.0,
            max_iter: 20_000,
        }
    }
}

/// Batch ADMM with exact `x`-solves until the largest KKT residual is below
/// `tol`.
pub fn compute_reference<F: FiniteSum>(problem: &Problem<F>, tol: f64) -> Result<ReferenceSolution> {
    compute_reference_with(problem, ReferenceOptions { tol, ..Default::default() })
}

pub fn compute_reference_with<F: FiniteSum>(problem: &Problem<F>, opts: ReferenceOptions) -> Result<ReferenceSolution> {
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {}", opts.tol)));
    }
    if !(opts.beta > 0.0) {
        return Err(Error::InvalidParameter(format!("beta must be positive, got {}", opts.beta)));
    }
    let (d1, d2) = (problem.dim(), problem.dual_dim());
    let a = &problem.a;
    let mut beta = opts.beta;
    let mut x = vec![0.0; d1];
    let mut y = vec![0.0; d2];
    let mut u = vec![0.0; d2];
    let mut ax = vec![0.0; d2];
    let inner_tol = (opts.tol * 1e-2).max(1e-15);
    let mut last = f64::INFINITY;

    for it in 1..=opts.max_iter {
        a.spmv_into(&x, &mut ax);
        crate::prox::y_update_into(&problem.reg, &ax, &u, beta, &mut y);
        let v: DenseVector = y.iter().zip(&u).map(|(yi, ui)| yi - ui).collect();
        // Near machine precision the line search can stall before
        // `inner_tol`; the KKT test below decides.
        x = newton_x_solve(problem, &v, beta, &x, inner_tol, 100)?.x;
        a.spmv_into(&x, &mut ax);
        for ((ui, axi), yi) in u.iter_mut().zip(&ax).zip(&y) {
            *ui += axi - yi;
        }
        let res = kkt_residuals(problem, &x, &y, &u, beta);
        last = res.max();
        if last <= opts.tol {
            let grad_f_star = problem.loss.full_grad(&x);
            let h_subgrad_star = u.iter().map(|ui| beta * ui).collect();
            return Ok(ReferenceSolution {
                objective_star: problem.objective(&x),
                x_star: x,
                y_star: y,
                lambda_star: u,
                grad_f_star,
                h_subgrad_star,
                kkt_residual: last,
                beta,
                iterations: it,
            });
        }
        // Residual balancing on the primal vs. subgradient residuals; the
        // scaled dual is rescaled so that βλ is unchanged.
        if it % 10 == 0 {
            let factor = if res.primal > BALANCE * res.subgradient {
                2.0
            } else if res.subgradient > BALANCE * res.primal {
                0.5
            } else {
                1.0
            };
            if factor != 1.0 {
                beta *= factor;
                for ui in &mut u {
                    *ui /= factor;
                }
            }
        }
    }
    Err(Error::NotConverged {
        what: "reference solution",
        iters: opts.max_iter,
        estimate: last,
    })
}

/// `P(x, y) = f(x) − f(x*) − ∇f(x*)ᵀ(x − x*) + h(y) − h(y*) − h'(y*)ᵀ(y − y*)`.
pub fn p_criterion<F: FiniteSum>(x: &[f64], y: &[f64], reference: &ReferenceSolution, problem: &Problem<F>) -> Result<f64> {
    check_len("P criterion x", reference.x_star.len(), x.len())?;
    check_len("P criterion y", reference.y_star.len(), y.len())?;
    let f_part = problem.loss.value(x)
        - problem.loss.value(&reference.x_star)
        - dot(&reference.grad_f_star, &sub(x, &reference.x_star));
    let h_part = problem.reg.value(y)
        - problem.reg.value(&reference.y_star)
        - dot(&reference.h_subgrad_star, &sub(y, &reference.y_star));
    Ok(f_part + h_part)
}

/// Mean data-fit loss and accuracy of `x` on `test`. A zero margin counts as
/// a misclassification. The ridge term is not part of the reported loss.
pub fn evaluate(x: &[f64], test: &Dataset, kind: LossKind) -> Result<(f64, f64)> {
    if test.is_empty() {
        return Err(Error::EmptyDataset);
    }
    check_len("evaluation point", test.dim(), x.len())?;
    let mut loss = 0.0;
    let mut correct = 0usize;
    for i in 0..test.len() {
        let t = test.margin(i, x);
        loss += kind.margin_loss(t);
        if t > 0.0 {
            correct += 1;
        }
    }
    let n = test.len() as f64;
    Ok((loss / n, correct as f64 / n))
}

/// Lower clamp applied to reported gaps.
pub const GAP_FLOOR: f64 = 1e-12;

/// One row of a convergence trace.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "harness", derive(serde::Serialize, serde::Deserialize))]
pub struct TraceRecord {
    pub epoch: usize,
    pub wall_seconds: f64,
    pub passes: f64,
    pub objective: f64,
    pub objective_gap: f64,
    pub p_criterion: f64,
    pub constraint_violation: f64,
    pub test_loss: f64,
    pub test_accuracy: f64,
    pub theta: f64,
    pub sup_z: f64,
    pub sup_lambda: f64,
}

impl TraceRecord {
    pub const HEADER: &'static str = "epoch,wall_seconds,passes,objective,objective_gap,p_criterion,\
constraint_violation,test_loss,test_accuracy,theta,sup_z,sup_lambda";

    /// Evaluates the epoch estimate `(x̃, ỹ)` of `state`. Gaps are `NaN`
    /// without a reference; test columns are `NaN` without a test set.
    pub fn from_state<F: FiniteSum>(
        problem: &Problem<F>,
        state: &AdmmState,
        wall_seconds: f64,
        reference: Option<&ReferenceSolution>,
        test: Option<(&Dataset, LossKind)>,
    ) -> Result<Self> {
        let objective = problem.objective(&state.x_tilde);
        let (objective_gap, p) = match reference {
            Some(r) => (
                (objective - r.objective_star).max(GAP_FLOOR),
                p_criterion(&state.x_tilde, &state.y_tilde, r, problem)?.max(GAP_FLOOR),
            ),
            None => (f64::NAN, f64::NAN),
        };
        let (test_loss, test_accuracy) = match test {
            Some((data, kind)) => evaluate(&state.x_tilde, data, kind)?,
            None => (f64::NAN, f64::NAN),
        };
        Ok(Self {
            epoch: state.epoch,
            wall_seconds,
            passes: state.passes,
            objective,
            objective_gap,
            p_criterion: p,
            constraint_violation: problem.constraint_violation(&state.x_tilde, &state.y_tilde),
            test_loss,
            test_accuracy,
            theta: state.theta,
            sup_z: norm_inf(&state.z),
            sup_lambda: norm_inf(&state.lambda_dual),
        })
    }
}
