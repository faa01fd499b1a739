use crate::error::{check_len, Error, Result};
use crate::linalg::dense::{axpy, dot, norm, DenseVector};
use crate::linalg::sparse::SparseMatrixCsr;

/// Conjugate gradient for a symmetric positive (semi)definite operator.
///
/// Stops once `‖b − Mx‖ ≤ tol·‖b‖`. `x0` is the warm start. Returns the
/// solution and the number of iterations taken.
pub fn conjugate_gradient<F>(
    apply: F,
    b: &[f64],
    x0: Option<&[f64]>,
    tol: f64,
    max_iter: usize,
) -> Result<(DenseVector, usize)>
where
    F: Fn(&[f64], &mut [f64]),
{
    let n = b.len();
    let bn = norm(b);
    if bn == 0.0 {
        return Ok((vec![0.0; n], 0));
    }
    let mut x = match x0 {
        Some(x0) => {
            check_len("conjugate_gradient warm start", n, x0.len())?;
            x0.to_vec()
        }
        None => vec![0.0; n],
    };
    let mut r = vec![0.0; n];
    apply(&x, &mut r);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    let mut rr = dot(&r, &r);
    if rr.sqrt() <= tol * bn {
        return Ok((x, 0));
    }
    let mut p = r.clone();
    let mut mp = vec![0.0; n];
    for it in 1..=max_iter {
        apply(&p, &mut mp);
        let pmp = dot(&p, &mp);
        if !(pmp > 0.0) {
            return Err(Error::NotConverged {
                what: "conjugate_gradient (operator not positive definite)",
                iters: it,
                estimate: rr.sqrt() / bn,
            });
        }
        let alpha = rr / pmp;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &mp, &mut r);
        let rr_new = dot(&r, &r);
        if rr_new.sqrt() <= tol * bn {
            return Ok((x, it));
        }
        let beta = rr_new / rr;
        for (pi, ri) in p.iter_mut().zip(&r) {
            *pi = ri + beta * *pi;
        }
        rr = rr_new;
    }
    Err(Error::NotConverged {
        what: "conjugate_gradient",
        iters: max_iter,
        estimate: rr.sqrt() / bn,
    })
}

fn cg_cap(dim: usize) -> usize {
    (10 * dim).max(1000)
}

fn aat_solve(a: &SparseMatrixCsr, v: &[f64], warm: Option<&[f64]>, tol: f64) -> Result<DenseVector> {
    check_len("solve_aat rhs", a.rows(), v.len())?;
    let tmp = std::cell::RefCell::new(vec![0.0; a.cols()]);
    let apply = |u: &[f64], out: &mut [f64]| {
        let mut t = tmp.borrow_mut();
        a.spmv_t_into(u, &mut t);
        a.spmv_into(&t, out);
    };
    conjugate_gradient(apply, v, warm, tol, cg_cap(a.rows()))
        .map(|(u, _)| u)
        .map_err(|e| match e {
            Error::NotConverged { estimate, .. } if a.rows() > a.cols() => Error::RankDeficient {
                min_eig: 0.0,
                max_eig: estimate,
            },
            e => e,
        })
}

fn ata_solve(a: &SparseMatrixCsr, w: &[f64], warm: Option<&[f64]>, tol: f64) -> Result<DenseVector> {
    check_len("solve_ata rhs", a.cols(), w.len())?;
    let tmp = std::cell::RefCell::new(vec![0.0; a.rows()]);
    let apply = |u: &[f64], out: &mut [f64]| {
        let mut t = tmp.borrow_mut();
        a.spmv_into(u, &mut t);
        a.spmv_t_into(&t, out);
    };
    conjugate_gradient(apply, w, warm, tol, cg_cap(a.cols())).map(|(u, _)| u)
}

/// Solves `AAᵀu = v` for full-row-rank `A` by conjugate gradient.
pub fn solve_aat(a: &SparseMatrixCsr, v: &[f64], tol: f64) -> Result<DenseVector> {
    aat_solve(a, v, None, tol)
}

/// Solves `AᵀAu = w` for full-column-rank `A` by conjugate gradient.
pub fn solve_ata(a: &SparseMatrixCsr, w: &[f64], tol: f64) -> Result<DenseVector> {
    ata_solve(a, w, None, tol)
}

/// Applies `(Aᵀ)^†` with a Krylov warm start carried across calls.
///
/// For square or wide full-row-rank `A` this is `(AAᵀ)⁻¹Aw`; for tall
/// full-column-rank `A` it is `A(AᵀA)⁻¹w`.
#[derive(Debug, Clone, Default)]
pub struct TransposePinv {
    warm: Option<DenseVector>,
    tol: f64,
}

impl TransposePinv {
    pub fn new(tol: f64) -> Self {
        Self { warm: None, tol }
    }

    pub fn apply(&mut self, a: &SparseMatrixCsr, w: &[f64]) -> Result<DenseVector> {
        check_len("pseudo-inverse input", a.cols(), w.len())?;
        let tol = if self.tol > 0.0 { self.tol } else { 1e-12 };
        if a.rows() <= a.cols() {
            let aw = a.spmv(w)?;
            let u = aat_solve(a, &aw, self.warm.as_deref(), tol)?;
            self.warm = Some(u.clone());
            Ok(u)
        } else {
            let u = ata_solve(a, w, self.warm.as_deref(), tol)?;
            let out = a.spmv(&u)?;
            self.warm = Some(u);
            Ok(out)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn solve_aat_examples() {
        let id = SparseMatrixCsr::identity(3);
        let v = vec![1.0, -2.0, 0.5];
        let u = solve_aat(&id, &v, 1e-14).unwrap();
        for (a, b) in u.iter().zip(&v) {
            assert_relative_eq!(a, b, max_relative = 1e-14);
        }

        let d = SparseMatrixCsr::from_triplets(2, 2, &[(0, 0, 2.0), (1, 1, 1.0)]).unwrap();
        let u = solve_aat(&d, &[4.0, 1.0], 1e-14).unwrap();
        assert_relative_eq!(u[0], 1.0, max_relative = 1e-12);
        assert_relative_eq!(u[1], 1.0, max_relative = 1e-12);

        assert_eq!(solve_aat(&d, &[0.0, 0.0], 1e-12).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn pinv_of_transpose_satisfies_normal_equations() {
        // Tall A: (Aᵀ)^† w must satisfy Aᵀ u = w with u in range(A).
        let g = SparseMatrixCsr::from_dense(&[vec![1.0, -1.0, 0.0], vec![0.0, 1.0, 1.0]]).unwrap();
        let a = g.vstack(&SparseMatrixCsr::identity(3)).unwrap();
        let w = vec![0.3, -1.0, 2.0];
        let mut p = TransposePinv::new(1e-13);
        let u = p.apply(&a, &w).unwrap();
        let back = a.spmv_t(&u).unwrap();
        for (x, y) in back.iter().zip(&w) {
            assert_relative_eq!(x, y, epsilon = 1e-11);
        }
        // warm start gives the same answer
        let u2 = p.apply(&a, &w).unwrap();
        for (x, y) in u.iter().zip(&u2) {
            assert_relative_eq!(x, y, epsilon = 1e-11);
        }
    }

    #[test]
    fn pinv_wide_matches_normal_form() {
        let a = SparseMatrixCsr::from_dense(&[vec![1.0, 0.0, 0.0], vec![0.0, 2.0, 0.0]]).unwrap();
        let mut p = TransposePinv::new(1e-14);
        // (AAᵀ)⁻¹ A w = diag(1, 1/4) (w0, 2 w1)
        let u = p.apply(&a, &[3.0, 4.0, 5.0]).unwrap();
        assert_relative_eq!(u[0], 3.0, max_relative = 1e-12);
        assert_relative_eq!(u[1], 2.0, max_relative = 1e-12);
    }
}
