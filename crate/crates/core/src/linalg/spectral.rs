use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::dense::{dot, norm, scale};
use crate::linalg::sparse::SparseMatrixCsr;

/// Below this ratio to the largest eigenvalue the smaller Gram matrix is
/// treated as singular.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// Spectral quantities of the coupling matrix used by the step-size and
/// rate formulas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralConstants {
    /// `‖AᵀA‖₂`
    pub ata_norm: f64,
    /// Smallest eigenvalue of the smaller Gram matrix (see [`min_eig_aat`]).
    pub aat_min_eig: f64,
    pub tol: f64,
    pub iters_used: usize,
}

impl SpectralConstants {
    pub fn compute(a: &SparseMatrixCsr, tol: f64, max_iter: usize) -> Result<Self> {
        let (ata_norm, it_max) = power_iteration_ata(a, tol, max_iter)?;
        let (aat_min_eig, it_min) = min_gram_eig(a, ata_norm, tol, max_iter)?;
        Ok(Self {
            ata_norm,
            aat_min_eig,
            tol,
            iters_used: it_max + it_min,
        })
    }

    /// `ω = ‖AᵀA‖₂ / σ_min`.
    pub fn omega(&self) -> f64 {
        self.ata_norm / self.aat_min_eig
    }
}

/// Start vector that depends only on the matrix shape, so estimates are
/// reproducible run to run.
fn start_vector(dim: usize, rows: usize, cols: usize) -> Vec<f64> {
    let seed = (rows as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ (cols as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
    let nv = norm(&v);
    scale(1.0 / nv, &mut v);
    v
}

/// Power iteration on a symmetric PSD operator. Returns the Rayleigh
/// quotient once `‖Mv − θv‖ ≤ tol·θ`.
fn power_iteration<F>(
    what: &'static str,
    mut v: Vec<f64>,
    apply: F,
    tol: f64,
    max_iter: usize,
) -> Result<(f64, usize)>
where
    F: Fn(&[f64], &mut [f64]),
{
    let mut w = vec![0.0; v.len()];
    let mut theta = 0.0;
    for it in 1..=max_iter {
        apply(&v, &mut w);
        theta = dot(&v, &w);
        let wn = norm(&w);
        if wn == 0.0 {
            return Err(Error::InvalidMatrix(format!("{what}: operator is zero")));
        }
        let resid = w
            .iter()
            .zip(&v)
            .map(|(wi, vi)| (wi - theta * vi).powi(2))
            .sum::<f64>()
            .sqrt();
        if resid <= tol * theta.abs() {
            return Ok((theta, it));
        }
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / wn;
        }
    }
    Err(Error::NotConverged {
        what,
        iters: max_iter,
        estimate: theta,
    })
}

fn apply_ata(a: &SparseMatrixCsr, v: &[f64], out: &mut [f64], tmp: &mut [f64]) {
    a.spmv_into(v, tmp);
    a.spmv_t_into(tmp, out);
}

fn apply_aat(a: &SparseMatrixCsr, v: &[f64], out: &mut [f64], tmp: &mut [f64]) {
    a.spmv_t_into(v, tmp);
    a.spmv_into(tmp, out);
}

fn power_iteration_ata(a: &SparseMatrixCsr, tol: f64, max_iter: usize) -> Result<(f64, usize)> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tol must be positive, got {tol}")));
    }
    if a.nnz() == 0 {
        return Err(Error::InvalidMatrix("spectral norm of an all-zero matrix".into()));
    }
    let tmp = std::cell::RefCell::new(vec![0.0; a.rows()]);
    power_iteration(
        "spectral_norm_ata",
        start_vector(a.cols(), a.rows(), a.cols()),
        |v, out| apply_ata(a, v, out, &mut tmp.borrow_mut()),
        tol,
        max_iter,
    )
}

/// Estimate of `‖AᵀA‖₂` by power iteration on `AᵀA`.
pub fn spectral_norm_ata(a: &SparseMatrixCsr, tol: f64, max_iter: usize) -> Result<f64> {
    power_iteration_ata(a, tol, max_iter).map(|(v, _)| v)
}

fn min_gram_eig(
    a: &SparseMatrixCsr,
    max_eig: f64,
    tol: f64,
    max_iter: usize,
) -> Result<(f64, usize)> {
    let wide = a.rows() <= a.cols();
    let dim = if wide { a.rows() } else { a.cols() };
    let tmp = std::cell::RefCell::new(vec![0.0; if wide { a.cols() } else { a.rows() }]);
    let gram = |v: &[f64], out: &mut [f64]| {
        if wide {
            apply_aat(a, v, out, &mut tmp.borrow_mut());
        } else {
            apply_ata(a, v, out, &mut tmp.borrow_mut());
        }
    };
    // Shifted operator s·I − M; its dominant eigenvalue is s − λ_min(M).
    let shift = max_eig * (1.0 + 1e-3);
    let mut v = start_vector(dim, a.rows(), a.cols());
    let mut w = vec![0.0; dim];
    let mut estimate = max_eig;
    for it in 1..=max_iter {
        gram(&v, &mut w);
        let rayleigh = dot(&v, &w);
        estimate = rayleigh;
        let resid = w
            .iter()
            .zip(&v)
            .map(|(wi, vi)| (wi - rayleigh * vi).powi(2))
            .sum::<f64>()
            .sqrt();
        if resid <= tol * rayleigh.max(0.0) {
            if rayleigh < RANK_TOLERANCE * max_eig {
                break;
            }
            return Ok((rayleigh, it));
        }
        if resid <= tol * max_eig && rayleigh < RANK_TOLERANCE * max_eig {
            break;
        }
        // w ← (s·I − M) v
        for (wi, vi) in w.iter_mut().zip(&v) {
            *wi = shift * vi - *wi;
        }
        let wn = norm(&w);
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / wn;
        }
        if it == max_iter {
            return Err(Error::NotConverged {
                what: "min_eig_aat",
                iters: max_iter,
                estimate,
            });
        }
    }
    Err(Error::RankDeficient {
        min_eig: estimate.max(0.0),
        max_eig,
    })
}

/// Smallest eigenvalue of the smaller Gram matrix of `A`: `AAᵀ` when
/// `A` is square or wide (equal to `σ_min(AAᵀ)`), `AᵀA` when `A` is tall.
/// For a tall full-column-rank `A` such as `[G; I]` this is the smallest
/// nonzero eigenvalue of `AAᵀ`.
///
/// Fails with [`Error::RankDeficient`] when the estimate falls below
/// `1e-10·‖AᵀA‖₂`.
pub fn min_eig_aat(a: &SparseMatrixCsr, tol: f64, max_iter: usize) -> Result<f64> {
    let (max_eig, _) = power_iteration_ata(a, tol, max_iter)?;
    min_gram_eig(a, max_eig, tol, max_iter).map(|(v, _)| v)
}
