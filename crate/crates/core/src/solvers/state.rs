use crate::error::{check_len, Error, Result};
use crate::linalg::dense::{all_finite, dist, DenseVector};
use crate::linalg::{spectral_norm_ata, SparseMatrixCsr, SpectralConstants, TransposePinv};
use crate::losses::FiniteSum;
use crate::prox::{Coupling, Regularizer};
use crate::vr::Snapshot;

/// `min f(x) + h(y)` subject to `Ax − y = 0`.
#[derive(Debug, Clone)]
pub struct Problem<F> {
    pub loss: F,
    pub reg: Regularizer,
    pub a: SparseMatrixCsr,
    pub coupling: Coupling,
}

impl<F: FiniteSum> Problem<F> {
    pub fn new(loss: F, reg: Regularizer, a: SparseMatrixCsr) -> Result<Self> {
        check_len("penalty matrix columns", loss.dim(), a.cols())?;
        reg.validate()?;
        if loss.num_samples() == 0 {
            return Err(Error::EmptyDataset);
        }
        Ok(Self {
            loss,
            reg,
            a,
            coupling: Coupling::NegIdentityZeroOffset,
        })
    }

    /// `d₁`
    pub fn dim(&self) -> usize {
        self.a.cols()
    }

    /// `d₂`
    pub fn dual_dim(&self) -> usize {
        self.a.rows()
    }

    /// `f(x) + h(Ax)`.
    pub fn objective(&self, x: &[f64]) -> f64 {
        let mut ax = vec![0.0; self.dual_dim()];
        self.a.spmv_into(x, &mut ax);
        self.loss.value(x) + self.reg.value(&ax)
    }

    /// `‖Ax − y‖`.
    pub fn constraint_violation(&self, x: &[f64], y: &[f64]) -> f64 {
        let mut ax = vec![0.0; self.dual_dim()];
        self.a.spmv_into(x, &mut ax);
        dist(&ax, y)
    }

    /// `f(x) + h(y) + (β/2)‖Ax − y + λ‖²`, the scaled augmented Lagrangian
    /// (up to the constant `(β/2)‖λ‖²`).
    pub fn augmented_objective(&self, x: &[f64], y: &[f64], lambda_dual: &[f64], beta: f64) -> f64 {
        let mut ax = vec![0.0; self.dual_dim()];
        self.a.spmv_into(x, &mut ax);
        let pen: f64 = ax
            .iter()
            .zip(y)
            .zip(lambda_dual)
            .map(|((a, yi), u)| (a - yi + u).powi(2))
            .sum();
        self.loss.value(x) + self.reg.value(y) + 0.5 * beta * pen
    }
}

/// Iterates of every solver plus the epoch-level quantities.
///
/// For batch ADMM and STOC-ADMM the tilde fields mirror the current
/// iterate after each epoch, so `(x_tilde, y_tilde)` is always the
/// solver's reported estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmmState {
    pub z: DenseVector,
    pub x: DenseVector,
    pub y: DenseVector,
    pub lambda_dual: DenseVector,
    pub snapshot: Option<Snapshot>,
    pub x_tilde: DenseVector,
    pub y_tilde: DenseVector,
    pub lambda_tilde: DenseVector,
    pub z_tilde: DenseVector,
    /// `θ` to be used by the next epoch.
    pub theta: f64,
    /// `γ` used by the most recent epoch.
    pub gamma: f64,
    pub epoch: usize,
    /// Global inner-step counter (drives `η_k` of STOC-ADMM).
    pub step: usize,
    /// Component-gradient evaluations divided by `n`.
    pub passes: f64,
}

impl AdmmState {
    pub fn zeros(d1: usize, d2: usize) -> Self {
        Self {
            z: vec![0.0; d1],
            x: vec![0.0; d1],
            y: vec![0.0; d2],
            lambda_dual: vec![0.0; d2],
            snapshot: None,
            x_tilde: vec![0.0; d1],
            y_tilde: vec![0.0; d2],
            lambda_tilde: vec![0.0; d2],
            z_tilde: vec![0.0; d1],
            theta: 1.0,
            gamma: 1.0,
            epoch: 0,
            step: 0,
            passes: 0.0,
        }
    }

    pub fn is_finite(&self) -> bool {
        [&self.z, &self.x, &self.y, &self.lambda_dual, &self.x_tilde, &self.y_tilde, &self.lambda_tilde, &self.z_tilde]
            .iter()
            .all(|v| all_finite(v))
    }

    pub(crate) fn ensure_finite(&self) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(Error::Diverged { epoch: self.epoch })
        }
    }
}

/// Per-run shared data: `‖AᵀA‖₂` and the pseudo-inverse warm start.
#[derive(Debug, Clone)]
pub struct Workspace {
    ata_norm: Option<f64>,
    pub pinv: TransposePinv,
    pub spectral_tol: f64,
}

impl Default for Workspace {
    fn default() -> Self {
        Self::new(None)
    }
}

impl Workspace {
    pub fn new(spectra: Option<&SpectralConstants>) -> Self {
        Self {
            ata_norm: spectra.map(|s| s.ata_norm),
            pinv: TransposePinv::new(1e-12),
            spectral_tol: 1e-8,
        }
    }

    /// `‖AᵀA‖₂`, estimated on first use.
    pub fn ata_norm(&mut self, a: &SparseMatrixCsr) -> Result<f64> {
        if let Some(v) = self.ata_norm {
            return Ok(v);
        }
        let v = spectral_norm_ata(a, self.spectral_tol, 1_000_000)?;
        self.ata_norm = Some(v);
        Ok(v)
    }

    /// `λ̃ = −(1/β)(Aᵀ)^†∇f(x)`.
    pub fn dual_from_gradient(&mut self, a: &SparseMatrixCsr, grad: &[f64], beta: f64) -> Result<DenseVector> {
        let mut u = self.pinv.apply(a, grad)?;
        for v in &mut u {
            *v *= -1.0 / beta;
        }
        Ok(u)
    }
}
