//! Sparse matrix kernels, spectral estimates and Krylov solves.

pub mod cg;
pub mod dense;
pub mod mtx;
pub mod sparse;
pub mod spectral;

pub use cg::{conjugate_gradient, solve_aat, solve_ata, TransposePinv};
pub use dense::DenseVector;
pub use sparse::SparseMatrixCsr;
pub use spectral::{min_eig_aat, spectral_norm_ata, SpectralConstants};
