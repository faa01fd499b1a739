//! Smooth finite-sum losses `f(x) = (1/n) Σ f_i(x)`.
//!
//! Every per-sample loss here has the form `f_i(x) = φ(b_i a_iᵀx) + (λ₂/2)‖x‖²`
//! (or a squared residual for [`LeastSquares`]), so gradients are a scalar
//! multiple of the sparse row `a_i` plus the ridge term.

use crate::error::{check_len, Error, Result};
use crate::linalg::dense::{axpy, dot, DenseVector};
use crate::linalg::SparseMatrixCsr;

/// Labeled samples: sparse feature rows with ±1 labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: SparseMatrixCsr,
    labels: Vec<f64>,
    norms_sq: Vec<f64>,
}

/// Borrowed view of one sample.
#[derive(Debug, Clone, Copy)]
pub struct Sample<'a> {
    pub indices: &'a [usize],
    pub values: &'a [f64],
    pub label: f64,
}

impl Dataset {
    pub fn new(features: SparseMatrixCsr, labels: Vec<f64>) -> Result<Self> {
        check_len("dataset labels", features.rows(), labels.len())?;
        if let Some(i) = labels.iter().position(|&b| b != 1.0 && b != -1.0) {
            return Err(Error::InvalidParameter(format!(
                "label {} of sample {i} is not ±1",
                labels[i]
            )));
        }
        let norms_sq = (0..features.rows()).map(|r| features.row_norm_sq(r)).collect();
        Ok(Self {
            features,
            labels,
            norms_sq,
        })
    }

    /// Convenience constructor from dense rows.
    pub fn from_dense(rows: &[Vec<f64>], labels: Vec<f64>) -> Result<Self> {
        Self::new(SparseMatrixCsr::from_dense(rows)?, labels)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Feature dimension `d₁`.
    pub fn dim(&self) -> usize {
        self.features.cols()
    }

    pub fn features(&self) -> &SparseMatrixCsr {
        &self.features
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn norms_sq(&self) -> &[f64] {
        &self.norms_sq
    }

    pub fn sample(&self, i: usize) -> Sample<'_> {
        let (indices, values) = self.features.row(i);
        Sample {
            indices,
            values,
            label: self.labels[i],
        }
    }

    /// `b_i a_iᵀx`
    #[inline]
    pub fn margin(&self, i: usize, x: &[f64]) -> f64 {
        self.labels[i] * self.features.row_dot(i, x)
    }

    /// Sub-dataset with the given sample indices, in order.
    pub fn select(&self, idx: &[usize]) -> Result<Self> {
        let mut offsets = vec![0usize];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        let mut labels = Vec::with_capacity(idx.len());
        for &i in idx {
            if i >= self.len() {
                return Err(Error::IndexOutOfRange { index: i, len: self.len() });
            }
            let (c, v) = self.features.row(i);
            cols.extend_from_slice(c);
            vals.extend_from_slice(v);
            offsets.push(cols.len());
            labels.push(self.labels[i]);
        }
        let features = SparseMatrixCsr::new(idx.len(), self.dim(), offsets, cols, vals)?;
        Self::new(features, labels)
    }
}

/// Which per-sample loss to use.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LossKind {
    Logistic,
    L2Logistic { lambda2: f64 },
    /// Smoothed hinge, quadratic for margins in `[1 − w, 1 + w]`.
    HuberizedHinge { lambda2: f64, huber_width: f64 },
}

pub const DEFAULT_HUBER_WIDTH: f64 = 0.5;

impl LossKind {
    pub fn validate(&self) -> Result<()> {
        match *self {
            LossKind::Logistic => Ok(()),
            LossKind::L2Logistic { lambda2 } if lambda2 >= 0.0 => Ok(()),
            LossKind::HuberizedHinge { lambda2, huber_width } if lambda2 >= 0.0 && huber_width > 0.0 => Ok(()),
            other => Err(Error::InvalidParameter(format!("invalid loss parameters {other:?}"))),
        }
    }

    pub fn lambda2(&self) -> f64 {
        match *self {
            LossKind::Logistic => 0.0,
            LossKind::L2Logistic { lambda2 } | LossKind::HuberizedHinge { lambda2, .. } => lambda2,
        }
    }

    /// Margin loss `φ(t)`.
    pub fn margin_loss(&self, t: f64) -> f64 {
        match *self {
            LossKind::Logistic | LossKind::L2Logistic { .. } => log1p_exp(-t),
            LossKind::HuberizedHinge { huber_width: w, .. } => {
                if t >= 1.0 + w {
                    0.0
                } else if t <= 1.0 - w {
                    1.0 - t
                } else {
                    (1.0 + w - t).powi(2) / (4.0 * w)
                }
            }
        }
    }

    /// `φ'(t)`
    pub fn margin_deriv(&self, t: f64) -> f64 {
        match *self {
            LossKind::Logistic | LossKind::L2Logistic { .. } => -sigmoid(-t),
            LossKind::HuberizedHinge { huber_width: w, .. } => {
                if t >= 1.0 + w {
                    0.0
                } else if t <= 1.0 - w {
                    -1.0
                } else {
                    -(1.0 + w - t) / (2.0 * w)
                }
            }
        }
    }

    /// `φ''(t)` (one-sided at the Huber kinks).
    pub fn margin_curvature(&self, t: f64) -> f64 {
        match *self {
            LossKind::Logistic | LossKind::L2Logistic { .. } => {
                let s = sigmoid(t);
                s * (1.0 - s)
            }
            LossKind::HuberizedHinge { huber_width: w, .. } => {
                if t > 1.0 - w && t < 1.0 + w {
                    1.0 / (2.0 * w)
                } else {
                    0.0
                }
            }
        }
    }

    /// Upper bound on `φ''`.
    pub fn max_curvature(&self) -> f64 {
        match *self {
            LossKind::Logistic | LossKind::L2Logistic { .. } => 0.25,
            LossKind::HuberizedHinge { huber_width, .. } => 1.0 / (2.0 * huber_width),
        }
    }
}

/// `log(1 + eᵘ)` without overflow.
#[inline]
pub fn log1p_exp(u: f64) -> f64 {
    if u > 0.0 {
        u + (-u).exp().ln_1p()
    } else {
        u.exp().ln_1p()
    }
}

#[inline]
pub fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// The interface the solvers need from a smooth finite sum.
pub trait FiniteSum: Sync {
    /// Number of components `n`.
    fn num_samples(&self) -> usize;

    /// Variable dimension `d₁`.
    fn dim(&self) -> usize;

    fn value(&self, x: &[f64]) -> f64;

    /// `out = ∇f_i(x)`.
    fn sample_grad_into(&self, i: usize, x: &[f64], out: &mut [f64]);

    /// `out += weight · (∇f_i(x) − ∇f_i(x_ref))`.
    fn add_grad_difference(&self, i: usize, x: &[f64], x_ref: &[f64], weight: f64, out: &mut [f64]) {
        let mut g = vec![0.0; self.dim()];
        self.sample_grad_into(i, x, &mut g);
        axpy(weight, &g, out);
        self.sample_grad_into(i, x_ref, &mut g);
        axpy(-weight, &g, out);
    }

    /// `out = ∇f(x)`, summed in sample order.
    fn full_grad_into(&self, x: &[f64], out: &mut [f64]) {
        let n = self.num_samples();
        let mut g = vec![0.0; self.dim()];
        out.fill(0.0);
        for i in 0..n {
            self.sample_grad_into(i, x, &mut g);
            axpy(1.0, &g, out);
        }
        let inv = 1.0 / n as f64;
        for o in out.iter_mut() {
            *o *= inv;
        }
    }

    fn full_grad(&self, x: &[f64]) -> DenseVector {
        let mut out = vec![0.0; self.dim()];
        self.full_grad_into(x, &mut out);
        out
    }

    /// `out = ∇²f(x) v`.
    fn hess_vec_into(&self, x: &[f64], v: &[f64], out: &mut [f64]);

    /// `L_i`.
    fn sample_smoothness(&self, i: usize) -> f64;

    /// `L = max_i L_i`.
    fn smoothness(&self) -> f64 {
        (0..self.num_samples())
            .map(|i| self.sample_smoothness(i))
            .fold(0.0, f64::max)
    }

    /// Strong-convexity modulus guaranteed by construction (the ridge weight).
    fn strong_convexity(&self) -> f64;
}

/// A [`LossKind`] bound to a dataset.
#[derive(Debug, Clone, Copy)]
pub struct Loss<'a> {
    pub kind: LossKind,
    pub data: &'a Dataset,
}

impl<'a> Loss<'a> {
    pub fn new(kind: LossKind, data: &'a Dataset) -> Result<Self> {
        kind.validate()?;
        Ok(Self { kind, data })
    }

    /// Mean margin loss without the ridge term.
    pub fn data_fit(&self, x: &[f64]) -> f64 {
        let n = self.data.len();
        (0..n)
            .map(|i| self.kind.margin_loss(self.data.margin(i, x)))
            .sum::<f64>()
            / n as f64
    }

    #[inline]
    fn coeff(&self, i: usize, x: &[f64]) -> f64 {
        self.data.labels[i] * self.kind.margin_deriv(self.data.margin(i, x))
    }

    fn add_row(&self, i: usize, scale: f64, out: &mut [f64]) {
        let (idx, val) = self.data.features.row(i);
        for (&j, &v) in idx.iter().zip(val) {
            out[j] += scale * v;
        }
    }
}

impl FiniteSum for Loss<'_> {
    fn num_samples(&self) -> usize {
        self.data.len()
    }

    fn dim(&self) -> usize {
        self.data.dim()
    }

    fn value(&self, x: &[f64]) -> f64 {
        let l2 = self.kind.lambda2();
        let ridge = if l2 > 0.0 { 0.5 * l2 * dot(x, x) } else { 0.0 };
        self.data_fit(x) + ridge
    }

    fn sample_grad_into(&self, i: usize, x: &[f64], out: &mut [f64]) {
        let l2 = self.kind.lambda2();
        for (o, xi) in out.iter_mut().zip(x) {
            *o = l2 * xi;
        }
        let c = self.coeff(i, x);
        self.add_row(i, c, out);
    }

    fn add_grad_difference(&self, i: usize, x: &[f64], x_ref: &[f64], weight: f64, out: &mut [f64]) {
        let c = self.coeff(i, x) - self.coeff(i, x_ref);
        if c != 0.0 {
            self.add_row(i, weight * c, out);
        }
        let l2 = self.kind.lambda2();
        if l2 > 0.0 {
            for ((o, a), b) in out.iter_mut().zip(x).zip(x_ref) {
                *o += weight * l2 * (a - b);
            }
        }
    }

    fn full_grad_into(&self, x: &[f64], out: &mut [f64]) {
        let n = self.data.len();
        out.fill(0.0);
        for i in 0..n {
            let c = self.coeff(i, x);
            self.add_row(i, c, out);
        }
        let inv = 1.0 / n as f64;
        let l2 = self.kind.lambda2();
        for (o, xi) in out.iter_mut().zip(x) {
            *o = *o * inv + l2 * xi;
        }
    }

    fn hess_vec_into(&self, x: &[f64], v: &[f64], out: &mut [f64]) {
        let n = self.data.len();
        out.fill(0.0);
        for i in 0..n {
            let t = self.data.margin(i, x);
            let w = self.kind.margin_curvature(t);
            if w != 0.0 {
                let av = self.data.features.row_dot(i, v);
                self.add_row(i, w * av, out);
            }
        }
        let inv = 1.0 / n as f64;
        let l2 = self.kind.lambda2();
        for (o, vi) in out.iter_mut().zip(v) {
            *o = *o * inv + l2 * vi;
        }
    }

    fn sample_smoothness(&self, i: usize) -> f64 {
        self.data.norms_sq[i] * self.kind.max_curvature() + self.kind.lambda2()
    }

    fn strong_convexity(&self) -> f64 {
        self.kind.lambda2()
    }
}

/// `f_i(x) = ½(a_iᵀx − t_i)² + (λ₂/2)‖x‖²`. Quadratic, so Newton and CG
/// based solves are exact; used for closed-form checks and demos.
#[derive(Debug, Clone)]
pub struct LeastSquares {
    pub design: SparseMatrixCsr,
    pub targets: Vec<f64>,
    pub lambda2: f64,
}

impl LeastSquares {
    pub fn new(design: SparseMatrixCsr, targets: Vec<f64>, lambda2: f64) -> Result<Self> {
        check_len("least-squares targets", design.rows(), targets.len())?;
        if design.rows() == 0 {
            return Err(Error::EmptyDataset);
        }
        Ok(Self { design, targets, lambda2 })
    }
}

impl FiniteSum for LeastSquares {
    fn num_samples(&self) -> usize {
        self.targets.len()
    }

    fn dim(&self) -> usize {
        self.design.cols()
    }

    fn value(&self, x: &[f64]) -> f64 {
        let n = self.targets.len() as f64;
        let fit: f64 = (0..self.targets.len())
            .map(|i| 0.5 * (self.design.row_dot(i, x) - self.targets[i]).powi(2))
            .sum();
        fit / n + 0.5 * self.lambda2 * dot(x, x)
    }

    fn sample_grad_into(&self, i: usize, x: &[f64], out: &mut [f64]) {
        for (o, xi) in out.iter_mut().zip(x) {
            *o = self.lambda2 * xi;
        }
        let r = self.design.row_dot(i, x) - self.targets[i];
        let (idx, val) = self.design.row(i);
        for (&j, &v) in idx.iter().zip(val) {
            out[j] += r * v;
        }
    }

    fn hess_vec_into(&self, _x: &[f64], v: &[f64], out: &mut [f64]) {
        let n = self.targets.len() as f64;
        let mut av = vec![0.0; self.design.rows()];
        self.design.spmv_into(v, &mut av);
        self.design.spmv_t_into(&av, out);
        for (o, vi) in out.iter_mut().zip(v) {
            *o = *o / n + self.lambda2 * vi;
        }
    }

    fn sample_smoothness(&self, i: usize) -> f64 {
        self.design.row_norm_sq(i) + self.lambda2
    }

    fn strong_convexity(&self) -> f64 {
        self.lambda2
    }
}

fn bind<'a>(kind: LossKind, data: &'a Dataset, x: &[f64]) -> Result<Loss<'a>> {
    let loss = Loss::new(kind, data)?;
    check_len("loss argument", data.dim(), x.len())?;
    Ok(loss)
}

/// `f(x)`, ridge term included.
pub fn loss_value(kind: LossKind, data: &Dataset, x: &[f64]) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok(bind(kind, data, x)?.value(x))
}

/// `∇f_i(x)`.
pub fn per_sample_grad(kind: LossKind, data: &Dataset, x: &[f64], i: usize) -> Result<DenseVector> {
    let loss = bind(kind, data, x)?;
    if i >= data.len() {
        return Err(Error::IndexOutOfRange { index: i, len: data.len() });
    }
    let mut out = vec![0.0; data.dim()];
    loss.sample_grad_into(i, x, &mut out);
    Ok(out)
}

/// `∇f(x)`.
pub fn full_grad(kind: LossKind, data: &Dataset, x: &[f64]) -> Result<DenseVector> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok(bind(kind, data, x)?.full_grad(x))
}

/// `L = max_i L_i` with `L_i = ‖a_i‖²·max φ'' + λ₂`.
pub fn smoothness_constant(kind: LossKind, data: &Dataset) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok(Loss::new(kind, data)?.smoothness())
}
