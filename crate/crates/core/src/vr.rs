//! Mini-batch SVRG gradient estimator and the `δ(b)` variance factor.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{check_len, Error, Result};
use crate::linalg::dense::{dot, sub, DenseVector};
use crate::losses::FiniteSum;

/// Epoch anchor: the snapshot point and its full gradient `p̃ = ∇f(x̃)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub x_tilde: DenseVector,
    pub full_grad: DenseVector,
}

impl Snapshot {
    pub fn new<F: FiniteSum + ?Sized>(loss: &F, x_tilde: &[f64]) -> Result<Self> {
        check_len("snapshot point", loss.dim(), x_tilde.len())?;
        Ok(Self {
            x_tilde: x_tilde.to_vec(),
            full_grad: loss.full_grad(x_tilde),
        })
    }
}

/// Draws size-`b` mini-batches uniformly without replacement.
///
/// The generator for epoch `s` is ChaCha8 keyed by `seed` on stream `s`, so
/// any batch is reproducible from `(seed, epoch, k)`.
#[derive(Debug, Clone)]
pub struct BatchSampler {
    n: usize,
    b: usize,
    rng: ChaCha8Rng,
}

impl BatchSampler {
    pub fn new(n: usize, b: usize, seed: u64, epoch: u64) -> Result<Self> {
        if b == 0 || b > n {
            return Err(Error::InvalidParameter(format!(
                "batch size {b} must lie in [1, {n}]"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(epoch);
        Ok(Self { n, b, rng })
    }

    pub fn batch_size(&self) -> usize {
        self.b
    }

    /// Next batch, sorted ascending so reduction order does not depend on
    /// the draw order.
    pub fn draw(&mut self) -> Vec<usize> {
        let mut idx = if self.b == self.n {
            (0..self.n).collect()
        } else {
            rand::seq::index::sample(&mut self.rng, self.n, self.b).into_vec()
        };
        idx.sort_unstable();
        idx
    }
}

fn check_batch(batch: &[usize], n: usize) -> Result<()> {
    if batch.is_empty() {
        return Err(Error::InvalidParameter("empty mini-batch".into()));
    }
    for (k, &i) in batch.iter().enumerate() {
        if i >= n {
            return Err(Error::IndexOutOfRange { index: i, len: n });
        }
        if batch[..k].contains(&i) {
            return Err(Error::InvalidParameter(format!("duplicate index {i} in mini-batch")));
        }
    }
    Ok(())
}

/// `out = (1/|I|) Σ_{i∈I} (∇f_i(x) − ∇f_i(x̃)) + p̃`, without validation.
pub fn vr_gradient_into<F: FiniteSum + ?Sized>(
    snap: &Snapshot,
    loss: &F,
    x: &[f64],
    batch: &[usize],
    out: &mut [f64],
) {
    out.copy_from_slice(&snap.full_grad);
    let w = 1.0 / batch.len() as f64;
    for &i in batch {
        loss.add_grad_difference(i, x, &snap.x_tilde, w, out);
    }
}

/// Variance-reduced mini-batch gradient estimate at `x`.
pub fn vr_gradient<F: FiniteSum + ?Sized>(
    snap: &Snapshot,
    loss: &F,
    x: &[f64],
    batch: &[usize],
) -> Result<DenseVector> {
    check_len("vr_gradient point", loss.dim(), x.len())?;
    check_len("snapshot dimension", loss.dim(), snap.x_tilde.len())?;
    check_len("snapshot gradient", loss.dim(), snap.full_grad.len())?;
    check_batch(batch, loss.num_samples())?;
    let mut out = vec![0.0; loss.dim()];
    vr_gradient_into(snap, loss, x, batch, &mut out);
    Ok(out)
}

/// `δ(b) = (n − b) / (b(n − 1))`, with `δ = 0` for `n = 1`.
pub fn delta_b(n: usize, b: usize) -> Result<f64> {
    if b == 0 || b > n {
        return Err(Error::InvalidParameter(format!(
            "batch size {b} must lie in [1, {n}]"
        )));
    }
    if n == 1 {
        return Ok(0.0);
    }
    Ok((n - b) as f64 / (b as f64 * (n - 1) as f64))
}

/// `2Lδ(b)[f(x̃) − f(x) + (x − x̃)ᵀ∇f(x)]`, the bound on the estimator's
/// expected squared error at `x`.
pub fn variance_bound_rhs<F: FiniteSum + ?Sized>(
    snap: &Snapshot,
    loss: &F,
    x: &[f64],
    l: f64,
    b: usize,
) -> Result<f64> {
    check_len("variance bound point", loss.dim(), x.len())?;
    check_len("snapshot dimension", loss.dim(), snap.x_tilde.len())?;
    let delta = delta_b(loss.num_samples(), b)?;
    let grad = loss.full_grad(x);
    let bracket = loss.value(&snap.x_tilde) - loss.value(x) + dot(&sub(x, &snap.x_tilde), &grad);
    Ok(2.0 * l * delta * bracket)
}
