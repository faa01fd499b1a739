//! Seeded synthetic classification data and train/test splitting.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::SparseMatrixCsr;
use crate::losses::{sigmoid, Dataset};

/// Dense features with block correlation: feature `j` in group `g` is
/// `c·F_g + √(1 − c²)·E_j` with standard normal factors, rows rescaled to
/// unit norm. Labels are drawn from a logistic model whose weights are
/// constant within each group (some groups zero), scaled by `signal`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupedGaussian {
    pub n: usize,
    pub d: usize,
    pub groups: usize,
    pub correlation: f64,
    pub signal: f64,
    pub seed: u64,
}

impl GroupedGaussian {
    pub fn new(n: usize, d: usize, seed: u64) -> Self {
        Self {
            n,
            d,
            groups: 5,
            correlation: 0.8,
            signal: 4.0,
            seed,
        }
    }

    pub fn generate(&self) -> Result<Dataset> {
        if self.n == 0 || self.d == 0 || self.groups == 0 {
            return Err(Error::InvalidParameter("synthetic sizes must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.correlation) {
            return Err(Error::InvalidParameter(format!(
                "correlation must lie in [0, 1), got {}",
                self.correlation
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let group_of = |j: usize| j * self.groups / self.d;
        let group_weight: Vec<f64> = (0..self.groups)
            .map(|g| match g % 3 {
                0 => 1.0,
                1 => -1.0,
                _ => 0.0,
            })
            .collect();
        let w: Vec<f64> = (0..self.d).map(|j| group_weight[group_of(j)]).collect();
        let c = self.correlation;
        let s = (1.0 - c * c).sqrt();

        let mut rows = Vec::with_capacity(self.n);
        let mut labels = Vec::with_capacity(self.n);
        for _ in 0..self.n {
            let factors: Vec<f64> = (0..self.groups).map(|_| rng.sample(StandardNormal)).collect();
            let mut row: Vec<f64> = (0..self.d)
                .map(|j| c * factors[group_of(j)] + s * rng.sample::<f64, _>(StandardNormal))
                .collect();
            let nrm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
            for v in &mut row {
                *v /= nrm;
            }
            let margin: f64 = row.iter().zip(&w).map(|(a, b)| a * b).sum();
            let p = sigmoid(self.signal * margin);
            labels.push(if rng.random::<f64>() < p { 1.0 } else { -1.0 });
            rows.push(row);
        }
        Dataset::from_dense(&rows, labels)
    }
}

/// Category counts of the 14 one-hot encoded attributes of the adult census
/// benchmark (123 binary features in total).
pub const CENSUS_GROUP_SIZES: [usize; 14] = [9, 8, 16, 16, 7, 14, 6, 5, 2, 3, 3, 5, 4, 25];

/// Sparse binary data shaped like the adult census benchmark: every sample
/// activates exactly one category of each attribute, with skewed category
/// frequencies, and labels follow a sparse logistic model with roughly one
/// quarter positives.
pub fn census_like(n: usize, seed: u64) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d: usize = CENSUS_GROUP_SIZES.iter().sum();
    let mut offsets = vec![0usize];
    let mut starts = Vec::with_capacity(CENSUS_GROUP_SIZES.len());
    let mut acc = 0;
    for &g in &CENSUS_GROUP_SIZES {
        starts.push(acc);
        acc += g;
    }
    // Category weights ∝ 1/(k+1) and a fixed sparse coefficient vector.
    let cumulative: Vec<Vec<f64>> = CENSUS_GROUP_SIZES
        .iter()
        .map(|&g| {
            let raw: Vec<f64> = (0..g).map(|k| 1.0 / (k as f64 + 1.0)).collect();
            let total: f64 = raw.iter().sum();
            raw.iter()
                .scan(0.0, |s, v| {
                    *s += v / total;
                    Some(*s)
                })
                .collect()
        })
        .collect();
    let mut coef_rng = ChaCha8Rng::seed_from_u64(0x05EE_D0F0_CE25_u64);
    let w: Vec<f64> = (0..d)
        .map(|_| {
            if coef_rng.random::<f64>() < 0.4 {
                coef_rng.sample::<f64, _>(StandardNormal) * 1.5
            } else {
                0.0
            }
        })
        .collect();
    let offset = -1.6;

    let mut cols = Vec::with_capacity(n * CENSUS_GROUP_SIZES.len());
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let mut margin = offset;
        for (g, cum) in cumulative.iter().enumerate() {
            let u: f64 = rng.random();
            let k = cum.iter().position(|&c| u < c).unwrap_or(cum.len() - 1);
            let col = starts[g] + k;
            cols.push(col);
            margin += w[col];
        }
        offsets.push(cols.len());
        labels.push(if rng.random::<f64>() < sigmoid(margin) { 1.0 } else { -1.0 });
    }
    let vals = vec![1.0; cols.len()];
    let features = SparseMatrixCsr::new(n, d, offsets, cols, vals)?;
    Dataset::new(features, labels)
}

/// Seeded shuffle, then the first `1 − test_fraction` of samples are the
/// training set.
pub fn split_train_test(data: &Dataset, test_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "test fraction must lie in (0, 1), got {test_fraction}"
        )));
    }
    let n = data.len();
    let n_test = ((n as f64) * test_fraction).round() as usize;
    if n_test == 0 || n_test == n {
        return Err(Error::InvalidParameter(format!(
            "a {test_fraction} split of {n} samples leaves an empty side"
        )));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (train, test) = idx.split_at(n - n_test);
    let mut train = train.to_vec();
    let mut test = test.to_vec();
    train.sort_unstable();
    test.sort_unstable();
    Ok((data.select(&train)?, data.select(&test)?))
}
