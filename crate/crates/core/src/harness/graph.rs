//! Graph-guided penalty matrix `A = [G; I]` from feature correlations or an
//! edge list.

use std::collections::BTreeSet;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::linalg::SparseMatrixCsr;
use crate::losses::Dataset;

/// Edge `(i, j, w)` contributes the row `eᵢ + w·eⱼ` to `G`.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphSpec {
    dim: usize,
    edges: Vec<(usize, usize, f64)>,
}

impl GraphSpec {
    /// Requires `i < j < dim`, nonzero finite weights and no repeated pairs.
    pub fn new(dim: usize, edges: Vec<(usize, usize, f64)>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for &(i, j, w) in &edges {
            if i >= j {
                return Err(Error::InvalidParameter(format!("edge ({i}, {j}) must have i < j")));
            }
            if j >= dim {
                return Err(Error::IndexOutOfRange { index: j, len: dim });
            }
            if !(w.is_finite() && w != 0.0) {
                return Err(Error::InvalidParameter(format!("edge ({i}, {j}) has weight {w}")));
            }
            if !seen.insert((i, j)) {
                return Err(Error::InvalidParameter(format!("duplicate edge ({i}, {j})")));
            }
        }
        Ok(Self { dim, edges })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    /// `[G; I]`, with one row per edge followed by the `dim × dim` identity.
    pub fn penalty_matrix(&self) -> Result<SparseMatrixCsr> {
        let mut trips = Vec::with_capacity(2 * self.edges.len());
        for (r, &(i, j, w)) in self.edges.iter().enumerate() {
            trips.push((r, i, 1.0));
            trips.push((r, j, w));
        }
        let g = SparseMatrixCsr::from_triplets(self.edges.len(), self.dim, &trips)?;
        g.vstack(&SparseMatrixCsr::identity(self.dim))
    }
}

/// Pearson correlation matrix of the feature columns (dense `d × d`).
/// Constant columns yield `None` rows.
pub fn feature_correlations(data: &Dataset) -> Vec<Option<Vec<f64>>> {
    let d = data.dim();
    let n = data.len() as f64;
    let x = data.features();
    let mut sum = vec![0.0; d];
    let mut cross = vec![0.0; d * d];
    for r in 0..data.len() {
        let (idx, vals) = x.row(r);
        for (a, (&i, &vi)) in idx.iter().zip(vals).enumerate() {
            sum[i] += vi;
            for (&j, &vj) in idx[a..].iter().zip(&vals[a..]) {
                cross[i * d + j] += vi * vj;
            }
        }
    }
    let mean: Vec<f64> = sum.iter().map(|s| s / n).collect();
    let var: Vec<f64> = (0..d).map(|i| cross[i * d + i] / n - mean[i] * mean[i]).collect();
    (0..d)
        .map(|i| {
            if var[i] <= 1e-12 * (1.0 + mean[i].abs()) {
                return None;
            }
            Some(
                (0..d)
                    .map(|j| {
                        if var[j] <= 1e-12 * (1.0 + mean[j].abs()) {
                            return 0.0;
                        }
                        let c = if i <= j { cross[i * d + j] } else { cross[j * d + i] };
                        ((c / n - mean[i] * mean[j]) / (var[i] * var[j]).sqrt()).clamp(-1.0, 1.0)
                    })
                    .collect(),
            )
        })
        .collect()
}

/// Edges for every pair with `|corr| > threshold`, weight `−sign(corr)`.
pub fn correlation_graph(data: &Dataset, threshold: f64) -> Result<GraphSpec> {
    if !(threshold > 0.0) {
        return Err(Error::InvalidParameter(format!("threshold must be positive, got {threshold}")));
    }
    let d = data.dim();
    let mut edges = Vec::new();
    if threshold < 1.0 {
        let corr = feature_correlations(data);
        let skipped = corr.iter().filter(|c| c.is_none()).count();
        if skipped > 0 {
            log::warn!("{skipped} constant feature(s) excluded from the correlation graph");
        }
        for (i, row) in corr.iter().enumerate() {
            let Some(row) = row else { continue };
            for j in i + 1..d {
                let c = row[j];
                if corr[j].is_some() && c.abs() > threshold {
                    edges.push((i, j, -c.signum()));
                }
            }
        }
    }
    GraphSpec::new(d, edges)
}

/// `A = [G; I]` with `G` from correlation thresholding.
pub fn build_graph_matrix(data: &Dataset, threshold: f64) -> Result<SparseMatrixCsr> {
    correlation_graph(data, threshold)?.penalty_matrix()
}

/// Reads whitespace-separated `i j [w]` lines (0-based, `w` defaults to −1).
pub fn read_edge_list<R: BufRead>(reader: R, dim: usize) -> Result<GraphSpec> {
    let mut edges = Vec::new();
    for (k, line) in reader.lines().enumerate() {
        let line = line?;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let bad = |msg: String| Error::Parse { line: k + 1, msg };
        let toks: Vec<&str> = content.split_whitespace().collect();
        if !(2..=3).contains(&toks.len()) {
            return Err(bad(format!("expected 'i j [w]', got '{content}'")));
        }
        let i: usize = toks[0].parse().map_err(|_| bad(format!("bad index '{}'", toks[0])))?;
        let j: usize = toks[1].parse().map_err(|_| bad(format!("bad index '{}'", toks[1])))?;
        let w: f64 = match toks.get(2) {
            Some(t) => t.parse().map_err(|_| bad(format!("bad weight '{t}'")))?,
            None => -1.0,
        };
        edges.push((i.min(j), i.max(j), w));
    }
    GraphSpec::new(dim, edges)
}

pub fn write_edge_list<W: Write>(graph: &GraphSpec, mut out: W) -> Result<()> {
    for &(i, j, w) in graph.edges() {
        writeln!(out, "{i} {j} {w}")?;
    }
    Ok(())
}
