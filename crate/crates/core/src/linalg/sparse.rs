use crate::error::{check_len, Error, Result};
use crate::linalg::dense::DenseVector;

/// Compressed-sparse-row matrix, immutable once built.
///
/// Invariants enforced by every constructor:
/// * `row_offsets.len() == rows + 1`, non-decreasing, ending at `nnz`;
/// * column indices are `< cols` and strictly increasing inside a row;
/// * no explicit zeros are stored.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrixCsr {
    rows: usize,
    cols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrixCsr {
    pub fn new(
        rows: usize,
        cols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if row_offsets.len() != rows + 1 {
            return Err(Error::InvalidMatrix(format!(
                "row_offsets has length {}, expected {}",
                row_offsets.len(),
                rows + 1
            )));
        }
        if col_indices.len() != values.len() {
            return Err(Error::InvalidMatrix(
                "col_indices and values differ in length".into(),
            ));
        }
        if row_offsets[0] != 0 || row_offsets[rows] != values.len() {
            return Err(Error::InvalidMatrix(
                "row_offsets must start at 0 and end at nnz".into(),
            ));
        }
        for r in 0..rows {
            let (lo, hi) = (row_offsets[r], row_offsets[r + 1]);
            if hi < lo {
                return Err(Error::InvalidMatrix(format!(
                    "row_offsets decreases at row {r}"
                )));
            }
            for k in lo..hi {
                if col_indices[k] >= cols {
                    return Err(Error::InvalidMatrix(format!(
                        "column index {} out of range in row {r}",
                        col_indices[k]
                    )));
                }
                if k > lo && col_indices[k] <= col_indices[k - 1] {
                    return Err(Error::InvalidMatrix(format!(
                        "column indices not strictly increasing in row {r}"
                    )));
                }
                if values[k] == 0.0 || !values[k].is_finite() {
                    return Err(Error::InvalidMatrix(format!(
                        "stored value at ({r}, {}) is zero or non-finite",
                        col_indices[k]
                    )));
                }
            }
        }
        Ok(Self {
            rows,
            cols,
            row_offsets,
            col_indices,
            values,
        })
    }

    /// Builds from `(row, col, value)` triplets; duplicates are summed and
    /// entries that end up zero are dropped.
    pub fn from_triplets(
        rows: usize,
        cols: usize,
        triplets: &[(usize, usize, f64)],
    ) -> Result<Self> {
        let mut sorted: Vec<(usize, usize, f64)> = triplets.to_vec();
        for &(r, c, _) in &sorted {
            if r >= rows || c >= cols {
                return Err(Error::InvalidMatrix(format!(
                    "triplet ({r}, {c}) outside {rows}x{cols}"
                )));
            }
        }
        sorted.sort_by_key(|&(r, c, _)| (r, c));
        let mut merged: Vec<(usize, usize, f64)> = Vec::with_capacity(sorted.len());
        for (r, c, v) in sorted {
            match merged.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => merged.push((r, c, v)),
            }
        }
        merged.retain(|t| t.2 != 0.0);

        let mut row_offsets = vec![0usize; rows + 1];
        for &(r, _, _) in &merged {
            row_offsets[r + 1] += 1;
        }
        for r in 0..rows {
            row_offsets[r + 1] += row_offsets[r];
        }
        let col_indices = merged.iter().map(|t| t.1).collect();
        let values = merged.iter().map(|t| t.2).collect();
        Self::new(rows, cols, row_offsets, col_indices, values)
    }

    pub fn from_dense(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut triplets = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            check_len("from_dense row", cols, row.len())?;
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    triplets.push((i, j, v));
                }
            }
        }
        Self::from_triplets(rows.len(), cols, &triplets)
    }

    pub fn identity(d: usize) -> Self {
        Self {
            rows: d,
            cols: d,
            row_offsets: (0..=d).collect(),
            col_indices: (0..d).collect(),
            values: vec![1.0; d],
        }
    }

    /// Stacks `self` on top of `other` (`[self; other]`).
    pub fn vstack(&self, other: &Self) -> Result<Self> {
        check_len("vstack columns", self.cols, other.cols)?;
        let nnz = self.nnz();
        let mut row_offsets = self.row_offsets.clone();
        row_offsets.extend(other.row_offsets[1..].iter().map(|o| o + nnz));
        let mut col_indices = self.col_indices.clone();
        col_indices.extend_from_slice(&other.col_indices);
        let mut values = self.values.clone();
        values.extend_from_slice(&other.values);
        Ok(Self {
            rows: self.rows + other.rows,
            cols: self.cols,
            row_offsets,
            col_indices,
            values,
        })
    }

    /// Returns `c * self`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if c == 0.0 || !c.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "cannot scale a sparse matrix by {c}"
            )));
        }
        let mut out = self.clone();
        for v in &mut out.values {
            *v *= c;
        }
        Ok(out)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Column indices and values of row `r`.
    #[inline]
    pub fn row(&self, r: usize) -> (&[usize], &[f64]) {
        let (lo, hi) = (self.row_offsets[r], self.row_offsets[r + 1]);
        (&self.col_indices[lo..hi], &self.values[lo..hi])
    }

    /// Inner product of row `r` with a dense vector.
    #[inline]
    pub fn row_dot(&self, r: usize, x: &[f64]) -> f64 {
        let (idx, val) = self.row(r);
        idx.iter().zip(val).map(|(&j, &v)| v * x[j]).sum()
    }

    pub fn row_norm_sq(&self, r: usize) -> f64 {
        self.row(r).1.iter().map(|v| v * v).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.cols]; self.rows];
        for (r, row) in out.iter_mut().enumerate() {
            let (idx, val) = self.row(r);
            for (&j, &v) in idx.iter().zip(val) {
                row[j] = v;
            }
        }
        out
    }

    /// `Ax`.
    pub fn spmv(&self, x: &[f64]) -> Result<DenseVector> {
        check_len("spmv input", self.cols, x.len())?;
        let mut out = vec![0.0; self.rows];
        self.spmv_into(x, &mut out);
        Ok(out)
    }

    /// `out = Ax` without allocation. Lengths are the caller's responsibility.
    pub fn spmv_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(out.len(), self.rows);
        for (r, o) in out.iter_mut().enumerate() {
            *o = self.row_dot(r, x);
        }
    }

    /// `A^T y`.
    pub fn spmv_t(&self, y: &[f64]) -> Result<DenseVector> {
        check_len("spmv_t input", self.rows, y.len())?;
        let mut out = vec![0.0; self.cols];
        self.spmv_t_into(y, &mut out);
        Ok(out)
    }

    /// `out = A^T y` without allocation.
    pub fn spmv_t_into(&self, y: &[f64], out: &mut [f64]) {
        debug_assert_eq!(y.len(), self.rows);
        debug_assert_eq!(out.len(), self.cols);
        out.fill(0.0);
        for (r, &yr) in y.iter().enumerate() {
            if yr == 0.0 {
                continue;
            }
            let (idx, val) = self.row(r);
            for (&j, &v) in idx.iter().zip(val) {
                out[j] += v * yr;
            }
        }
    }
}
