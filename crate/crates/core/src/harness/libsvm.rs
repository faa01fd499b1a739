//! Sparse `<label> <index>:<value> ...` text format with 1-based indices.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::SparseMatrixCsr;
use crate::losses::Dataset;

pub fn parse_libsvm(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::from(e).with_context(format!("opening {}", path.display())))?;
    read_libsvm(BufReader::new(file), None).map_err(|e| e.with_context(path.display().to_string()))
}

/// Parses from any reader. `dim` overrides the feature count, which is
/// otherwise the largest index seen.
///
/// Labels `{0, 1}` are mapped to `{−1, +1}`; any other label set must
/// already be `±1`.
pub fn read_libsvm<R: BufRead>(reader: R, dim: Option<usize>) -> Result<Dataset> {
    let mut offsets = vec![0usize];
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    let mut raw_labels = Vec::new();
    let mut max_col = 0usize;

    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = lineno + 1;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut tokens = content.split_whitespace();
        let label_tok = tokens.next().expect("non-empty line has a token");
        let label: f64 = label_tok.parse().map_err(|_| Error::Parse {
            line: lineno,
            msg: format!("bad label '{label_tok}'"),
        })?;
        if !label.is_finite() {
            return Err(Error::Parse { line: lineno, msg: format!("bad label '{label_tok}'") });
        }
        let row_start = cols.len();
        let mut prev: Option<usize> = None;
        for tok in tokens {
            let (idx, val) = tok.split_once(':').ok_or_else(|| Error::Parse {
                line: lineno,
                msg: format!("expected index:value, got '{tok}'"),
            })?;
            let idx: usize = idx.parse().map_err(|_| Error::Parse {
                line: lineno,
                msg: format!("bad index '{idx}'"),
            })?;
            if idx == 0 {
                return Err(Error::Parse { line: lineno, msg: "indices are 1-based".into() });
            }
            let val: f64 = val.parse().map_err(|_| Error::Parse {
                line: lineno,
                msg: format!("bad value '{val}'"),
            })?;
            if !val.is_finite() {
                return Err(Error::Parse { line: lineno, msg: format!("non-finite value '{val}'") });
            }
            let col = idx - 1;
            if let Some(p) = prev {
                if col <= p {
                    return Err(Error::Parse { line: lineno, msg: "indices must be strictly increasing".into() });
                }
            }
            prev = Some(col);
            max_col = max_col.max(idx);
            if val != 0.0 {
                cols.push(col);
                vals.push(val);
            }
        }
        debug_assert!(cols.len() >= row_start);
        offsets.push(cols.len());
        raw_labels.push((lineno, label));
    }
    if raw_labels.is_empty() {
        return Err(Error::EmptyDataset);
    }

    let zero_one = raw_labels.iter().all(|&(_, l)| l == 0.0 || l == 1.0);
    let mut labels = Vec::with_capacity(raw_labels.len());
    for &(line, l) in &raw_labels {
        let mapped = if zero_one {
            if l == 1.0 { 1.0 } else { -1.0 }
        } else if l == 1.0 || l == -1.0 {
            l
        } else {
            return Err(Error::Parse { line, msg: format!("label {l} is not in {{0, 1}} or {{-1, +1}}") });
        };
        labels.push(mapped);
    }

    let d = match dim {
        Some(d) if d < max_col => {
            return Err(Error::InvalidParameter(format!(
                "dimension override {d} is smaller than the largest index {max_col}"
            )))
        }
        Some(d) => d,
        None => max_col,
    };
    let features = SparseMatrixCsr::new(raw_labels.len(), d, offsets, cols, vals)?;
    Dataset::new(features, labels)
}

/// Writes `data` with `+1`/`-1` labels and shortest round-trip values.
pub fn write_libsvm<W: Write>(data: &Dataset, mut out: W) -> Result<()> {
    let x = data.features();
    for (i, &label) in data.labels().iter().enumerate() {
        write!(out, "{}", if label > 0.0 { "+1" } else { "-1" })?;
        let (idx, vals) = x.row(i);
        for (c, v) in idx.iter().zip(vals) {
            write!(out, " {}:{}", c + 1, v)?;
        }
        writeln!(out)?;
    }
    Ok(())
}
