//! Matrix Market coordinate format, for debugging dumps of `A`.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::linalg::sparse::SparseMatrixCsr;

pub const HEADER: &str = "%%MatrixMarket matrix coordinate real general";

pub fn write_matrix_market<W: Write>(a: &SparseMatrixCsr, mut out: W) -> Result<()> {
    writeln!(out, "{HEADER}")?;
    writeln!(out, "{} {} {}", a.rows(), a.cols(), a.nnz())?;
    for r in 0..a.rows() {
        let (idx, val) = a.row(r);
        for (&c, &v) in idx.iter().zip(val) {
            writeln!(out, "{} {} {:e}", r + 1, c + 1, v)?;
        }
    }
    Ok(())
}

pub fn read_matrix_market<R: BufRead>(input: R) -> Result<SparseMatrixCsr> {
    let mut lines = input.lines().enumerate();
    let header = match lines.next() {
        Some((_, l)) => l?,
        None => return Err(Error::Parse { line: 1, msg: "empty file".into() }),
    };
    if !header.trim().eq_ignore_ascii_case(HEADER) {
        return Err(Error::Parse {
            line: 1,
            msg: format!("unsupported header `{}`", header.trim()),
        });
    }
    let mut size: Option<(usize, usize, usize)> = None;
    let mut triplets = Vec::new();
    for (no, line) in lines {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let parse_err = |msg: &str| Error::Parse { line: no + 1, msg: msg.to_string() };
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(parse_err("expected three fields"));
        }
        match size {
            None => {
                let p = |s: &str| s.parse::<usize>().map_err(|_| parse_err("bad size line"));
                size = Some((p(fields[0])?, p(fields[1])?, p(fields[2])?));
            }
            Some((rows, cols, _)) => {
                let r: usize = fields[0].parse().map_err(|_| parse_err("bad row index"))?;
                let c: usize = fields[1].parse().map_err(|_| parse_err("bad column index"))?;
                let v: f64 = fields[2].parse().map_err(|_| parse_err("bad value"))?;
                if r == 0 || c == 0 || r > rows || c > cols {
                    return Err(parse_err("index out of range"));
                }
                triplets.push((r - 1, c - 1, v));
            }
        }
    }
    let (rows, cols, nnz) = size.ok_or(Error::Parse { line: 2, msg: "missing size line".into() })?;
    if triplets.len() != nnz {
        return Err(Error::Parse {
            line: 2,
            msg: format!("size line declares {nnz} entries, found {}", triplets.len()),
        });
    }
    SparseMatrixCsr::from_triplets(rows, cols, &triplets)
}
