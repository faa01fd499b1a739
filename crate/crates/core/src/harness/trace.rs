//! Trace CSV files: one row per epoch, plus per-epoch medians across seeds.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::metrics::TraceRecord;

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::InvalidParameter(format!("trace csv: {other:?}")),
    }
}

pub fn write_trace<W: Write>(records: &[TraceRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if records.is_empty() {
        w.write_record(TraceRecord::HEADER.split(',')).map_err(csv_error)?;
    }
    for r in records {
        w.serialize(r).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

/// Fails unless the header matches [`TraceRecord::HEADER`] exactly.
pub fn read_trace<R: Read>(input: R) -> Result<Vec<TraceRecord>> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers().map_err(csv_error)?.iter().collect::<Vec<_>>().join(",");
    if header != TraceRecord::HEADER {
        return Err(Error::Parse { line: 1, msg: format!("unexpected trace header '{header}'") });
    }
    r.deserialize()
        .enumerate()
        .map(|(k, row)| {
            row.map_err(|e| Error::Parse { line: k + 2, msg: e.to_string() })
        })
        .collect()
}

pub fn write_trace_file(path: &Path, records: &[TraceRecord]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::from(e).with_context(format!("creating {}", path.display())))?;
    write_trace(records, std::io::BufWriter::new(file))
}

pub fn read_trace_file(path: &Path) -> Result<Vec<TraceRecord>> {
    let file = File::open(path).map_err(|e| Error::from(e).with_context(format!("opening {}", path.display())))?;
    read_trace(std::io::BufReader::new(file))
}

/// Median over seeds of every column at one epoch of one solver.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub solver: String,
    pub seeds: usize,
    pub median: TraceRecord,
}

/// Median of the finite values; `NaN` when there are none.
pub fn median(values: &[f64]) -> f64 {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| !x.is_nan()).collect();
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let k = v.len() / 2;
    if v.len() % 2 == 1 {
        v[k]
    } else {
        0.5 * (v[k - 1] + v[k])
    }
}

/// Epoch-wise medians; traces are truncated to the shortest one.
pub fn summarize(solver: &str, traces: &[Vec<TraceRecord>]) -> Vec<SummaryRow> {
    let len = traces.iter().map(Vec::len).min().unwrap_or(0);
    (0..len)
        .map(|e| {
            let col = |f: fn(&TraceRecord) -> f64| median(&traces.iter().map(|t| f(&t[e])).collect::<Vec<_>>());
            SummaryRow {
                solver: solver.to_string(),
                seeds: traces.len(),
                median: TraceRecord {
                    epoch: traces[0][e].epoch,
                    wall_seconds: col(|r| r.wall_seconds),
                    passes: col(|r| r.passes),
                    objective: col(|r| r.objective),
                    objective_gap: col(|r| r.objective_gap),
                    p_criterion: col(|r| r.p_criterion),
                    constraint_violation: col(|r| r.constraint_violation),
                    test_loss: col(|r| r.test_loss),
                    test_accuracy: col(|r| r.test_accuracy),
                    theta: col(|r| r.theta),
                    sup_z: col(|r| r.sup_z),
                    sup_lambda: col(|r| r.sup_lambda),
                },
            }
        })
        .collect()
}

pub fn write_summary<W: Write>(rows: &[SummaryRow], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    let header = format!("solver,seeds,{}", TraceRecord::HEADER);
    w.write_record(header.split(',')).map_err(csv_error)?;
    for r in rows {
        w.serialize((&r.solver, r.seeds, &r.median)).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}
