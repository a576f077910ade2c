//! Trace CSV: header `chain,step,x_1,…,x_n`, one row per stored iterate,
//! chain-major. Floats use Rust's shortest round-trip formatting, so a trace
//! read back is bit-identical.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::samplers::Trace;

pub fn write_trace<W: Write>(trace: &Trace, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["chain".to_string(), "step".to_string()];
    header.extend((1..=trace.dim).map(|i| format!("x_{i}")));
    w.write_record(&header).map_err(csv_err)?;
    let mut row = Vec::with_capacity(trace.dim + 2);
    for chain in 0..trace.n_chains() {
        for (slot, step) in trace.stored_steps.iter().enumerate() {
            row.clear();
            row.push(chain.to_string());
            row.push(step.to_string());
            row.extend(trace.iterate(chain, slot).iter().map(|v| v.to_string()));
            w.write_record(&row).map_err(csv_err)?;
        }
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::TraceFormat(format!("{other:?}")),
    }
}

/// A trace as read back from CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceTable {
    pub dim: usize,
    pub chains: Vec<usize>,
    pub steps: Vec<usize>,
    /// Row-major, `dim` values per row.
    pub values: Vec<f64>,
}

impl TraceTable {
    pub fn len(&self) -> usize {
        self.chains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chains.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    /// Rows recorded at `step`, in file order.
    pub fn at_step(&self, step: usize) -> Vec<&[f64]> {
        (0..self.len()).filter(|&i| self.steps[i] == step).map(|i| self.row(i)).collect()
    }

    pub fn last_step(&self) -> Option<usize> {
        self.steps.iter().copied().max()
    }
}

pub fn read_trace<R: Read>(input: R) -> Result<TraceTable> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers().map_err(csv_err)?.clone();
    let dim = header.len().checked_sub(2).filter(|&d| d > 0).ok_or_else(|| bad_header(&header))?;
    let ok = header.get(0) == Some("chain")
        && header.get(1) == Some("step")
        && (1..=dim).all(|i| header.get(i + 1) == Some(format!("x_{i}").as_str()));
    if !ok {
        return Err(bad_header(&header));
    }
    let mut table = TraceTable { dim, chains: Vec::new(), steps: Vec::new(), values: Vec::new() };
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let field = |i: usize| rec.get(i).unwrap_or("");
        let parse_err = |i: usize| Error::TraceFormat(format!("row {}: bad field '{}'", line + 2, field(i)));
        table.chains.push(field(0).parse().map_err(|_| parse_err(0))?);
        table.steps.push(field(1).parse().map_err(|_| parse_err(1))?);
        for i in 0..dim {
            table.values.push(field(i + 2).parse().map_err(|_| parse_err(i + 2))?);
        }
    }
    Ok(table)
}

fn bad_header(h: &csv::StringRecord) -> Error {
    Error::TraceFormat(format!("unexpected header {:?}", h.iter().collect::<Vec<_>>()))
}
