//! Comma-separated trajectory and series export.
//!
//! Values are written as `{:.16e}`: 17 significant digits, enough for every
//! `f64` to parse back to the same bits.

use std::io::Write;
use std::path::Path;

use ::csv::{ReaderBuilder, Terminator, WriterBuilder};

use crate::error::{Error, Result};
use crate::integrator::Trajectory;
use crate::scalar::Scalar;

fn io_err(e: ::csv::Error) -> Error {
    Error::Io(e.to_string())
}

fn number(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes columns with a shared first column `t_ns` to any sink.
pub fn write_columns<W: Write>(sink: W, times: &[f64], names: &[String], columns: &[Vec<f64>]) -> Result<()> {
    if names.len() != columns.len() || columns.iter().any(|c| c.len() != times.len()) {
        return Err(Error::LayoutMismatch {
            expected: times.len(),
            got: columns.iter().map(Vec::len).min().unwrap_or(0),
        });
    }
    let mut w = WriterBuilder::new()
        .terminator(Terminator::Any(b'\n'))
        .from_writer(sink);
    let mut header = vec!["t_ns".to_string()];
    header.extend(names.iter().cloned());
    w.write_record(&header).map_err(io_err)?;
    let mut row = Vec::with_capacity(names.len() + 1);
    for (i, t) in times.iter().enumerate() {
        row.clear();
        row.push(number(*t));
        row.extend(columns.iter().map(|c| number(c[i])));
        w.write_record(&row).map_err(io_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes the selected channels of a trajectory (all when `channels` is
/// `None`) to `path`.
pub fn write_csv<T: Scalar>(traj: &Trajectory<T>, channels: Option<&[String]>, path: &Path) -> Result<()> {
    let names: Vec<String> = channels.map_or_else(|| traj.channels().to_vec(), |c| c.to_vec());
    let columns = names
        .iter()
        .map(|n| traj.column(n).map(|c| c.iter().map(|x| x.as_f64()).collect()))
        .collect::<Result<Vec<Vec<f64>>>>()?;
    let times: Vec<f64> = traj.times().iter().map(|x| x.as_f64()).collect();
    let file = std::fs::File::create(path)?;
    write_columns(std::io::BufWriter::new(file), &times, &names, &columns)
}

/// Writes named series sharing one time axis.
pub fn write_series_csv(times: &[f64], series: &[(String, Vec<f64>)], path: &Path) -> Result<()> {
    let names: Vec<String> = series.iter().map(|s| s.0.clone()).collect();
    let columns: Vec<Vec<f64>> = series.iter().map(|s| s.1.clone()).collect();
    let file = std::fs::File::create(path)?;
    write_columns(std::io::BufWriter::new(file), times, &names, &columns)
}

/// Reads a file written by this module: header and numeric rows.
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut r = ReaderBuilder::new().from_path(path).map_err(io_err)?;
    let header = r.headers().map_err(io_err)?.iter().map(String::from).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(io_err)?;
        let row = rec
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|_| Error::Io(format!("not a number: {f}")))
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok((header, rows))
}
