use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::CliError;

/// 17 significant digits.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>, CliError> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    Ok(csv::Writer::from_writer(BufWriter::new(file)))
}

pub fn write_csv_1d(path: &Path, ts: &[f64], values: &[f64]) -> Result<(), CliError> {
    let mut w = writer(path)?;
    let err = |e: csv::Error| CliError::config(format!("writing {}: {e}", path.display()));
    w.write_record(["t", "value"]).map_err(err)?;
    for (t, v) in ts.iter().zip(values) {
        w.write_record([num(*t), num(*v)]).map_err(err)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn write_csv_2d(path: &Path, points: &[(f64, f64)], values: &[f64]) -> Result<(), CliError> {
    let mut w = writer(path)?;
    let err = |e: csv::Error| CliError::config(format!("writing {}: {e}", path.display()));
    w.write_record(["t", "s", "value"]).map_err(err)?;
    for ((t, s), v) in points.iter().zip(values) {
        w.write_record([num(*t), num(*s), num(*v)]).map_err(err)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value)
        .map_err(|e| CliError::config(format!("writing {}: {e}", path.display())))?;
    w.write_all(b"\n").map_err(|e| CliError::io(path, e))?;
    w.flush().map_err(|e| CliError::io(path, e))
}
