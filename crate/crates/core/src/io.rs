//! CSV and file helpers shared by the solver outputs and the command line.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::Point;

/// Full double precision: 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Write `contents` to `path` through a sibling temporary file and a rename,
/// so readers never observe a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let name = path
        .file_name()
        .ok_or_else(|| Error::Io(format!("{} has no file name", path.display())))?
        .to_string_lossy();
    let tmp = path.with_file_name(format!(".{name}.{}.tmp", std::process::id()));
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path).inspect_err(|_| {
        let _ = fs::remove_file(&tmp);
    })?;
    Ok(())
}

/// Render rows of numbers under `header` as CSV text.
pub fn csv_string(header: &[String], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(row.iter().map(|v| fmt_f64(*v))).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

/// Samples `x1,...,xn,value` with a header row. Every row must have `n + 1`
/// columns; `field` names the source in errors.
pub fn read_samples(text: &str, dimension: usize, field: &str) -> Result<Vec<(Point, f64)>> {
    let mut r = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| Error::parse(field, e.to_string()))?;
        if rec.len() != dimension + 1 {
            return Err(Error::DimensionMismatch {
                expected: dimension + 1,
                found: rec.len(),
            });
        }
        let vals: Vec<f64> = rec
            .iter()
            .map(|s| s.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::parse(field, format!("row {}: {e}", i + 2)))?;
        out.push((vals[..dimension].to_vec(), vals[dimension]));
    }
    Ok(out)
}
