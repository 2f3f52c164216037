//! CSV time series of [`DiagnosticsRecord`]s: one header line, then one row per
//! record with every value printed to 17 significant digits.

use crate::diagnostics::DiagnosticsRecord;
use crate::error::{Error, Result};
use std::fs::{File, OpenOptions};
use std::io::BufWriter;
use std::path::Path;

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Timeseries(format!("{other:?}")),
    }
}

fn format_value(x: f64) -> String {
    format!("{x:.16e}")
}

/// Appending writer; the header is written only when the file is new or empty.
pub struct TimeseriesWriter {
    inner: csv::Writer<BufWriter<File>>,
    rows: usize,
}

impl TimeseriesWriter {
    pub fn create(path: &Path) -> Result<Self> {
        let file = File::create(path)?;
        Self::start(file, true)
    }

    /// Opens for appending; a missing or empty file gets a header, an existing
    /// one must already carry the expected header.
    pub fn append(path: &Path) -> Result<Self> {
        let existing = std::fs::metadata(path).map(|m| m.len()).unwrap_or(0);
        if existing > 0 {
            let mut reader = csv::Reader::from_path(path).map_err(csv_error)?;
            check_header(reader.headers().map_err(csv_error)?)?;
        }
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Self::start(file, existing == 0)
    }

    fn start(file: File, header: bool) -> Result<Self> {
        let mut inner = csv::Writer::from_writer(BufWriter::new(file));
        if header {
            inner.write_record(DiagnosticsRecord::COLUMNS).map_err(csv_error)?;
        }
        Ok(TimeseriesWriter { inner, rows: 0 })
    }

    pub fn write(&mut self, record: &DiagnosticsRecord) -> Result<()> {
        self.inner
            .write_record(record.to_row().into_iter().map(format_value))
            .map_err(csv_error)?;
        self.rows += 1;
        Ok(())
    }

    /// Rows written by this writer.
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn flush(&mut self) -> Result<()> {
        self.inner.flush()?;
        Ok(())
    }
}

impl Drop for TimeseriesWriter {
    fn drop(&mut self) {
        let _ = self.inner.flush();
    }
}

fn check_header(header: &csv::StringRecord) -> Result<()> {
    let found: Vec<&str> = header.iter().collect();
    if found != DiagnosticsRecord::COLUMNS {
        return Err(Error::Timeseries(format!(
            "header mismatch: expected {:?}, found {:?}",
            DiagnosticsRecord::COLUMNS,
            found
        )));
    }
    Ok(())
}

/// Writes `records` to a fresh file.
pub fn emit_timeseries(records: &[DiagnosticsRecord], path: &Path) -> Result<()> {
    let mut w = TimeseriesWriter::create(path)?;
    for r in records {
        w.write(r)?;
    }
    w.flush()
}

pub fn read_timeseries(path: &Path) -> Result<Vec<DiagnosticsRecord>> {
    let mut reader = csv::Reader::from_path(path).map_err(csv_error)?;
    check_header(reader.headers().map_err(csv_error)?)?;
    let mut out = Vec::new();
    for (line, row) in reader.records().enumerate() {
        let row = row.map_err(csv_error)?;
        let values = row
            .iter()
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Timeseries(format!("row {}: `{s}`: {e}", line + 1)))
            })
            .collect::<Result<Vec<f64>>>()?;
        out.push(DiagnosticsRecord::from_row(&values)?);
    }
    Ok(out)
}

/// `(t, value)` pairs for one named column.
pub fn column(records: &[DiagnosticsRecord], name: &str) -> Result<Vec<(f64, f64)>> {
    let idx = DiagnosticsRecord::COLUMNS
        .iter()
        .position(|c| *c == name)
        .ok_or_else(|| Error::Timeseries(format!("unknown column `{name}`")))?;
    Ok(records
        .iter()
        .map(|r| {
            let row = r.to_row();
            (row[0], row[idx])
        })
        .collect())
}
