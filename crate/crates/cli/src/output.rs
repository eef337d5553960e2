//! File emission for simulation runs.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use hotspot_core::analysis::DiagnosticsRecord;
use hotspot_core::grid::{write_field, ScalarField};
use hotspot_core::solver::{Outcome, RunStats};

use crate::CliError;

/// Time stamp used in snapshot file names.
pub fn time_tag(t: f64) -> String {
    format!("{t:.6}")
}

/// Binary PGM (P5), 8 bits, rows from the top of the domain (largest y) down.
/// Values map linearly from `[min, max]` onto `[0, 255]`.
pub fn pgm_bytes(field: &ScalarField) -> Vec<u8> {
    let n = field.grid().n();
    let (lo, hi) = (field.min(), field.max());
    let span = hi - lo;
    let mut out = format!("P5\n{n} {n}\n255\n").into_bytes();
    for j in (0..n).rev() {
        for i in 0..n {
            let v = field.get(i, j);
            let level = if span > 0.0 { ((v - lo) / span * 255.0).round() } else { 0.0 };
            out.push(level.clamp(0.0, 255.0) as u8);
        }
    }
    out
}

#[derive(Debug, Serialize)]
struct PgmSidecar<'a> {
    field: &'a str,
    t: f64,
    min: f64,
    max: f64,
    mapping: &'static str,
    levels: u32,
    n: usize,
    #[serde(rename = "L")]
    length: f64,
    row_order: &'static str,
}

pub fn write_snapshot(dir: &Path, name: &str, t: f64, field: &ScalarField) -> Result<(), CliError> {
    let tag = time_tag(t);
    let path = |ext: &str| dir.join(format!("{name}_{tag}.{ext}"));
    write_file(&path("field"), write_field(field).as_bytes())?;
    write_file(&path("pgm"), &pgm_bytes(field))?;
    let sidecar = PgmSidecar {
        field: name,
        t,
        min: field.min(),
        max: field.max(),
        mapping: "linear",
        levels: 256,
        n: field.grid().n(),
        length: field.grid().length(),
        row_order: "top_is_max_y",
    };
    let json = serde_json::to_string_pretty(&sidecar).expect("sidecar serializes");
    write_file(&path("json"), json.as_bytes())
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// `diagnostics.csv`, flushed after every row.
pub struct DiagnosticsWriter {
    path: PathBuf,
    out: BufWriter<File>,
}

impl DiagnosticsWriter {
    pub fn create(dir: &Path) -> Result<Self, CliError> {
        let path = dir.join("diagnostics.csv");
        let file = File::create(&path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let mut w = Self { path, out: BufWriter::new(file) };
        w.line(&DiagnosticsRecord::csv_header())?;
        Ok(w)
    }

    pub fn row(&mut self, rec: &DiagnosticsRecord) -> Result<(), CliError> {
        self.line(&rec.to_csv_row())
    }

    fn line(&mut self, s: &str) -> Result<(), CliError> {
        writeln!(self.out, "{s}")
            .and_then(|_| self.out.flush())
            .map_err(|e| CliError::Io(format!("{}: {e}", self.path.display())))
    }
}

#[derive(Debug, Serialize)]
pub struct OutcomeFile<'a> {
    #[serde(flatten)]
    pub outcome: &'a Outcome,
    pub model: &'a str,
    pub stats: &'a RunStats,
    pub records: usize,
}

pub fn write_outcome(dir: &Path, outcome: &OutcomeFile<'_>) -> Result<(), CliError> {
    let json = serde_json::to_string_pretty(outcome).expect("outcome serializes");
    write_file(&dir.join("outcome.json"), (json + "\n").as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use hotspot_core::grid::GridSpec;

    #[test]
    fn pgm_layout() {
        let g = GridSpec::new(1.0, 8).unwrap();
        let u = ScalarField::from_fn(g, |_, y| y);
        let b = pgm_bytes(&u);
        let header = b"P5\n8 8\n255\n";
        assert_eq!(&b[..header.len()], header);
        let px = &b[header.len()..];
        assert_eq!(px.len(), 64);
        assert_eq!(px[0], 255);
        assert_eq!(px[63], 0);
    }

    #[test]
    fn constant_field_maps_to_zero() {
        let g = GridSpec::new(1.0, 8).unwrap();
        let b = pgm_bytes(&ScalarField::constant(g, 3.0));
        assert!(b[11..].iter().all(|&v| v == 0));
    }

    #[test]
    fn tags() {
        assert_eq!(time_tag(0.1), "0.100000");
        assert_eq!(time_tag(1.0), "1.000000");
    }
}
