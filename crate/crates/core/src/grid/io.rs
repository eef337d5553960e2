//! Plain-text field snapshots.
//!
//! ```text
//! hotspotfield v1 L=<L> n=<n>
//! <n values of row j = 0>
//! ...
//! <n values of row j = n - 1>
//! ```
//!
//! Rows run in increasing y, values within a row in increasing x. Headerless
//! CSV (comma or whitespace separated) of an `n × n` table is also accepted;
//! its side length then comes from the caller.

use std::fmt::Write as _;
use std::path::Path;

use super::{GridSpec, ScalarField};
use crate::error::{Error, Result};

pub const FIELD_HEADER_TAG: &str = "hotspotfield";

/// Serializes with the shortest round-tripping decimal form of each value.
pub fn write_field(field: &ScalarField) -> String {
    let g = field.grid();
    let n = g.n();
    let mut out = format!("{FIELD_HEADER_TAG} v1 L={} n={}\n", g.length(), n);
    for j in 0..n {
        for i in 0..n {
            if i > 0 {
                out.push(' ');
            }
            let _ = write!(out, "{}", field.get(i, j));
        }
        out.push('\n');
    }
    out
}

pub fn read_field(path: &Path, fallback_length: f64) -> Result<ScalarField> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_field(&text, fallback_length)
}

pub fn parse_field(text: &str, fallback_length: f64) -> Result<ScalarField> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty()).peekable();
    let mut declared: Option<(f64, usize)> = None;
    if let Some(first) = lines.peek() {
        if first.trim_start().starts_with(FIELD_HEADER_TAG) {
            declared = Some(parse_header(first)?);
            lines.next();
        }
    }
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (k, line) in lines.enumerate() {
        let row = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|e| Error::Parse(format!("row {k}: bad value {t:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    let n = rows.len();
    if let Some((_, declared_n)) = declared {
        if declared_n != n {
            return Err(Error::Parse(format!("header declares n={declared_n}, found {n} rows")));
        }
    }
    if let Some(bad) = rows.iter().position(|r| r.len() != n) {
        return Err(Error::Parse(format!(
            "row {bad} has {} values, expected {n}",
            rows[bad].len()
        )));
    }
    let length = declared.map(|d| d.0).unwrap_or(fallback_length);
    let grid = GridSpec::new(length, n)?;
    ScalarField::from_values(grid, rows.into_iter().flatten().collect())
}

fn parse_header(line: &str) -> Result<(f64, usize)> {
    let mut tokens = line.split_whitespace();
    tokens.next();
    match tokens.next() {
        Some("v1") => {}
        other => return Err(Error::Parse(format!("unsupported field version {other:?}"))),
    }
    let mut length = None;
    let mut n = None;
    for t in tokens {
        if let Some(v) = t.strip_prefix("L=") {
            length = Some(v.parse::<f64>().map_err(|e| Error::Parse(format!("L: {e}")))?);
        } else if let Some(v) = t.strip_prefix("n=") {
            n = Some(v.parse::<usize>().map_err(|e| Error::Parse(format!("n: {e}")))?);
        } else {
            return Err(Error::Parse(format!("unexpected header token {t:?}")));
        }
    }
    match (length, n) {
        (Some(l), Some(n)) => Ok((l, n)),
        _ => Err(Error::Parse("header needs L= and n=".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn header_layout() {
        let g = GridSpec::new(1.0, 8).unwrap();
        let u = ScalarField::from_fn(g, |x, y| x + 10.0 * y);
        let text = write_field(&u);
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("hotspotfield v1 L=1 n=8"));
        let row0: Vec<f64> =
            lines.next().unwrap().split(' ').map(|t| t.parse().unwrap()).collect();
        assert_eq!(row0.len(), 8);
        assert_eq!(row0[1], u.get(1, 0));
        assert_eq!(text.lines().count(), 9);
    }

    #[test]
    fn headerless_csv() {
        let mut text = String::new();
        for j in 0..8 {
            let row: Vec<String> = (0..8).map(|i| format!("{}", i + 8 * j)).collect();
            text.push_str(&row.join(","));
            text.push('\n');
        }
        let u = parse_field(&text, 2.0).unwrap();
        assert_eq!(u.grid().length(), 2.0);
        assert_eq!(u.get(3, 2), 19.0);
    }

    #[test]
    fn malformed_inputs() {
        assert!(parse_field("hotspotfield v2 L=1 n=8\n", 1.0).is_err());
        assert!(parse_field("hotspotfield v1 L=1 n=9\n1 2\n", 1.0).is_err());
        let ragged = "1 2 3 4 5 6 7 8\n".repeat(7) + "1 2\n";
        assert!(parse_field(&ragged, 1.0).is_err());
        assert!(parse_field(&"x ".repeat(64), 1.0).is_err());
    }

    proptest! {
        #[test]
        fn round_trip_is_exact(v in proptest::collection::vec(-1e6f64..1e6, 64), l in 0.1f64..50.0) {
            let u = ScalarField::from_values(GridSpec::new(l, 8).unwrap(), v).unwrap();
            let back = parse_field(&write_field(&u), 99.0).unwrap();
            prop_assert_eq!(back, u);
        }
    }
}
