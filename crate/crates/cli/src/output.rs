//! Deterministic table output. Floats use the shortest representation that parses back to
//! the same value, so re-reading a table reproduces it bit for bit.

use std::path::Path;

use lmg_rat::quantum::cache::write_atomic;

use crate::CliError;

pub fn num(x: f64) -> String {
    format!("{x}")
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub fn parse_num(field: &str) -> Result<f64, CliError> {
    field.parse().map_err(|_| CliError::Io(format!("unparsable number {field:?}")))
}

pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    write_atomic(path, &bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Rows of an existing table, or `None` if the file is absent or has another header.
pub fn read_csv(path: &Path, header: &[&str]) -> Result<Option<Vec<Vec<String>>>, CliError> {
    if !path.exists() {
        return Ok(None);
    }
    let mut r = csv::Reader::from_path(path)?;
    if r.headers()?.iter().ne(header.iter().copied()) {
        log::warn!("{}: unexpected header, ignoring existing rows", path.display());
        return Ok(None);
    }
    let mut rows = Vec::new();
    for rec in r.records() {
        rows.push(rec?.iter().map(str::to_owned).collect());
    }
    Ok(Some(rows))
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    text.push('\n');
    write_atomic(path, text.as_bytes()).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip_exactly() {
        for x in [0.1, 1.0 / 3.0, 7.90344990884333, 1e-300, -2.5e17, 0.0] {
            assert_eq!(parse_num(&num(x)).unwrap().to_bits(), x.to_bits());
        }
        assert!(parse_num("").is_err());
    }

    #[test]
    fn header_mismatch_ignores_rows() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        write_csv(&path, &["a", "b"], &[vec!["1".into(), "x, y".into()]]).unwrap();
        let rows = read_csv(&path, &["a", "b"]).unwrap().unwrap();
        assert_eq!(rows, vec![vec!["1".to_string(), "x, y".to_string()]]);
        assert!(read_csv(&path, &["a", "c"]).unwrap().is_none());
        assert!(read_csv(&dir.path().join("none.csv"), &["a"]).unwrap().is_none());
    }
}
