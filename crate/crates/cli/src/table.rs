//! Minimal strict CSV tables.
//!
//! Every tabular artifact this tool reads it also wrote, so the dialect is
//! deliberately narrow: comma-separated cells, one header row, no quoting,
//! no escapes. Cells are identifiers or numbers formatted with Rust's
//! shortest round-trip `Display`, which keeps reruns byte-identical.

use std::fmt::Display;
use std::fs;
use std::path::Path;

use crate::error::{CliError, Result};

/// In-memory table: a header plus string rows.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

/// Format a float for a CSV cell (shortest round-trip representation).
pub fn num(v: f64) -> String {
    format!("{v}")
}

/// Format any displayable cell value.
pub fn cell(v: impl Display) -> String {
    format!("{v}")
}

impl Table {
    pub fn new<S: AsRef<str>>(columns: &[S]) -> Self {
        Table {
            columns: columns.iter().map(|c| c.as_ref().to_string()).collect(),
            rows: Vec::new(),
        }
    }

    /// Append a row; the arity must match the header.
    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(
            row.len(),
            self.columns.len(),
            "row arity {} does not match header arity {}",
            row.len(),
            self.columns.len()
        );
        for cell in &row {
            assert!(
                !cell.contains([',', '"', '\n', '\r']),
                "cell {cell:?} needs quoting, which this dialect forbids"
            );
        }
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    /// Parse a CSV file written by [`Table::to_csv`].
    pub fn read(path: &Path) -> Result<Table> {
        let text = fs::read_to_string(path)?;
        let label = path.display().to_string();
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| CliError::Data(format!("{label}: empty table")))?;
        let columns: Vec<String> = header.split(',').map(|c| c.trim().to_string()).collect();
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            if line.contains('"') {
                return Err(CliError::Data(format!(
                    "{label}:{}: quoted cells are not supported",
                    i + 2
                )));
            }
            let row: Vec<String> = line.split(',').map(|c| c.trim().to_string()).collect();
            if row.len() != columns.len() {
                return Err(CliError::Data(format!(
                    "{label}:{}: expected {} cells, found {}",
                    i + 2,
                    columns.len(),
                    row.len()
                )));
            }
            rows.push(row);
        }
        Ok(Table { columns, rows })
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Index of a required column, with the figure-input error if absent.
    pub fn require(&self, name: &str, file: &str) -> Result<usize> {
        self.column(name).ok_or_else(|| CliError::MissingColumn {
            column: name.to_string(),
            file: file.to_string(),
        })
    }

    /// Parse one cell as `f64` (`inf` / `NaN` spellings included).
    pub fn f64(&self, row: usize, col: usize) -> Result<f64> {
        let raw = &self.rows[row][col];
        raw.parse::<f64>().map_err(|_| {
            CliError::Data(format!(
                "cell ({row}, {}) = {raw:?} is not a number",
                self.columns[col]
            ))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trips_through_disk() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let mut t = Table::new(&["d", "p", "rate"]);
        t.push(vec![cell(3), num(1e-3), num(0.0625)]);
        t.push(vec![cell(5), num(f64::INFINITY), num(f64::NAN)]);
        fs::write(&path, t.to_csv()).unwrap();

        let back = Table::read(&path).unwrap();
        assert_eq!(back.columns, t.columns);
        assert_eq!(back.rows, t.rows);
        assert_eq!(back.f64(0, 1).unwrap(), 1e-3);
        assert!(back.f64(1, 1).unwrap().is_infinite());
        assert!(back.f64(1, 2).unwrap().is_nan());
    }

    #[test]
    fn float_cells_round_trip_exactly() {
        for &v in &[1.0 / 3.0, 6.02e23, -0.1, 5e-324, 0.0] {
            let s = num(v);
            assert_eq!(s.parse::<f64>().unwrap(), v, "{s}");
        }
    }

    #[test]
    fn missing_column_error_names_the_column() {
        let t = Table::new(&["a", "b"]);
        let err = t.require("rate", "in.csv").unwrap_err();
        match err {
            CliError::MissingColumn { column, file } => {
                assert_eq!(column, "rate");
                assert_eq!(file, "in.csv");
            }
            other => panic!("wrong error: {other:?}"),
        }
    }

    #[test]
    fn ragged_rows_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        fs::write(&path, "a,b\n1,2\n3\n").unwrap();
        assert!(matches!(Table::read(&path), Err(CliError::Data(_))));
    }

    #[test]
    #[should_panic(expected = "needs quoting")]
    fn cells_with_commas_are_refused_at_write_time() {
        let mut t = Table::new(&["a"]);
        t.push(vec!["x,y".into()]);
    }
}
