//! CSV tables with a schema line, a header row and numbers printed to 12
//! significant digits.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::Result;

/// Bumped whenever a column is added, removed or renamed.
pub const SCHEMA_VERSION: u32 = 1;

/// Formats `x` like C's `%.12g`: 12 significant digits, trailing zeros
/// dropped, scientific notation outside `[1e-5, 1e12)`.
pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim_fraction(&format!("{x:.decimals$}")).to_owned()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_fraction(mantissa), exp.abs())
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Bool(bool),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(x) => format_number(*x),
            Cell::Int(n) => n.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<u64> for Cell {
    fn from(n: u64) -> Self {
        Cell::Int(n)
    }
}

impl From<usize> for Cell {
    fn from(n: usize) -> Self {
        Cell::Int(n as u64)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_owned())
    }
}

/// An in-memory table; `name` identifies its schema.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: impl Into<String>, columns: &[&'static str]) -> Self {
        Self { name: name.into(), columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width of table {}", self.name);
        self.rows.push(row);
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| *c == name)
    }

    /// Numeric values of one column.
    pub fn numbers(&self, column: &str) -> Vec<f64> {
        let Some(j) = self.column_index(column) else { return Vec::new() };
        self.rows
            .iter()
            .map(|r| match &r[j] {
                Cell::Num(x) => *x,
                Cell::Int(n) => *n as f64,
                _ => f64::NAN,
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        writeln!(out, "# d2d-offload {} schema v{SCHEMA_VERSION}", self.name).unwrap();
        writeln!(out, "{}", self.columns.join(",")).unwrap();
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::render).collect();
            writeln!(out, "{}", cells.join(",")).unwrap();
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| crate::Error::Io(format!("{}: {e}", path.display())))
    }
}

/// A two-column series for external plotting tools.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    /// File stem, unique within a run.
    pub name: String,
    pub x_label: &'static str,
    pub y_label: &'static str,
    pub points: Vec<(f64, f64)>,
}

impl Series {
    pub fn to_dat(&self) -> String {
        let mut out = format!("# {} {}\n", self.x_label, self.y_label);
        for (x, y) in &self.points {
            writeln!(out, "{} {}", format_number(*x), format_number(*y)).unwrap();
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_printf_g12() {
        let cases = [
            (1.0, "1"),
            (0.1, "0.1"),
            (1.0 / 3.0, "0.333333333333"),
            (2.0 / 3.0 * 1e-5, "6.66666666667e-06"),
            (123456789012.0, "123456789012"),
            (1234567890123.0, "1.23456789012e+12"),
            (-2.5e-7, "-2.5e-07"),
            (25920.0, "25920"),
            (0.000123, "0.000123"),
            (999999999999.9, "1e+12"),
            (1e100, "1e+100"),
        ];
        for (x, want) in cases {
            assert_eq!(format_number(x), want, "{x:e}");
        }
    }

    #[test]
    fn format_round_trips_to_12_digits() {
        for x in [std::f64::consts::PI, 2.06e-5, 7.123456789012345e-9, 1e-300] {
            let back: f64 = format_number(x).parse().unwrap();
            assert!(((back - x) / x).abs() < 5e-12);
        }
    }

    #[test]
    fn csv_layout() {
        let mut t = Table::new("demo", &["a", "b", "c"]);
        t.push(vec![1.5.into(), 2u64.into(), "x".into()]);
        assert_eq!(t.to_csv(), "# d2d-offload demo schema v1\na,b,c\n1.5,2,x\n");
        assert_eq!(t.numbers("a"), vec![1.5]);
    }
}
