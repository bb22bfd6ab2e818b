//! CSV tables with a `# config:` metadata line.

use std::fmt::Write as _;

use crate::config::RunConfig;

/// One CSV cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

fn render(cell: &Cell) -> String {
    match cell {
        // 17 significant digits round-trip every double
        Cell::Num(v) => format!("{v:.16e}"),
        Cell::Int(v) => v.to_string(),
        Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
        Cell::Text(s) => s.clone(),
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Table { columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn first_non_finite_row(&self) -> Option<usize> {
        self.rows
            .iter()
            .position(|row| row.iter().any(|c| matches!(c, Cell::Num(v) if !v.is_finite())))
    }

    pub fn to_csv(&self, config: &RunConfig) -> String {
        let mut out = String::new();
        let json = serde_json::to_string(config).expect("config serializes");
        writeln!(out, "# config: {json}").unwrap();
        writeln!(out, "{}", self.columns.join(",")).unwrap();
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(render).collect();
            writeln!(out, "{}", cells.join(",")).unwrap();
        }
        out
    }
}

#[macro_export]
macro_rules! row {
    ($($x:expr),* $(,)?) => { vec![$($crate::table::Cell::from($x)),*] };
}
