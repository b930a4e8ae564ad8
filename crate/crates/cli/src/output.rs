//! Tabular records written as CSV or JSON lines. Every row of one table has
//! the same columns in the same order.

use std::io::Write;

use harmonic_chain::gaussian::format_float;
use serde_json::{Map, Value};

use crate::config::Format;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Bool(bool),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Float(x) => format_float(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            // NaN and infinities are not JSON numbers
            Cell::Float(x) if !x.is_finite() => Value::String(format_float(*x)),
            Cell::Float(x) => Value::from(*x),
            Cell::Int(i) => Value::from(*i),
            Cell::Bool(b) => Value::Bool(*b),
            Cell::Text(s) => Value::String(s.clone()),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i as i64)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Row(pub Vec<(String, Cell)>);

impl Row {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, name: impl Into<String>, cell: impl Into<Cell>) {
        self.0.push((name.into(), cell.into()));
    }

    pub fn columns(&self) -> Vec<&str> {
        self.0.iter().map(|(n, _)| n.as_str()).collect()
    }
}

pub fn write_table<W: Write>(rows: &[Row], format: Format, mut out: W) -> std::io::Result<()> {
    match format {
        Format::Csv => {
            if let Some(first) = rows.first() {
                writeln!(out, "{}", first.columns().join(","))?;
            }
            for row in rows {
                let cells: Vec<String> = row.0.iter().map(|(_, c)| c.csv()).collect();
                writeln!(out, "{}", cells.join(","))?;
            }
        }
        Format::Json => {
            for row in rows {
                let map: Map<String, Value> = row.0.iter().map(|(n, c)| (n.clone(), c.json())).collect();
                writeln!(out, "{}", Value::Object(map))?;
            }
        }
    }
    out.flush()
}
