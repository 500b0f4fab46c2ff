use std::io::{self, Write};

use glmg_core::fmt::{fmt_shortest, fmt_significant};
use serde_json::{json, Value};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    Bool(bool),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        // Adding zero turns -0.0 into 0.0.
        Cell::Float(x + 0.0)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<u32> for Cell {
    fn from(x: u32) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Bool(x)
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

/// A named table rendered as CSV or as `{"command", "columns", "rows"}` JSON.
#[derive(Debug, Clone)]
pub struct Table {
    pub command: &'static str,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    /// Significant digits for floats in CSV; `None` prints the shortest
    /// round-trip form.
    pub digits: Option<usize>,
}

impl Table {
    pub fn new(command: &'static str, columns: Vec<String>) -> Self {
        Table {
            command,
            columns,
            rows: Vec::new(),
            digits: None,
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn csv_cell(&self, cell: &Cell) -> String {
        match cell {
            Cell::Int(i) => i.to_string(),
            Cell::Float(x) => match self.digits {
                Some(d) => fmt_significant(*x, d),
                None => fmt_shortest(*x),
            },
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{}", self.columns.join(","))?;
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|c| self.csv_cell(c)).collect();
            writeln!(w, "{}", cells.join(","))?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                Value::Array(
                    row.iter()
                        .map(|c| match c {
                            Cell::Int(i) => json!(i),
                            Cell::Float(x) => json!(x),
                            Cell::Text(s) => json!(s),
                            Cell::Bool(b) => json!(b),
                        })
                        .collect(),
                )
            })
            .collect();
        json!({
            "command": self.command,
            "columns": self.columns,
            "rows": rows,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_both_formats() {
        let mut t = Table::new("demo", vec!["a".into(), "b".into(), "c".into()]);
        t.push(vec![1usize.into(), (2.0 / 3.0).into(), "x".into()]);
        let mut out = Vec::new();
        t.write_csv(&mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "a,b,c\n1,0.6666666666666666,x\n");
        t.digits = Some(3);
        let mut out = Vec::new();
        t.write_csv(&mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "a,b,c\n1,0.667,x\n");
        assert_eq!(t.to_json()["rows"][0][1], json!(2.0 / 3.0));
        assert_eq!(t.to_json()["command"], "demo");
    }
}
