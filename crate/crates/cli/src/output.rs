//! Schema-stable tables written as CSV or JSON lines.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use serde_json::{Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Jsonl,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "jsonl" | "json" => Ok(Format::Jsonl),
            other => Err(format!("unknown format `{other}` (expected csv or jsonl)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Str(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
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

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<i64> for Cell {
    fn from(x: i64) -> Self {
        Cell::Int(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Str(x.to_owned())
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Str(x)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(x: Option<T>) -> Self {
        x.map_or(Cell::Empty, Into::into)
    }
}

fn float_text(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{x}")
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Int(i) => write!(f, "{i}"),
            Cell::Float(x) => f.write_str(&float_text(*x)),
            Cell::Str(s) => f.write_str(s),
            Cell::Empty => Ok(()),
        }
    }
}

impl Cell {
    fn to_json(&self) -> Value {
        match self {
            Cell::Int(i) => Value::from(*i),
            Cell::Float(x) if x.is_finite() => Value::from(*x),
            Cell::Float(x) => Value::from(float_text(*x)),
            Cell::Str(s) => Value::from(s.as_str()),
            Cell::Empty => Value::Null,
        }
    }
}

/// Rows under a fixed, ordered header.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: &'static [&'static str],
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &'static [&'static str]) -> Self {
        Self {
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(
            row.len(),
            self.columns.len(),
            "row width must match the header"
        );
        self.rows.push(row);
    }

    pub fn write<W: Write>(&self, out: &mut W, format: Format) -> io::Result<()> {
        match format {
            Format::Csv => {
                writeln!(out, "{}", self.columns.join(","))?;
                for row in &self.rows {
                    let fields: Vec<String> =
                        row.iter().map(|c| csv_field(&c.to_string())).collect();
                    writeln!(out, "{}", fields.join(","))?;
                }
            }
            Format::Jsonl => {
                for row in &self.rows {
                    let obj: Map<String, Value> = self
                        .columns
                        .iter()
                        .zip(row)
                        .map(|(k, c)| (k.to_string(), c.to_json()))
                        .collect();
                    writeln!(out, "{}", Value::Object(obj))?;
                }
            }
        }
        out.flush()
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Table {
        let mut t = Table::new(&["a", "b", "c"]);
        t.push(vec![Cell::Int(1), Cell::Float(f64::INFINITY), Cell::Empty]);
        t.push(vec![
            Cell::Str("x,y".into()),
            Cell::Float(0.25),
            Cell::Float(f64::NAN),
        ]);
        t
    }

    #[test]
    fn csv_output() {
        let mut buf = Vec::new();
        sample().write(&mut buf, Format::Csv).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "a,b,c\n1,inf,\n\"x,y\",0.25,nan\n"
        );
    }

    #[test]
    fn jsonl_output_keeps_column_order() {
        let mut buf = Vec::new();
        sample().write(&mut buf, Format::Jsonl).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let first = text.lines().next().unwrap();
        assert_eq!(first, r#"{"a":1,"b":"inf","c":null}"#);
    }

    #[test]
    fn format_parse() {
        assert_eq!("CSV".parse::<Format>().unwrap(), Format::Csv);
        assert_eq!("jsonl".parse::<Format>().unwrap(), Format::Jsonl);
        assert!("xml".parse::<Format>().is_err());
    }
}
