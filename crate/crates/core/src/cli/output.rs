use std::io::Write;
use std::str::FromStr;

use clap::ValueEnum;
use serde_json::{Map, Number, Value};

use super::CliError;

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    U(u64),
    I(i64),
    W(u128),
    F(f64),
    S(String),
    B(bool),
    Null,
}

fn float_text(x: f64) -> String {
    format!("{x:.16e}")
}

/// A float as a JSON number with 17 significant digits; null if not finite.
pub fn float(x: f64) -> Value {
    if x.is_finite() {
        Value::Number(Number::from_str(&float_text(x)).expect("formatted float is a JSON number"))
    } else {
        Value::Null
    }
}

impl From<Cell> for Value {
    fn from(c: Cell) -> Value {
        match c {
            Cell::U(v) => Value::from(v),
            Cell::I(v) => Value::from(v),
            Cell::W(v) => Value::Number(Number::from_str(&v.to_string()).expect("integer")),
            Cell::F(v) => float(v),
            Cell::S(s) => Value::String(s),
            Cell::B(b) => Value::Bool(b),
            Cell::Null => Value::Null,
        }
    }
}

impl Cell {
    fn text(&self) -> String {
        match self {
            Cell::U(v) => v.to_string(),
            Cell::I(v) => v.to_string(),
            Cell::W(v) => v.to_string(),
            Cell::F(v) => float_text(*v),
            Cell::S(s) => s.clone(),
            Cell::B(b) => b.to_string(),
            Cell::Null => String::new(),
        }
    }
}

fn io(e: impl std::fmt::Display) -> CliError {
    CliError::Engine(format!("write failed: {e}"))
}

pub fn object(fields: Vec<(&str, Value)>) -> Value {
    let mut m = Map::new();
    for (k, v) in fields {
        m.insert(k.to_string(), v);
    }
    Value::Object(m)
}

pub fn row_object(header: &[&str], cells: &[Cell]) -> Value {
    object(header.iter().copied().zip(cells.iter().cloned().map(Value::from)).collect())
}

/// One JSON object, or a one-row CSV.
pub fn write_object(out: &mut dyn Write, format: Format, fields: Vec<(&str, Value)>) -> Result<(), CliError> {
    match format {
        Format::Json => {
            let text = serde_json::to_string_pretty(&object(fields)).map_err(io)?;
            writeln!(out, "{text}").map_err(io)
        }
        Format::Csv => {
            let text = |v: &Value| match v {
                Value::String(s) => s.clone(),
                Value::Null => String::new(),
                other => other.to_string(),
            };
            // Arrays of scalars become numbered columns `a1, a2, ...`.
            let (mut keys, mut vals) = (Vec::new(), Vec::new());
            for (k, v) in &fields {
                match v {
                    Value::Array(items) if items.iter().all(|x| !x.is_array() && !x.is_object()) => {
                        for (i, x) in items.iter().enumerate() {
                            keys.push(format!("{k}{}", i + 1));
                            vals.push(text(x));
                        }
                    }
                    _ => {
                        keys.push(k.to_string());
                        vals.push(text(v));
                    }
                }
            }
            let mut w = csv::Writer::from_writer(out);
            w.write_record(&keys).map_err(io)?;
            w.write_record(&vals).map_err(io)?;
            w.flush().map_err(io)
        }
    }
}

/// Row-streaming writer: CSV with a header row, or a JSON array of objects.
pub struct Table<'a> {
    header: Vec<&'static str>,
    inner: TableInner<'a>,
}

enum TableInner<'a> {
    Csv(csv::Writer<&'a mut dyn Write>),
    Json { out: &'a mut dyn Write, rows: usize },
}

impl<'a> Table<'a> {
    pub fn new(out: &'a mut dyn Write, format: Format, header: &[&'static str]) -> Result<Self, CliError> {
        let inner = match format {
            Format::Csv => {
                let mut w = csv::Writer::from_writer(out);
                w.write_record(header).map_err(io)?;
                TableInner::Csv(w)
            }
            Format::Json => {
                write!(out, "[").map_err(io)?;
                TableInner::Json { out, rows: 0 }
            }
        };
        Ok(Table { header: header.to_vec(), inner })
    }

    pub fn row(&mut self, cells: &[Cell]) -> Result<(), CliError> {
        debug_assert_eq!(cells.len(), self.header.len());
        match &mut self.inner {
            TableInner::Csv(w) => w.write_record(cells.iter().map(Cell::text)).map_err(io),
            TableInner::Json { out, rows } => {
                let sep = if *rows == 0 { "\n  " } else { ",\n  " };
                *rows += 1;
                let text = serde_json::to_string(&row_object(&self.header, cells)).map_err(io)?;
                write!(out, "{sep}{text}").map_err(io)
            }
        }
    }

    pub fn finish(self) -> Result<(), CliError> {
        match self.inner {
            TableInner::Csv(mut w) => w.flush().map_err(io),
            TableInner::Json { out, rows } => {
                let end = if rows == 0 { "]\n" } else { "\n]\n" };
                write!(out, "{end}").map_err(io)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_keep_seventeen_digits() {
        assert_eq!(float(0.1).to_string(), "1.0000000000000001e-1");
        assert_eq!(float(f64::NAN), Value::Null);
        assert_eq!(Cell::F(-2.5).text(), "-2.5000000000000000e0");
    }

    #[test]
    fn tables() {
        let mut buf = Vec::new();
        let mut t = Table::new(&mut buf, Format::Json, &["a", "b"]).unwrap();
        t.row(&[Cell::U(1), Cell::S("x,y".into())]).unwrap();
        t.finish().unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "[\n  {\"a\":1,\"b\":\"x,y\"}\n]\n");
        let mut buf = Vec::new();
        let mut t = Table::new(&mut buf, Format::Csv, &["a", "b"]).unwrap();
        t.row(&[Cell::Null, Cell::S("x,y".into())]).unwrap();
        t.finish().unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "a,b\n,\"x,y\"\n");
    }
}
