use std::fmt::Write as _;

use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

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

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

/// Result of one command: its JSON form and, for sweeps, a fixed-column table.
#[derive(Debug, Clone)]
pub struct Report {
    pub json: Value,
    pub table: Option<Table>,
}

impl Report {
    pub fn json(json: Value) -> Self {
        Report { json, table: None }
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.json).expect("JSON values serialize");
                s.push('\n');
                s
            }
            Format::Csv => match &self.table {
                Some(t) => render_csv(t),
                None => render_csv(&flatten(&self.json)),
            },
        }
    }
}

/// C-style `%.10e`.
pub fn sci(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{x:.10e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    format!("{mantissa}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs())
}

fn render_csv(t: &Table) -> String {
    let mut out = t.header.join(",");
    out.push('\n');
    for row in &t.rows {
        let cells: Vec<String> = row
            .iter()
            .map(|c| match c {
                Cell::Num(v) => sci(*v),
                Cell::Int(v) => v.to_string(),
                Cell::Text(s) => s.clone(),
            })
            .collect();
        let _ = writeln!(out, "{}", cells.join(","));
    }
    out
}

/// `key,value` rows for every scalar leaf, keyed by its dotted path.
fn flatten(v: &Value) -> Table {
    fn walk(prefix: &str, v: &Value, rows: &mut Vec<Vec<Cell>>) {
        let join = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
        match v {
            Value::Object(m) => m.iter().for_each(|(k, x)| walk(&join(k), x, rows)),
            Value::Array(a) => a.iter().enumerate().for_each(|(i, x)| walk(&join(&i.to_string()), x, rows)),
            Value::Number(n) => {
                let cell = match n.as_i64() {
                    Some(i) if n.is_i64() || n.is_u64() => Cell::Int(i),
                    _ => Cell::Num(n.as_f64().unwrap_or(f64::NAN)),
                };
                rows.push(vec![Cell::Text(prefix.to_string()), cell]);
            }
            Value::Null => rows.push(vec![Cell::Text(prefix.to_string()), Cell::Text("null".into())]),
            Value::Bool(b) => rows.push(vec![Cell::Text(prefix.to_string()), Cell::Text(b.to_string())]),
            Value::String(s) => rows.push(vec![Cell::Text(prefix.to_string()), Cell::Text(s.clone())]),
        }
    }
    let mut rows = Vec::new();
    walk("", v, &mut rows);
    Table { header: vec!["key", "value"], rows }
}
