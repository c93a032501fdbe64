use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::ValueEnum;
use combprob::exact::{rat_to_significant, real_to_significant};
use combprob::{BigReal, ExactRat};
use serde_json::{Map, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Csv,
    Json,
}

#[derive(Clone, Debug)]
pub struct OutputSpec {
    pub format: Format,
    pub digits: usize,
    pub path: Option<PathBuf>,
}

impl OutputSpec {
    pub fn rat(&self, r: &ExactRat) -> String {
        prob_string(r, self.digits)
    }

    pub fn real(&self, x: &BigReal) -> String {
        real_to_significant(x, self.digits)
    }

    pub fn f64(&self, x: f64) -> String {
        if x == 0.0 {
            return "0".into();
        }
        real_to_significant(&rug::Float::with_val(53, x), self.digits)
    }
}

/// Exact 0 and 1 print bare; everything else at `digits` significant figures.
pub fn prob_string(r: &ExactRat, digits: usize) -> String {
    if *r == 0 || *r == 1 {
        r.to_string()
    } else {
        rat_to_significant(r, digits)
    }
}

#[derive(Clone, Debug)]
pub enum Cell {
    /// Exact integer, always in full.
    Int(String),
    /// Rendered decimal or other text.
    Text(String),
}

impl Cell {
    fn text(&self) -> &str {
        match self {
            Cell::Int(s) | Cell::Text(s) => s,
        }
    }

    fn json(&self) -> Value {
        match self {
            // small integers as JSON numbers, large ones as strings
            Cell::Int(s) => match s.parse::<i64>() {
                Ok(v) if v.unsigned_abs() < (1 << 53) => Value::from(v),
                _ => Value::String(s.clone()),
            },
            Cell::Text(s) => Value::String(s.clone()),
        }
    }
}

pub fn int(x: impl ToString) -> Cell {
    Cell::Int(x.to_string())
}

pub fn text(x: impl Into<String>) -> Cell {
    Cell::Text(x.into())
}

#[derive(Clone, Debug, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    /// Trailing status lines (table format: stdout; otherwise stderr).
    pub notes: Vec<String>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            ..Default::default()
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Two-column `quantity,value` record.
    pub fn record(pairs: Vec<(&str, Cell)>) -> Self {
        let mut t = Table::new(&["quantity", "value"]);
        for (k, v) in pairs {
            t.push(vec![text(k), v]);
        }
        t
    }

    fn render_table(&self) -> String {
        let mut widths: Vec<usize> = self.columns.iter().map(|c| c.len()).collect();
        for row in &self.rows {
            for (w, c) in widths.iter_mut().zip(row) {
                *w = (*w).max(c.text().len());
            }
        }
        let line = |cells: Vec<&str>| {
            let parts: Vec<String> = cells
                .iter()
                .zip(&widths)
                .map(|(c, w)| format!("{c:>w$}"))
                .collect();
            parts.join("  ").trim_end().to_string()
        };
        let mut out = line(self.columns.iter().map(String::as_str).collect());
        out.push('\n');
        for row in &self.rows {
            out.push_str(&line(row.iter().map(Cell::text).collect()));
            out.push('\n');
        }
        for note in &self.notes {
            out.push_str(note);
            out.push('\n');
        }
        out
    }

    fn render_csv(&self) -> io::Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::text))?;
        }
        let bytes = w.into_inner().map_err(|e| io::Error::other(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    fn render_json(&self) -> String {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let mut obj = Map::new();
                for (k, c) in self.columns.iter().zip(row) {
                    obj.insert(k.clone(), c.json());
                }
                Value::Object(obj)
            })
            .collect();
        let mut s = serde_json::to_string_pretty(&Value::Array(rows)).expect("json");
        s.push('\n');
        s
    }
}

pub fn emit(spec: &OutputSpec, table: &Table) -> io::Result<()> {
    let body = match spec.format {
        Format::Table => table.render_table(),
        Format::Csv => table.render_csv()?,
        Format::Json => table.render_json(),
    };
    if spec.format != Format::Table {
        for note in &table.notes {
            eprintln!("{note}");
        }
    }
    write_body(spec, &body)
}

pub fn write_body(spec: &OutputSpec, body: &str) -> io::Result<()> {
    match &spec.path {
        Some(path) => File::create(path)?.write_all(body.as_bytes()),
        None => io::stdout().lock().write_all(body.as_bytes()),
    }
}
