//! Result tables, checks and the run manifest.

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Map, Value};

/// One cell of a long-format table.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Flag(bool),
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
impl From<u32> for Cell {
    fn from(v: u32) -> Self {
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
impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Flag(v)
    }
}

impl Cell {
    fn text(&self) -> String {
        match self {
            // shortest round-trip form, so equal values print equal bytes
            Cell::Num(v) => format!("{v:e}"),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Flag(b) => b.to_string(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(v) if v.is_finite() => json!(v),
            Cell::Num(v) => json!(v.to_string()),
            Cell::Int(v) => json!(v),
            Cell::Text(s) => json!(s),
            Cell::Flag(b) => json!(b),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Table { columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(&self.columns)?;
        for r in &self.rows {
            out.write_record(r.iter().map(Cell::text))?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|r| {
                    let mut m = Map::new();
                    for (c, v) in self.columns.iter().zip(r) {
                        m.insert(c.to_string(), v.json());
                    }
                    Value::Object(m)
                })
                .collect(),
        )
    }
}

/// A pass/fail comparison against a tolerance.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    /// Passes when value < tolerance.
    pub fn below(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Check { name: name.into(), value, tolerance, pass: value < tolerance }
    }

    /// Passes only on exact zero.
    pub fn zero(name: impl Into<String>, value: f64) -> Self {
        Check { name: name.into(), value, tolerance: 0.0, pass: value == 0.0 }
    }

    /// Passes when value > tolerance.
    pub fn above(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Check { name: name.into(), value, tolerance, pass: value > tolerance }
    }
}

/// What a subcommand produced.
#[derive(Debug, Clone, Default)]
pub struct Report {
    pub table: Table,
    pub checks: Vec<Check>,
    /// Extra JSON-only output (summaries).
    pub summary: Option<Value>,
    pub seed: Option<u64>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn results_json(&self) -> Value {
        let mut m = Map::new();
        m.insert("rows".into(), self.table.to_json());
        m.insert("checks".into(), serde_json::to_value(&self.checks).expect("checks serialize"));
        if let Some(s) = &self.summary {
            m.insert("summary".into(), s.clone());
        }
        Value::Object(m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

pub fn manifest(command: &str, config: Value, report: &Report, wall: f64) -> Value {
    json!({
        "command": command,
        "config": config,
        "versions": { "rosenblatt": rosenblatt::VERSION, "cli": env!("CARGO_PKG_VERSION") },
        "seed": report.seed,
        "threads": rayon_threads(),
        "wall_time_s": wall,
        "checks_passed": report.passed(),
        "n_checks": report.checks.len(),
    })
}

fn rayon_threads() -> Option<usize> {
    std::env::var("RAYON_NUM_THREADS").ok().and_then(|v| v.parse().ok())
}

/// Writes results (and the manifest) to `dir`, or results to stdout and the manifest to stderr.
pub fn emit(command: &str, format: Format, dir: Option<&Path>, report: &Report, manifest: &Value) -> std::io::Result<()> {
    let results = |w: &mut dyn Write| -> std::io::Result<()> {
        match format {
            Format::Csv => report.table.write_csv(&mut *w).map_err(std::io::Error::other),
            Format::Json => {
                serde_json::to_writer_pretty(&mut *w, &report.results_json())?;
                writeln!(w)
            }
        }
    };
    match dir {
        Some(d) => {
            std::fs::create_dir_all(d)?;
            let ext = match format {
                Format::Csv => "csv",
                Format::Json => "json",
            };
            let mut f = std::io::BufWriter::new(std::fs::File::create(d.join(format!("{command}.{ext}")))?);
            results(&mut f)?;
            f.flush()?;
            let m = std::fs::File::create(d.join(format!("{command}.manifest.json")))?;
            serde_json::to_writer_pretty(m, manifest)?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            results(&mut lock)?;
            lock.flush()?;
            eprintln!("{}", serde_json::to_string(manifest)?);
        }
    }
    Ok(())
}
