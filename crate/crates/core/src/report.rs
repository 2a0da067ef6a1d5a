//! Tables, histogram data and on-disk report bundles.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};

use crate::config::{ExperimentKind, OutputFormat};
use crate::error::Result;
use crate::measures::{BinSpec, EmpiricalLaw};

/// Bundle file excluded from byte-for-byte comparisons.
pub const TIMING_FILE: &str = "timing.json";

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Bool(bool),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
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

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Empty, Into::into)
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Num(v) => write!(f, "{v}"),
            Cell::Int(v) => write!(f, "{v}"),
            Cell::Text(s) => f.write_str(s),
            Cell::Bool(b) => write!(f, "{b}"),
            Cell::Empty => Ok(()),
        }
    }
}

impl Cell {
    fn to_json(&self) -> Value {
        match self {
            Cell::Num(v) if v.is_finite() => json!(v),
            Cell::Num(v) => json!(v.to_string()),
            Cell::Int(v) => json!(v),
            Cell::Text(s) => json!(s),
            Cell::Bool(b) => json!(b),
            Cell::Empty => Value::Null,
        }
    }
}

/// A named table. CSV puts `meta` on a leading `#` line; JSON puts it at the
/// top level next to `rows`.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub meta: Vec<(String, Cell)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: impl Into<String>, columns: &[&str]) -> Self {
        Self {
            name: name.into(),
            meta: Vec::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn meta(mut self, key: &str, value: impl Into<Cell>) -> Self {
        self.meta.push((key.to_string(), value.into()));
        self
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        if !self.meta.is_empty() {
            let parts: Vec<String> = self.meta.iter().map(|(k, v)| format!("{k}={v}")).collect();
            let _ = writeln!(out, "# {}", parts.join(","));
        }
        let _ = writeln!(out, "{}", self.columns.join(","));
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(csv_field).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }

    pub fn to_json(&self) -> Value {
        let mut obj = Map::new();
        for (k, v) in &self.meta {
            obj.insert(k.clone(), v.to_json());
        }
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let m: Map<String, Value> = self.columns.iter().cloned().zip(row.iter().map(Cell::to_json)).collect();
                Value::Object(m)
            })
            .collect();
        obj.insert("rows".into(), Value::Array(rows));
        Value::Object(obj)
    }

    pub fn render(&self, format: OutputFormat) -> (String, String) {
        let body = match format {
            OutputFormat::Csv => self.to_csv(),
            OutputFormat::Json => pretty(&self.to_json()),
        };
        (format!("{}.{}", self.name, format.extension()), body)
    }
}

fn csv_field(c: &Cell) -> String {
    let s = c.to_string();
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json value");
    s.push('\n');
    s
}

pub fn law_table(name: impl Into<String>, law: &EmpiricalLaw) -> Table {
    let mut t = Table::new(name, &["position", "weight"])
        .meta("level", law.level)
        .meta("strict", law.strict)
        .meta("crossed_mass", law.crossed_mass())
        .meta("censored_mass", law.censored_mass())
        .meta("n_replicates", law.n_replicates)
        .meta("seed", law.seed);
    for a in &law.atoms {
        t.push(vec![a.position.into(), law.weight(a).into()]);
    }
    t
}

/// Occupied bins of `law` as `bin_left,bin_right,mass` rows.
pub fn histogram_table(name: impl Into<String>, law: &EmpiricalLaw, bins: &BinSpec) -> Table {
    let mut mass = vec![0u64; bins.len()];
    for a in &law.atoms {
        mass[bins.index(a.position)] += a.count;
    }
    let mut t = Table::new(name, &["bin_left", "bin_right", "mass"])
        .meta("level", law.level)
        .meta("crossed_mass", law.crossed_mass())
        .meta("censored_mass", law.censored_mass());
    for (i, m) in mass.into_iter().enumerate().filter(|(_, m)| *m > 0) {
        let (l, r) = bins.bounds(i);
        t.push(vec![l.into(), r.into(), (m as f64 / law.n_replicates as f64).into()]);
    }
    t
}

pub fn emit_histogram_data(law: &EmpiricalLaw, bins: &BinSpec, path: impl AsRef<Path>, format: OutputFormat) -> Result<()> {
    let (_, body) = histogram_table("histogram", law, bins).render(format);
    std::fs::write(path, body)?;
    Ok(())
}

/// Histogram bins for a law: width `h/4` on a lattice, otherwise 40 bins
/// across the observed support.
pub fn default_histogram_bins(law: &EmpiricalLaw, lattice: Option<f64>) -> BinSpec {
    let (lo, hi) = match (law.atoms.first(), law.atoms.last()) {
        (Some(a), Some(b)) => (a.position, b.position),
        _ => (law.level.max(0.0), law.level.max(0.0)),
    };
    let width = match lattice {
        Some(h) => h / 4.0,
        None if hi > lo => (hi - lo) / 40.0,
        None => 1e-3,
    };
    let start = lo - width / 2.0;
    let count = (((hi - start) / width).floor() as usize + 2).min(100_000);
    BinSpec::Intervals((0..=count).map(|k| start + k as f64 * width).collect())
}

/// Output files of one experiment, keyed by file name.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportBundle {
    pub experiment: ExperimentKind,
    pub format: OutputFormat,
    pub files: BTreeMap<String, String>,
    /// Theorem violations found during the run; any makes the run fail.
    pub violations: Vec<String>,
    pub summary: String,
    pub wall_time_secs: f64,
}

impl ReportBundle {
    pub fn new(experiment: ExperimentKind, format: OutputFormat) -> Self {
        Self {
            experiment,
            format,
            files: BTreeMap::new(),
            violations: Vec::new(),
            summary: String::new(),
            wall_time_secs: 0.0,
        }
    }

    pub fn add_table(&mut self, table: &Table) {
        let (name, body) = table.render(self.format);
        self.files.insert(name, body);
    }

    pub fn add_file(&mut self, name: impl Into<String>, body: impl Into<String>) {
        self.files.insert(name.into(), body.into());
    }

    pub fn line(&mut self, text: impl AsRef<str>) {
        self.summary.push_str(text.as_ref());
        self.summary.push('\n');
    }

    pub fn exit_code(&self) -> i32 {
        if self.violations.is_empty() {
            0
        } else {
            2
        }
    }

    /// Writes every file plus the timing sidecar; returns the paths written.
    pub fn write_to(&self, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        for (name, body) in &self.files {
            let p = dir.join(name);
            std::fs::write(&p, body)?;
            written.push(p);
        }
        let timing = dir.join(TIMING_FILE);
        std::fs::write(&timing, pretty(&json!({ "wall_time_secs": self.wall_time_secs })))?;
        written.push(timing);
        Ok(written)
    }
}
