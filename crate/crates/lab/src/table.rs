//! Result tables and their CSV form.
//!
//! Numbers are written with 17 significant digits, which round-trips every
//! finite `f64` exactly. Metadata precedes the header as `# key = value` lines.

use std::fmt;
use std::path::Path;

use crate::error::LabError;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Num(f64),
    Flag(bool),
}

impl Cell {
    pub fn num(&self) -> Option<f64> {
        match self {
            Cell::Num(x) => Some(*x),
            Cell::Flag(_) => None,
        }
    }

    pub fn flag(&self) -> Option<bool> {
        match self {
            Cell::Flag(b) => Some(*b),
            Cell::Num(_) => None,
        }
    }

    /// Bitwise equality, so that `NaN` cells compare equal to themselves.
    pub fn same_bits(&self, other: &Cell) -> bool {
        match (self, other) {
            (Cell::Num(a), Cell::Num(b)) => a.to_bits() == b.to_bits(),
            (Cell::Flag(a), Cell::Flag(b)) => a == b,
            _ => false,
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Flag(b)
    }
}

impl From<usize> for Cell {
    fn from(n: usize) -> Self {
        Cell::Num(n as f64)
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Num(x) if x.is_finite() => write!(f, "{x:.16e}"),
            Cell::Num(x) => write!(f, "{x}"),
            Cell::Flag(b) => write!(f, "{b}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Metadata {
    pub scenario_hash: String,
    pub version: String,
    pub subcommand: String,
    /// Additional `key = value` lines, in order.
    pub extra: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    /// File stem for the emitted artifacts.
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub metadata: Metadata,
}

impl ResultTable {
    pub fn new(name: &str, columns: &[&str], metadata: Metadata) -> Self {
        Self {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            metadata,
        }
    }

    /// Appends a row; panics if its width differs from the header.
    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(
            row.len(),
            self.columns.len(),
            "row width does not match columns of table `{}`",
            self.name
        );
        self.rows.push(row);
    }

    pub fn note(&mut self, key: &str, value: impl ToString) {
        self.metadata.extra.push((key.to_string(), value.to_string()));
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Numeric values of a column; flags and missing columns give `None`.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.column_index(name)?;
        self.rows.iter().map(|r| r[j].num()).collect()
    }

    pub fn is_rectangular(&self) -> bool {
        self.rows.iter().all(|r| r.len() == self.columns.len())
    }

    /// Cell-by-cell bitwise comparison of rows and columns.
    pub fn same_values(&self, other: &ResultTable) -> bool {
        self.columns == other.columns
            && self.rows.len() == other.rows.len()
            && self
                .rows
                .iter()
                .zip(&other.rows)
                .all(|(a, b)| a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.same_bits(y)))
    }

    /// CSV text: metadata comments, header, rows, final newline.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let m = &self.metadata;
        for (k, v) in [
            ("table", self.name.as_str()),
            ("scenario_hash", m.scenario_hash.as_str()),
            ("version", m.version.as_str()),
            ("subcommand", m.subcommand.as_str()),
        ] {
            out.push_str(&format!("# {k} = {v}\n"));
        }
        for (k, v) in &m.extra {
            out.push_str(&format!("# {k} = {v}\n"));
        }
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(|c| c.to_string())).expect("in-memory write");
        }
        let body = w.into_inner().expect("in-memory flush");
        out.push_str(std::str::from_utf8(&body).expect("utf-8 output"));
        out
    }
}

/// Writes the table as CSV to `path`.
pub fn emit_csv(t: &ResultTable, path: &Path) -> Result<(), LabError> {
    if !t.is_rectangular() {
        return Err(LabError::Csv {
            path: path.to_path_buf(),
            message: format!("table `{}` is not rectangular", t.name),
        });
    }
    std::fs::write(path, t.to_csv()).map_err(|source| LabError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn parse_cell(field: &str) -> Option<Cell> {
    match field {
        "true" => Some(Cell::Flag(true)),
        "false" => Some(Cell::Flag(false)),
        _ => field.parse::<f64>().ok().map(Cell::Num),
    }
}

/// Parses CSV text produced by [`ResultTable::to_csv`].
pub fn parse_csv_str(text: &str, path: &Path) -> Result<ResultTable, LabError> {
    let err = |message: String| LabError::Csv {
        path: path.to_path_buf(),
        message,
    };
    let mut name = String::new();
    let mut meta = Metadata {
        scenario_hash: String::new(),
        version: String::new(),
        subcommand: String::new(),
        extra: Vec::new(),
    };
    for line in text.lines().take_while(|l| l.starts_with('#')) {
        let (k, v) = line[1..]
            .split_once(" = ")
            .ok_or_else(|| err(format!("malformed metadata line `{line}`")))?;
        let (k, v) = (k.trim().to_string(), v.to_string());
        match k.as_str() {
            "table" => name = v,
            "scenario_hash" => meta.scenario_hash = v,
            "version" => meta.version = v,
            "subcommand" => meta.subcommand = v,
            _ => meta.extra.push((k, v)),
        }
    }
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let columns = r
        .headers()
        .map_err(|e| err(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect::<Vec<_>>();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| err(e.to_string()))?;
        let row = rec
            .iter()
            .map(|f| parse_cell(f).ok_or_else(|| err(format!("unparseable cell `{f}`"))))
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    Ok(ResultTable {
        name,
        columns,
        rows,
        metadata: meta,
    })
}

/// Reads and parses a CSV file written by [`emit_csv`].
pub fn parse_csv(path: &Path) -> Result<ResultTable, LabError> {
    let text = std::fs::read_to_string(path).map_err(|source| LabError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_csv_str(&text, path)
}
