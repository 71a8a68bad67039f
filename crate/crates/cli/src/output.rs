use std::fmt::Write as _;
use std::path::PathBuf;

use serde_json::{json, Value};

use crate::config::{Format, RunConfig};
use crate::CliError;

#[derive(Clone, Debug)]
pub enum Cell {
    F(f64),
    I(i128),
    B(bool),
    S(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::F(x) => format!("{x:.16e}"),
            Cell::I(i) => i.to_string(),
            Cell::B(b) => u8::from(*b).to_string(),
            Cell::S(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::F(x) if x.is_finite() => json!(x),
            Cell::F(x) => json!(x.to_string()),
            Cell::I(i) => json!(*i as f64),
            Cell::B(b) => json!(b),
            Cell::S(s) => json!(s),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::F(x)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::B(b)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::I(i as i128)
    }
}

impl From<u128> for Cell {
    fn from(i: u128) -> Self {
        Cell::I(i as i128)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::S(s.to_string())
    }
}

pub struct Table {
    pub comments: Vec<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            comments: Vec::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn comment(&mut self, line: impl Into<String>) {
        self.comments.push(line.into());
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for c in &self.comments {
            let _ = writeln!(out, "# {c}");
        }
        let _ = writeln!(out, "{}", self.columns.join(","));
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }

    fn to_json(&self) -> Value {
        json!({
            "comments": self.comments,
            "columns": self.columns,
            "rows": self.rows.iter().map(|r| r.iter().map(Cell::json).collect::<Vec<_>>()).collect::<Vec<_>>(),
        })
    }
}

/// Writes `table` and its sidecar; returns the data file path.
pub fn write(config: &RunConfig, table: &Table, summary: Value) -> Result<PathBuf, CliError> {
    let dir = config.output_dir.clone().unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir)?;
    let name = config.command.clone().unwrap_or_else(|| "output".into());
    let sidecar = json!({
        "config": config,
        "version": env!("CARGO_PKG_VERSION"),
        "summary": summary,
    });
    match config.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let data = dir.join(format!("{name}.csv"));
            std::fs::write(&data, table.to_csv())?;
            let mut meta = sidecar;
            meta["data"] = json!(data.file_name().unwrap().to_string_lossy());
            std::fs::write(
                dir.join(format!("{name}.meta.json")),
                serde_json::to_string_pretty(&meta).unwrap() + "\n",
            )?;
            Ok(data)
        }
        Format::Json => {
            let data = dir.join(format!("{name}.json"));
            let mut all = sidecar;
            all["table"] = table.to_json();
            std::fs::write(&data, serde_json::to_string_pretty(&all).unwrap() + "\n")?;
            Ok(data)
        }
    }
}
