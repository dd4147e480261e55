//! Deterministic CSV, JSON and gnuplot emission.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};

use crate::config::{Format, RunConfig};
use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) => format_number(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) if x.is_finite() => json!(if *x == 0.0 { 0.0 } else { *x }),
            Cell::Num(_) => Value::Null,
            Cell::Int(i) => json!(i),
            Cell::Text(s) => json!(s),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i as i64)
    }
}

impl From<i32> for Cell {
    fn from(i: i32) -> Self {
        Cell::Int(i as i64)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Int(b as i64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

/// Nine significant digits; negative zero printed as zero.
pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.8e}")
}

#[derive(Debug, Clone)]
struct Column {
    name: String,
    energy: bool,
}

/// Rows of named columns. Energy columns gain a `_mhz` twin under scaling.
#[derive(Debug, Clone)]
pub struct Table {
    columns: Vec<Column>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    /// Column names ending in `*` carry energies in units of J.
    pub fn new(columns: &[&str]) -> Self {
        let columns = columns
            .iter()
            .map(|c| Column {
                name: c.trim_end_matches('*').to_string(),
                energy: c.ends_with('*'),
            })
            .collect();
        Table { columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column_names(&self) -> Vec<&str> {
        self.columns.iter().map(|c| c.name.as_str()).collect()
    }

    pub fn scaled(self, scale_mhz: Option<f64>) -> Self {
        let Some(s) = scale_mhz else { return self };
        let mut columns = Vec::new();
        for c in &self.columns {
            columns.push(c.clone());
            if c.energy {
                columns.push(Column {
                    name: format!("{}_mhz", c.name),
                    energy: false,
                });
            }
        }
        let rows = self
            .rows
            .into_iter()
            .map(|row| {
                let mut out = Vec::with_capacity(columns.len());
                for (cell, c) in row.into_iter().zip(&self.columns) {
                    let twin = match (&cell, c.energy) {
                        (Cell::Num(x), true) => Some(Cell::Num(x * s)),
                        _ => None,
                    };
                    out.push(cell);
                    out.extend(twin);
                }
                out
            })
            .collect();
        Table { columns, rows }
    }

    pub fn to_csv(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        let io = |e: csv::Error| CliError::Io(e.to_string());
        w.write_record(self.columns.iter().map(|c| c.name.as_str())).map_err(io)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv)).map_err(io)?;
        }
        w.into_inner().map_err(|e| CliError::Io(e.to_string()))
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    let obj: Map<String, Value> = self
                        .columns
                        .iter()
                        .zip(row)
                        .map(|(c, cell)| (c.name.clone(), cell.json()))
                        .collect();
                    Value::Object(obj)
                })
                .collect(),
        )
    }
}

/// What a command produces: a table, plus an optional structured JSON body
/// used in place of the row array.
pub struct Results {
    pub table: Table,
    pub json: Option<Value>,
    pub plot: Option<PlotSpec>,
    /// One-line summary for stderr.
    pub summary: String,
}

/// Columns to draw, by name.
pub struct PlotSpec {
    pub x: String,
    pub ys: Vec<String>,
    /// Optional column mapped onto the colour palette.
    pub color: Option<String>,
    pub xlabel: String,
    pub ylabel: String,
    pub points: bool,
}

pub fn envelope(config: &RunConfig, data: Value) -> Value {
    json!({
        "metadata": {
            "inputs": config,
            "tool_version": env!("CARGO_PKG_VERSION"),
        },
        "data": data,
    })
}

pub fn render(config: &RunConfig, results: &Results) -> Result<Vec<u8>, CliError> {
    match config.format {
        Format::Csv => results.table.to_csv(),
        Format::Json => {
            let data = results.json.clone().unwrap_or_else(|| results.table.to_json());
            let mut bytes = serde_json::to_vec_pretty(&envelope(config, data))
                .map_err(|e| CliError::Io(e.to_string()))?;
            bytes.push(b'\n');
            Ok(bytes)
        }
    }
}

pub fn plot_path(output: &Path) -> PathBuf {
    output.with_extension("gp")
}

pub fn plot_script(data_file: &Path, table: &Table, spec: &PlotSpec) -> Result<String, CliError> {
    let names = table.column_names();
    let col = |name: &str| {
        names
            .iter()
            .position(|n| *n == name)
            .map(|i| i + 1)
            .ok_or_else(|| CliError::Io(format!("plot column `{name}` missing")))
    };
    let file = data_file
        .file_name()
        .map(|f| f.to_string_lossy().into_owned())
        .unwrap_or_default();
    let png = data_file.with_extension("png");
    let png = png.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default();
    let style = if spec.points { "points pt 7 ps 0.5" } else { "lines" };
    let x = col(&spec.x)?;
    let (color, style) = match &spec.color {
        Some(c) => (format!(":{}", col(c)?), format!("{style} palette")),
        None => (String::new(), style.to_string()),
    };
    let mut plots = Vec::new();
    for y in &spec.ys {
        plots.push(format!("'{file}' using {x}:{}{color} with {style} title '{y}'", col(y)?));
    }
    Ok(format!(
        "set datafile separator ','\nset key autotitle columnhead\nset terminal pngcairo size 900,600\nset output '{png}'\nset xlabel '{}'\nset ylabel '{}'\nplot {}\n",
        spec.xlabel,
        spec.ylabel,
        plots.join(", \\\n     ")
    ))
}

/// Writes the rendered output and, when requested, the plot script.
pub fn emit(config: &RunConfig, results: &Results, stdout: &mut dyn Write) -> Result<(), CliError> {
    let bytes = render(config, results)?;
    match &config.output {
        None => stdout.write_all(&bytes).map_err(|e| CliError::Io(e.to_string()))?,
        Some(path) => {
            let path = Path::new(path);
            std::fs::write(path, &bytes)
                .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
            if config.plot {
                let spec = results
                    .plot
                    .as_ref()
                    .ok_or_else(|| CliError::Config("this command has no plot".into()))?;
                let script = plot_script(path, &results.table, spec)?;
                let gp = plot_path(path);
                std::fs::write(&gp, script)
                    .map_err(|e| CliError::Io(format!("cannot write {}: {e}", gp.display())))?;
            }
        }
    }
    Ok(())
}
