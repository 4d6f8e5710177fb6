//! Rendering of reports as aligned tables, CSV or JSON.
//!
//! CSV numbers carry 12 significant digits; JSON keeps full precision.

use std::fs;
use std::path::Path;

use serde_json::{Map, Value};

use crate::error::CliError;
use crate::run::{Cell, Report, ResultRow, SweepTable};
use crate::scenario::round_sig;

pub const CSV_SIGNIFICANT_DIGITS: usize = 12;

const ROW_COLUMNS: [&str; 8] = [
    "scenario",
    "quantity",
    "analytic",
    "mc_value",
    "mc_std_error",
    "verdict",
    "flags",
    "note",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Table,
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "table" => Ok(Format::Table),
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format `{other}` (expected table, csv or json)")),
        }
    }
}

fn num(x: f64) -> String {
    if x.is_finite() {
        round_sig(x, CSV_SIGNIFICANT_DIGITS).to_string()
    } else {
        x.to_string()
    }
}

fn flags_text(row: &ResultRow) -> String {
    row.flags
        .iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect::<Vec<_>>()
        .join(";")
}

fn row_cells(row: &ResultRow) -> Vec<String> {
    vec![
        row.scenario.clone(),
        row.quantity.clone(),
        num(row.analytic),
        row.mc_value.map(num).unwrap_or_default(),
        row.mc_std_error.map(num).unwrap_or_default(),
        row.verdict.clone().unwrap_or_default(),
        flags_text(row),
        row.note.clone().unwrap_or_default(),
    ]
}

fn cell_text(c: &Cell) -> String {
    match c {
        Cell::Num(x) => num(*x),
        Cell::Bool(b) => b.to_string(),
    }
}

fn grid(report: &Report) -> Result<(Vec<String>, Vec<Vec<String>>), CliError> {
    let (header, body): (Vec<String>, Vec<Vec<String>>) = match report {
        Report::Rows(rows) => (
            ROW_COLUMNS.iter().map(|s| s.to_string()).collect(),
            rows.iter().map(row_cells).collect(),
        ),
        Report::Sweep(t) => (
            t.columns.clone(),
            t.rows.iter().map(|r| r.iter().map(cell_text).collect()).collect(),
        ),
    };
    if body.is_empty() {
        return Err(CliError::Output("no rows to emit".into()));
    }
    Ok((header, body))
}

fn render_csv(report: &Report) -> Result<String, CliError> {
    let (header, body) = grid(report)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&header)?;
    for r in &body {
        w.write_record(r)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Output(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Output(e.to_string()))
}

fn render_table(report: &Report) -> Result<String, CliError> {
    let (header, body) = grid(report)?;
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for r in &body {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(c.chars().count());
        }
    }
    let line = |cells: &[String]| {
        let parts: Vec<String> = cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect();
        parts.join("  ").trim_end().to_owned() + "\n"
    };
    let mut out = line(&header);
    let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
    out += &line(&rule);
    for r in &body {
        out += &line(r);
    }
    Ok(out)
}

fn sweep_json(t: &SweepTable) -> Value {
    let rows = t
        .rows
        .iter()
        .map(|r| {
            let mut m = Map::new();
            for (name, c) in t.columns.iter().zip(r) {
                let v = match c {
                    Cell::Num(x) => serde_json::Number::from_f64(*x).map_or(Value::Null, Value::Number),
                    Cell::Bool(b) => Value::Bool(*b),
                };
                m.insert(name.clone(), v);
            }
            Value::Object(m)
        })
        .collect();
    Value::Array(rows)
}

fn render_json(report: &Report) -> Result<String, CliError> {
    let value = match report {
        Report::Rows(rows) if rows.is_empty() => return Err(CliError::Output("no rows to emit".into())),
        Report::Rows(rows) => serde_json::to_value(rows)?,
        Report::Sweep(t) if t.rows.is_empty() => return Err(CliError::Output("no rows to emit".into())),
        Report::Sweep(t) => sweep_json(t),
    };
    Ok(serde_json::to_string_pretty(&value)? + "\n")
}

pub fn render(report: &Report, format: Format) -> Result<String, CliError> {
    match format {
        Format::Table => render_table(report),
        Format::Csv => render_csv(report),
        Format::Json => render_json(report),
    }
}

/// Renders `report` and writes it to `path`, or stdout when `None`.
pub fn emit(report: &Report, format: Format, path: Option<&Path>) -> Result<(), CliError> {
    let text = render(report, format)?;
    match path {
        Some(p) => fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

/// Parses rows previously rendered as JSON.
pub fn parse_rows_json(text: &str) -> Result<Vec<ResultRow>, CliError> {
    Ok(serde_json::from_str(text)?)
}
