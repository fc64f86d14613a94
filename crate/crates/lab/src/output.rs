//! Rendering of run reports.
//!
//! CSV columns are fixed: `predicate,eps,gap,N_found,bound,verdict`, one
//! line per certificate, theorem clause or identity.

use std::str::FromStr;

use metastab_core::{Error, Result};
use serde::{Deserialize, Serialize};

use crate::runner::{overall, Report, Status};

pub const TOOL: &str = "metastab";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Json,
    Csv,
    Table,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "table" => Ok(Format::Table),
            other => Err(Error::config(format!(
                "unknown format {other:?}; expected json, csv or table"
            ))),
        }
    }
}

/// Top-level JSON document of a run; `verify-cert` reads it back.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunDocument {
    pub tool: String,
    pub version: String,
    pub status: Status,
    pub exit_code: i32,
    pub reports: Vec<Report>,
}

impl RunDocument {
    pub fn new(reports: Vec<Report>) -> Self {
        let status = overall(reports.iter().map(|r| r.status));
        RunDocument {
            tool: TOOL.to_string(),
            version: VERSION.to_string(),
            status,
            exit_code: status.exit_code(),
            reports,
        }
    }
}

pub fn to_json(doc: &RunDocument) -> Result<String> {
    let mut text =
        serde_json::to_string_pretty(doc).map_err(|e| Error::config(format!("json: {e}")))?;
    text.push('\n');
    Ok(text)
}

pub fn to_csv(reports: &[Report]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut wrote_any = false;
    for r in reports {
        for row in &r.rows {
            w.serialize(row)
                .map_err(|e| Error::config(format!("csv: {e}")))?;
            wrote_any = true;
        }
    }
    if !wrote_any {
        w.write_record(["predicate", "eps", "gap", "N_found", "bound", "verdict"])
            .map_err(|e| Error::config(format!("csv: {e}")))?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::config(format!("csv: {e}")))?;
    String::from_utf8(bytes).map_err(|e| Error::config(format!("csv: {e}")))
}

pub fn to_table(reports: &[Report]) -> String {
    let header = ["#", "name", "command", "status", "result"];
    let rows: Vec<[String; 5]> = reports
        .iter()
        .map(|r| {
            [
                r.index.to_string(),
                r.scenario.name.clone().unwrap_or_else(|| "-".into()),
                r.command.clone(),
                r.status.as_str().to_string(),
                match &r.error {
                    Some(e) => e.clone(),
                    None => r.summary.clone(),
                },
            ]
        })
        .collect();
    let mut widths = header.map(str::len);
    for row in &rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let line = |cells: &[String]| {
        let mut s = String::new();
        for (i, (cell, w)) in cells.iter().zip(widths).enumerate() {
            if i + 1 == cells.len() {
                s.push_str(cell);
            } else {
                s.push_str(&format!("{cell:<w$}  "));
            }
        }
        s.push('\n');
        s
    };
    let mut out = line(&header.map(String::from));
    for row in &rows {
        out.push_str(&line(row));
    }
    out
}

pub fn render(reports: Vec<Report>, format: Format) -> Result<String> {
    match format {
        Format::Json => to_json(&RunDocument::new(reports)),
        Format::Csv => to_csv(&reports),
        Format::Table => Ok(to_table(&reports)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::runner::run_scenario;
    use crate::scenario::{parse_scenarios, DEFAULT_CAP};

    fn reports() -> Vec<Report> {
        let text = r#"[
            {"name":"hand","command":"gamma","L":"1","eps":"4","gap":{"kind":"constant","c":0}},
            {"command":"search-n","sequence":{"kind":"geometric","r":"1/2"},"predicate":{"kind":"partial_sums"},"eps":"1/8","gap":{"kind":"constant","c":2}}
        ]"#;
        parse_scenarios(text)
            .unwrap()
            .iter()
            .enumerate()
            .map(|(i, s)| run_scenario(i, s, DEFAULT_CAP))
            .collect()
    }

    #[test]
    fn csv_has_the_fixed_columns() {
        let text = to_csv(&reports()).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next(),
            Some("predicate,eps,gap,N_found,bound,verdict")
        );
        assert_eq!(lines.next(), Some("gamma,4,0,,2,pass"));
        assert!(lines.next().unwrap().ends_with(",3,,pass"));
    }

    #[test]
    fn table_shows_the_headline_value() {
        let text = to_table(&reports());
        let second = text.lines().nth(1).unwrap();
        assert!(
            second.contains("hand") && second.trim_end().ends_with('2'),
            "{second}"
        );
    }

    #[test]
    fn json_round_trips() {
        let doc = RunDocument::new(reports());
        let text = to_json(&doc).unwrap();
        let back: RunDocument = serde_json::from_str(&text).unwrap();
        assert_eq!(to_json(&back).unwrap(), text);
        assert!(matches!("TABLE".parse::<Format>(), Ok(Format::Table)));
        assert!("xml".parse::<Format>().is_err());
    }
}
