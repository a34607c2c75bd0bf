//! Report serialization: one file per suite plus a separate timings file, so
//! report bytes depend only on the configuration.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::suites::Report;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    fn extension(&self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Serialize)]
struct CsvRow<'a> {
    suite: &'a str,
    case: &'a str,
    inputs: &'a str,
    lhs: Option<f64>,
    rhs: Option<f64>,
    gap: Option<f64>,
    tolerance: f64,
    pass: bool,
    note: &'a str,
}

pub fn to_csv(report: &Report) -> Result<String, Box<dyn std::error::Error>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for c in &report.cases {
        w.serialize(CsvRow {
            suite: report.suite,
            case: &c.case,
            inputs: &c.inputs,
            lhs: c.lhs,
            rhs: c.rhs,
            gap: c.gap,
            tolerance: c.tolerance,
            pass: c.pass,
            note: &c.note,
        })?;
    }
    if report.cases.is_empty() {
        // keep the header so empty suites still produce a well-formed table
        return Ok("suite,case,inputs,lhs,rhs,gap,tolerance,pass,note\n".into());
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

/// Writes `<suite>.<ext>` into `dir`; CSV reports get their metadata in a
/// `<suite>.meta.json` sidecar.
pub fn write_report(dir: &Path, report: &Report, format: Format) -> Result<PathBuf, Box<dyn std::error::Error>> {
    let path = dir.join(format!("{}.{}", report.suite, format.extension()));
    match format {
        Format::Csv => {
            fs::write(&path, to_csv(report)?)?;
            let meta = serde_json::to_string_pretty(&report.metadata)?;
            fs::write(dir.join(format!("{}.meta.json", report.suite)), meta + "\n")?;
        }
        Format::Json => fs::write(&path, serde_json::to_string_pretty(report)? + "\n")?,
    }
    Ok(path)
}

#[derive(Serialize)]
pub struct Timing {
    pub suite: &'static str,
    pub seconds: f64,
}

pub fn write_timings(dir: &Path, timings: &[Timing]) -> Result<(), Box<dyn std::error::Error>> {
    fs::write(dir.join("timings.json"), serde_json::to_string_pretty(timings)? + "\n")?;
    Ok(())
}
