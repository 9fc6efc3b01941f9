//! CSV emission and the run manifest.
//!
//! CSV fields use C-style scientific notation with 17 significant digits,
//! so the bodies of two runs of one scenario are byte-identical.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::ScenarioConfig;
use crate::error::CliError;

pub const MANIFEST_NAME: &str = "manifest.json";

/// `x` as `d.dddddddddddddddde±XX`, matching C's `%.16e`.
pub fn format_sci(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let raw = format!("{x:.16e}");
    let (mantissa, exponent) = raw.split_once('e').expect("exponent form always has an 'e'");
    let exponent: i32 = exponent.parse().expect("exponent is an integer");
    let sign = if exponent < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exponent.abs())
}

/// A CSV cell: numbers are written in full precision, labels verbatim.
#[derive(Debug, Clone)]
pub enum Cell {
    Num(f64),
    Int(usize),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(x) => format_sci(*x),
            Cell::Int(n) => n.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

/// A file emitted by a run, relative to the scenario directory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EmittedFile {
    pub path: String,
    pub kind: String,
    pub rows: usize,
}

/// Writes `rows` under `header` to `dir/name`.
pub fn write_csv(dir: &Path, name: &str, kind: &str, header: &[&str], rows: &[Vec<Cell>]) -> Result<EmittedFile, CliError> {
    let path = dir.join(name);
    let file = File::create(&path).map_err(|e| CliError::io(&path, e))?;
    let mut writer = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(BufWriter::new(file));
    let csv_err = |e: csv::Error| CliError::Csv { path: path.clone(), source: e };
    writer.write_record(header).map_err(csv_err)?;
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        writer.write_record(row.iter().map(Cell::render)).map_err(csv_err)?;
    }
    writer.flush().map_err(|e| CliError::io(&path, e))?;
    Ok(EmittedFile {
        path: name.to_string(),
        kind: kind.to_string(),
        rows: rows.len(),
    })
}

/// An invariant evaluated during a run. Only enforced checks decide the exit
/// code; the others are reported for comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub bound: f64,
    pub enforced: bool,
}

impl Check {
    /// Passes when `measured ≤ bound`.
    pub fn at_most(name: impl Into<String>, measured: f64, bound: f64) -> Self {
        Check {
            name: name.into(),
            passed: measured <= bound,
            measured,
            bound,
            enforced: true,
        }
    }

    /// A measured value recorded for the reader, with no bound.
    pub fn report(name: impl Into<String>, measured: f64) -> Self {
        Check {
            name: name.into(),
            passed: true,
            measured,
            bound: f64::INFINITY,
            enforced: false,
        }
    }

    pub fn informational(mut self) -> Self {
        self.enforced = false;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub scenario: ScenarioConfig,
    pub version: String,
    pub wall_time_s: f64,
    pub files: Vec<EmittedFile>,
    pub checks: Vec<Check>,
}

impl RunManifest {
    pub fn all_enforced_pass(&self) -> bool {
        self.checks.iter().filter(|c| c.enforced).all(|c| c.passed)
    }

    /// Writes the manifest through a temporary file and a rename, so a
    /// manifest exists only for completed runs.
    pub fn write_atomic(&self, dir: &Path) -> Result<PathBuf, CliError> {
        let tmp = dir.join(format!(".{MANIFEST_NAME}.partial"));
        let target = dir.join(MANIFEST_NAME);
        let body = serde_json::to_vec_pretty(self).map_err(CliError::Serialize)?;
        {
            let mut file = File::create(&tmp).map_err(|e| CliError::io(&tmp, e))?;
            file.write_all(&body).map_err(|e| CliError::io(&tmp, e))?;
            file.write_all(b"\n").map_err(|e| CliError::io(&tmp, e))?;
            file.sync_all().map_err(|e| CliError::io(&tmp, e))?;
        }
        fs::rename(&tmp, &target).map_err(|e| CliError::io(&target, e))?;
        Ok(target)
    }
}
