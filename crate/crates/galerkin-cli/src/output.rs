use std::fmt;
use std::fs;
use std::path::PathBuf;

use serde_json::Value;

/// A failure with the exit status it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> CliError {
        CliError { code: 2, message: message.into() }
    }

    pub fn code(&self) -> u8 {
        self.code
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<galerkin::Error> for CliError {
    fn from(e: galerkin::Error) -> CliError {
        CliError { code: if e.is_input_error() { 2 } else { 3 }, message: e.to_string() }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> CliError {
        CliError { code: 3, message: format!("I/O: {e}") }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> CliError {
        CliError { code: 3, message: format!("serialization: {e}") }
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub struct Output {
    pub dir: Option<PathBuf>,
    pub deterministic: bool,
}

fn strip_timings(v: &mut Value) {
    match v {
        Value::Object(m) => {
            m.retain(|k, _| k != "seconds" && k != "timings");
            m.values_mut().for_each(strip_timings);
        }
        Value::Array(a) => a.iter_mut().for_each(strip_timings),
        _ => {}
    }
}

impl Output {
    /// Prints the report and writes it, with the CSV artifacts, to `--out`.
    pub fn emit(&self, mut report: Value, artifacts: &[(&str, String)]) -> CliResult<()> {
        if self.deterministic {
            strip_timings(&mut report);
        }
        let text = serde_json::to_string_pretty(&report)? + "\n";
        if let Some(dir) = &self.dir {
            fs::create_dir_all(dir)?;
            fs::write(dir.join("report.json"), &text)?;
            for (name, body) in artifacts {
                fs::write(dir.join(name), body)?;
            }
        }
        print!("{text}");
        Ok(())
    }
}
