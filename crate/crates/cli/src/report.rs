use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use gwa_core::formats::{to_canonical_json, FormatError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Text,
    Machine,
}

/// Usage and input errors; they exit with status 2.
#[derive(Debug)]
pub struct CliError(pub String);

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

macro_rules! from_error {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError(e.to_string())
            }
        }
    )*};
}

from_error!(
    FormatError,
    std::io::Error,
    gwa_core::SignatureError,
    gwa_core::GraphError,
    gwa_core::engine::EngineError,
    gwa_core::hom::HomError,
    gwa_core::witnesses::WitnessError,
    gwa_core::trees::TreeError
);

pub type CliResult<T> = Result<T, CliError>;

#[derive(Serialize)]
struct Machine<'a> {
    command: &'a str,
    inputs: &'a BTreeMap<String, String>,
    parameters: &'a BTreeMap<String, Value>,
    results: &'a Value,
    status: &'a str,
}

/// Everything a command reports. Machine output leaves out the wall time
/// so that identical runs print identical bytes.
pub struct Report {
    command: String,
    inputs: BTreeMap<String, String>,
    parameters: BTreeMap<String, Value>,
    results: Value,
    failures: usize,
    lines: Vec<String>,
    started: Instant,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Report {
            command: command.to_string(),
            inputs: BTreeMap::new(),
            parameters: BTreeMap::new(),
            results: Value::Null,
            failures: 0,
            lines: Vec::new(),
            started: Instant::now(),
        }
    }

    /// Reads a file and records its SHA-256.
    pub fn read(&mut self, path: &Path) -> CliResult<String> {
        let bytes = std::fs::read(path).map_err(|e| CliError(format!("{}: {e}", path.display())))?;
        self.inputs
            .insert(path.display().to_string(), hex::encode(Sha256::digest(&bytes)));
        String::from_utf8(bytes).map_err(|_| CliError(format!("{}: not UTF-8", path.display())))
    }

    pub fn param(&mut self, key: &str, value: impl Serialize) {
        self.parameters
            .insert(key.to_string(), serde_json::to_value(value).expect("parameters serialize"));
    }

    pub fn results(&mut self, value: impl Serialize) {
        self.results = serde_json::to_value(value).expect("results serialize");
    }

    pub fn fail(&mut self, count: usize) {
        self.failures += count;
    }

    pub fn line(&mut self, s: impl Into<String>) {
        self.lines.push(s.into());
    }

    /// Prints the report and returns the exit status.
    pub fn emit(&self, format: Format) -> i32 {
        let status = if self.failures == 0 { "ok" } else { "failed" };
        match format {
            Format::Machine => {
                let m = Machine {
                    command: &self.command,
                    inputs: &self.inputs,
                    parameters: &self.parameters,
                    results: &self.results,
                    status,
                };
                stdout(&to_canonical_json(&m));
            }
            Format::Text => {
                let mut text = String::new();
                for l in &self.lines {
                    text.push_str(l);
                    text.push('\n');
                }
                for (path, digest) in &self.inputs {
                    text.push_str(&format!("input {path} sha256:{digest}\n"));
                }
                text.push_str(&format!("{} {status} in {:.2?}\n", self.command, self.started.elapsed()));
                stdout(&text);
            }
        }
        i32::from(self.failures > 0)
    }
}

/// Writes `text` to `out` or, without a path, to standard output.
pub fn write_output(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError(format!("{}: {e}", p.display()))),
        None => {
            stdout(text);
            Ok(())
        }
    }
}

/// Writes to standard output; a closed pipe is not an error.
fn stdout(text: &str) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(text.as_bytes()).and_then(|_| out.flush());
}
