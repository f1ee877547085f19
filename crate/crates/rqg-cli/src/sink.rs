//! Output plumbing shared by all subcommands: metadata headers, CSV and
//! structured-record emission.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde_json::{json, Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    /// Comma-separated rows under a `#` metadata header
    Csv,
    /// One JSON object per line, metadata object first
    Records,
}

/// The run parameters echoed at the top of every output. Reconstructing the
/// command line from these reproduces the data byte for byte, so nothing
/// volatile (timestamps, host names, thread counts) belongs here.
pub struct Meta {
    command: &'static str,
    pairs: Vec<(&'static str, String)>,
}

impl Meta {
    pub fn new(command: &'static str) -> Self {
        Meta {
            command,
            pairs: Vec::new(),
        }
    }

    pub fn push(&mut self, key: &'static str, value: impl ToString) {
        self.pairs.push((key, value.to_string()));
    }

    pub fn write_csv_header(&self, out: &mut dyn Write) -> io::Result<()> {
        writeln!(out, "# rqg {}", env!("CARGO_PKG_VERSION"))?;
        writeln!(out, "# command: {}", self.command)?;
        for (key, value) in &self.pairs {
            writeln!(out, "# {key}: {value}")?;
        }
        Ok(())
    }

    pub fn write_record(&self, out: &mut dyn Write) -> io::Result<()> {
        let mut map = Map::new();
        map.insert("type".to_string(), json!("meta"));
        map.insert("tool".to_string(), json!("rqg"));
        map.insert("version".to_string(), json!(env!("CARGO_PKG_VERSION")));
        map.insert("command".to_string(), json!(self.command));
        for (key, value) in &self.pairs {
            map.insert(key.to_string(), json!(value));
        }
        write_record(out, &Value::Object(map))
    }
}

pub fn open_output(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

/// Companion file for per-edge-count profiles: `surface.csv` maps to
/// `surface.profile.csv`.
pub fn profile_sidecar(path: &Path) -> PathBuf {
    path.with_extension("profile.csv")
}

pub fn write_record(out: &mut dyn Write, value: &Value) -> io::Result<()> {
    serde_json::to_writer(&mut *out, value)?;
    writeln!(out)
}

/// CSV cell for a float: the shortest decimal digits that parse back to
/// exactly this value, so reruns diff clean and readers lose nothing.
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    // serde_json's float path already prints shortest round-trip decimals.
    serde_json::to_string(&x).expect("finite floats serialize")
}
