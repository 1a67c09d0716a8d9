//! Output envelopes, rendering and self-verification.

use std::io::Write;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::args::Format;

pub const TOOL: &str = "zonalpd";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Echo of the options that determine a result. Thread count and output
/// path are left out so that output bytes do not depend on them.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub space: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub kernel: Option<String>,
    #[serde(rename = "N", skip_serializing_if = "Option::is_none", default)]
    pub nmax: Option<usize>,
    pub digits: u32,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub method: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub mode: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub s_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub s_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub step: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub bisect: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub r: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub theta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub points: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub weights: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub perturb: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
    pub format: String,
}

/// Top-level JSON document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Output<T> {
    pub tool: String,
    pub version: String,
    pub config: RunConfig,
    pub result: T,
}

impl<T> Output<T> {
    pub fn new(config: RunConfig, result: T) -> Self {
        Output { tool: TOOL.into(), version: VERSION.into(), config, result }
    }
}

/// A result table for CSV output.
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

/// Renders `output` as pretty JSON, or as CSV with a leading comment line
/// carrying the tool, version and configuration.
pub fn render<T: Serialize>(output: &Output<T>, format: Format, table: impl FnOnce(&T) -> Table) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(output).expect("results serialize to JSON");
            s.push('\n');
            s
        }
        Format::Csv => {
            let config = serde_json::to_string(&output.config).expect("config serializes to JSON");
            let t = table(&output.result);
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(&t.header).expect("in-memory CSV write");
            for row in &t.rows {
                w.write_record(row).expect("in-memory CSV write");
            }
            let body = String::from_utf8(w.into_inner().expect("in-memory CSV flush")).expect("CSV is UTF-8");
            format!("# {} {} {}\n{}", output.tool, output.version, config, body)
        }
    }
}

/// Checks that `text` parses back into the output schema: JSON must
/// deserialize to `Output<T>` and re-serialize to the same bytes; CSV must
/// carry the config comment, the expected header and full rows.
pub fn verify<T: Serialize + DeserializeOwned>(text: &str, format: Format, header: &[&str]) -> Result<(), String> {
    match format {
        Format::Json => {
            let parsed: Output<T> = serde_json::from_str(text).map_err(|e| format!("output does not parse: {e}"))?;
            let mut again = serde_json::to_string_pretty(&parsed).map_err(|e| e.to_string())?;
            again.push('\n');
            if again != text {
                return Err("output does not round-trip through its schema".into());
            }
            Ok(())
        }
        Format::Csv => {
            let comment = text.lines().next().ok_or("empty output")?;
            let config = comment
                .strip_prefix(&format!("# {TOOL} {VERSION} "))
                .ok_or("missing tool/version comment")?;
            serde_json::from_str::<RunConfig>(config).map_err(|e| format!("config echo does not parse: {e}"))?;
            let body = text.split_once('\n').map(|(_, b)| b).unwrap_or("");
            let mut r = csv::ReaderBuilder::new().has_headers(true).flexible(false).from_reader(body.as_bytes());
            let head = r.headers().map_err(|e| format!("bad CSV header: {e}"))?;
            if head.iter().ne(header.iter().copied()) {
                return Err(format!("unexpected CSV header '{}'", head.iter().collect::<Vec<_>>().join(",")));
            }
            for rec in r.records() {
                rec.map_err(|e| format!("bad CSV row: {e}"))?;
            }
            Ok(())
        }
    }
}

/// Writes to `path`, or to standard output.
pub fn emit(text: &str, path: Option<&Path>) -> std::io::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()
        }
    }
}

/// Formats an optional value for CSV, leaving the cell empty for `None`.
pub fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}
