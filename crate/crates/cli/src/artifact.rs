//! Self-describing output files.
//!
//! JSON artifacts are `{ "meta": ..., "result": ... }`; CSV artifacts start
//! with `#` comment lines carrying the same metadata. All floats are
//! rounded to 12 significant digits so reruns compare byte for byte.

use std::fs;
use std::path::{Path, PathBuf};

use kpp_core::fmt::round_sig;
use serde::Serialize;
use serde_json::Value;

use crate::config::{Command, ExperimentConfig};
use crate::CliError;

pub const TOOL: &str = "kpplab";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Serialize)]
pub struct Meta {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: Command,
    pub seed: Option<u64>,
    pub config: Value,
}

impl Meta {
    pub fn new(command: Command, config: &ExperimentConfig) -> Self {
        let mut config = serde_json::to_value(config).expect("config serializes to JSON");
        round_numbers(&mut config);
        Self {
            tool: TOOL,
            version: VERSION,
            command,
            seed: config_seed(config.get("path")),
            config,
        }
    }
}

fn config_seed(path: Option<&Value>) -> Option<u64> {
    path?.get("seed")?.as_u64()
}

/// Rounds every float in `v` to 12 significant digits, in place.
pub fn round_numbers(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = round_sig(n.as_f64().unwrap());
            *v = serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number);
        }
        Value::Array(items) => items.iter_mut().for_each(round_numbers),
        Value::Object(map) => map.values_mut().for_each(round_numbers),
        _ => {}
    }
}

pub fn json_document(meta: &Meta, result: &Value) -> String {
    let mut doc = serde_json::json!({ "meta": meta, "result": result });
    round_numbers(&mut doc);
    let mut s = serde_json::to_string_pretty(&doc).expect("JSON serializes");
    s.push('\n');
    s
}

pub fn csv_document(meta: &Meta, body: &[u8]) -> Vec<u8> {
    let mut out = format!(
        "# {} {} command={} seed={}\n# config {}\n",
        meta.tool,
        meta.version,
        meta.command.name(),
        meta.seed.map_or("none".to_string(), |s| s.to_string()),
        meta.config
    )
    .into_bytes();
    out.extend_from_slice(body);
    out
}

pub fn write(dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir)?;
    let p = dir.join(name);
    fs::write(&p, bytes)?;
    Ok(p)
}
