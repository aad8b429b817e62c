use std::path::Path;

use qsmatch_core::stats::ExperimentConfig;
use sha2::{Digest, Sha256};
use toml::{Table, Value};

use crate::error::{CliError, Result};

const TOP_KEYS: &[&str] = &[
    "epsilon",
    "theta0",
    "phi0",
    "shots",
    "iterations",
    "exact",
    "backend",
    "seed",
    "noise",
];
const SECTIONS: &[(&str, &[&str])] = &[
    ("theta0", &["count", "start", "end"]),
    ("phi0", &["policy", "count"]),
    ("noise", &["readout", "damping", "prep_overrotation"]),
];

/// Every key in `table` that the schema does not know, as dotted paths.
pub fn unknown_keys(table: &Table) -> Vec<String> {
    let mut out = Vec::new();
    for (key, value) in table {
        if !TOP_KEYS.contains(&key.as_str()) {
            out.push(key.clone());
            continue;
        }
        let Some((_, allowed)) = SECTIONS.iter().find(|(s, _)| s == key) else {
            continue;
        };
        if let Value::Table(inner) = value {
            out.extend(
                inner
                    .keys()
                    .filter(|k| !allowed.contains(&k.as_str()))
                    .map(|k| format!("{key}.{k}")),
            );
        }
    }
    out
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let table: Table = text.parse().map_err(|e: toml::de::Error| CliError::Config(e.to_string()))?;
    let unknown = unknown_keys(&table);
    if !unknown.is_empty() {
        return Err(CliError::Config(format!("unknown keys: {}", unknown.join(", "))));
    }
    let config: ExperimentConfig = Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| CliError::Config(e.to_string()))?;
    config.validate().map_err(|e| CliError::Config(e.to_string()))?;
    Ok(config)
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_config(&text).map_err(|e| match e {
        CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
        other => other,
    })
}

/// SHA-256 of the canonical JSON form; equal for configs that differ only in layout,
/// key order or spelled-out defaults.
pub fn config_hash<T: serde::Serialize>(value: &T) -> String {
    let json = serde_json::to_string(value).expect("config serializes");
    hex::encode(Sha256::digest(json.as_bytes()))
}
