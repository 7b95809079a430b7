//! Flat `key = value` settings covering model and training fields.
//!
//! Blank lines and lines starting with `#` are ignored. Keys are the field
//! names of [`ModelConfig`] and [`TrainConfig`].

use std::fs;
use std::path::Path;

use listingqa_core::ranker::ModelConfig;
use listingqa_core::trainer::TrainConfig;
use serde_json::{Map, Value};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Settings {
    pub model: ModelConfig,
    pub train: TrainConfig,
}

fn as_object(v: Value) -> Map<String, Value> {
    match v {
        Value::Object(m) => m,
        _ => unreachable!("configs serialize as objects"),
    }
}

fn parse_like(template: &Value, raw: &str) -> Option<Value> {
    match template {
        Value::Bool(_) => raw.parse::<bool>().ok().map(Value::Bool),
        Value::Number(n) if n.is_u64() => raw.parse::<u64>().ok().map(Value::from),
        Value::Number(_) => raw.parse::<f64>().ok().filter(|v| v.is_finite()).map(Value::from),
        _ => None,
    }
}

pub fn parse_settings(text: &str, source_name: &str) -> Result<Settings> {
    let mut model = as_object(serde_json::to_value(ModelConfig::default()).expect("serializable"));
    let mut train = as_object(serde_json::to_value(TrainConfig::default()).expect("serializable"));
    for (i, line) in text.lines().enumerate() {
        let bad = |message: String| Error::Parse { source_name: source_name.into(), line: i + 1, message };
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, raw) = line.split_once('=').ok_or_else(|| bad("expected key = value".into()))?;
        let (key, raw) = (key.trim(), raw.trim());
        let target = if model.contains_key(key) {
            &mut model
        } else if train.contains_key(key) {
            &mut train
        } else {
            return Err(bad(format!("unknown setting {key:?}")));
        };
        let value = parse_like(&target[key], raw).ok_or_else(|| bad(format!("bad value {raw:?} for {key}")))?;
        target.insert(key.to_string(), value);
    }
    let model: ModelConfig = serde_json::from_value(Value::Object(model)).map_err(|e| Error::Config(e.to_string()))?;
    let train: TrainConfig = serde_json::from_value(Value::Object(train)).map_err(|e| Error::Config(e.to_string()))?;
    model.validate()?;
    train.validate()?;
    Ok(Settings { model, train })
}

pub fn read_settings(path: &Path) -> Result<Settings> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_settings(&text, &path.display().to_string())
}

/// Render settings in the same format, one field per line.
pub fn format_settings(settings: &Settings) -> String {
    let mut out = String::new();
    for section in [
        serde_json::to_value(&settings.model).expect("serializable"),
        serde_json::to_value(&settings.train).expect("serializable"),
    ] {
        for (k, v) in as_object(section) {
            out.push_str(&format!("{k} = {v}\n"));
        }
    }
    out
}
