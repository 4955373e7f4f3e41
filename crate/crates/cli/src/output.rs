//! Report envelopes: resolved config + optional metadata + report body,
//! emitted as JSON (default) or flat key,value CSV.

use anyhow::Context;
use serde::Serialize;
use std::io::Write;
use std::path::Path;

#[derive(Debug, Clone, Serialize)]
pub struct Meta {
    pub timestamp_unix: u64,
    pub version: &'static str,
}

impl Meta {
    pub fn now() -> Self {
        Meta {
            timestamp_unix: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            version: env!("CARGO_PKG_VERSION"),
        }
    }
}

#[derive(Serialize)]
struct Envelope<'a, C: Serialize, R: Serialize> {
    config: &'a C,
    #[serde(skip_serializing_if = "Option::is_none")]
    meta: Option<Meta>,
    #[serde(flatten)]
    report: &'a R,
}

pub fn emit<C: Serialize, R: Serialize>(
    out: Option<&Path>,
    format: &str,
    config: &C,
    meta: Option<Meta>,
    report: &R,
) -> anyhow::Result<()> {
    let envelope = Envelope {
        config,
        meta,
        report,
    };
    let text = match format {
        "json" => {
            let mut s = serde_json::to_string_pretty(&envelope)?;
            s.push('\n');
            s
        }
        "csv" => to_csv(&serde_json::to_value(&envelope)?),
        other => anyhow::bail!("unknown format '{other}'"),
    };
    match out {
        Some(path) => {
            let mut f = std::fs::File::create(path)
                .with_context(|| format!("creating {}", path.display()))?;
            f.write_all(text.as_bytes())?;
        }
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
        }
    }
    Ok(())
}

/// Flatten the envelope to `key,value` lines; nested objects use dotted
/// keys, arrays are embedded as compact JSON.
fn to_csv(value: &serde_json::Value) -> String {
    let mut rows = vec!["key,value".to_string()];
    flatten("", value, &mut rows);
    rows.push(String::new());
    rows.join("\n")
}

fn flatten(prefix: &str, value: &serde_json::Value, rows: &mut Vec<String>) {
    match value {
        serde_json::Value::Object(map) => {
            for (k, v) in map {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten(&key, v, rows);
            }
        }
        other => {
            let rendered = other.to_string();
            let quoted = if rendered.contains(',') {
                format!("\"{}\"", rendered.replace('"', "\"\""))
            } else {
                rendered
            };
            rows.push(format!("{prefix},{quoted}"));
        }
    }
}
