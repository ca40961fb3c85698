//! Schema-versioned run reports and their JSON/CSV renderings.

use std::collections::BTreeMap;
use std::io::Write;

use hcost_core::{QueryCounters, ScaledCount};
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const SCHEMA: &str = "hcost-run-report";
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema: String,
    pub schema_version: u32,
    pub command: String,
    /// Fully resolved command configuration.
    pub config: Value,
    /// Sample-size formulas with their unscaled values and the counts used.
    #[serde(default)]
    pub formulas: Vec<ScaledCount>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub queries: Option<QueryCounters>,
    pub result: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baselines: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residuals: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// Wall-clock seconds per stage; only present when requested.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timings: Option<BTreeMap<String, f64>>,
}

impl RunReport {
    pub fn new(command: &str, config: Value) -> Self {
        RunReport {
            schema: SCHEMA.into(),
            schema_version: SCHEMA_VERSION,
            command: command.into(),
            config,
            formulas: Vec::new(),
            queries: None,
            result: Value::Null,
            baselines: None,
            residuals: None,
            error: None,
            timings: None,
        }
    }

    pub fn from_json(s: &str) -> Result<Self, String> {
        let r: RunReport = serde_json::from_str(s).map_err(|e| e.to_string())?;
        if r.schema != SCHEMA {
            return Err(format!("unknown schema {:?}", r.schema));
        }
        if r.schema_version != SCHEMA_VERSION {
            return Err(format!("unsupported schema version {}", r.schema_version));
        }
        Ok(r)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    /// Scalar fields of `config`, `result`, `baselines` and `queries`,
    /// flattened to dotted keys.
    pub fn scalars(&self) -> BTreeMap<String, String> {
        let mut out = BTreeMap::new();
        out.insert("command".into(), self.command.clone());
        flatten("config", &self.config, &mut out);
        flatten("result", &self.result, &mut out);
        if let Some(b) = &self.baselines {
            flatten("baselines", b, &mut out);
        }
        if let Some(q) = &self.queries {
            flatten("queries", &serde_json::to_value(q).expect("counters serialize"), &mut out);
        }
        if let Some(e) = &self.error {
            out.insert("error".into(), e.clone());
        }
        out
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut BTreeMap<String, String>) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                flatten(&format!("{prefix}.{k}"), x, out);
            }
        }
        Value::Array(_) | Value::Null => {}
        Value::String(s) => {
            out.insert(prefix.into(), s.clone());
        }
        other => {
            out.insert(prefix.into(), other.to_string());
        }
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// One header row plus one row per report over the union of scalar keys.
pub fn write_csv<W: Write>(mut w: W, reports: &[RunReport]) -> std::io::Result<()> {
    let rows: Vec<_> = reports.iter().map(RunReport::scalars).collect();
    let mut keys: Vec<&String> = rows.iter().flat_map(|r| r.keys()).collect();
    keys.sort();
    keys.dedup();
    let header: Vec<String> = keys.iter().map(|k| csv_field(k)).collect();
    writeln!(w, "{}", header.join(","))?;
    for r in &rows {
        let line: Vec<String> = keys
            .iter()
            .map(|k| r.get(*k).map(|v| csv_field(v)).unwrap_or_default())
            .collect();
        writeln!(w, "{}", line.join(","))?;
    }
    Ok(())
}

/// Per-row table from an array field of `result`, e.g. experiment trials.
pub fn write_table_csv<W: Write>(mut w: W, rows: &[Value]) -> std::io::Result<()> {
    let mut keys: Vec<String> = Vec::new();
    for r in rows {
        if let Value::Object(m) = r {
            for k in m.keys() {
                if !keys.contains(k) {
                    keys.push(k.clone());
                }
            }
        }
    }
    writeln!(w, "{}", keys.join(","))?;
    for r in rows {
        let line: Vec<String> = keys
            .iter()
            .map(|k| match r.get(k) {
                Some(Value::String(s)) => csv_field(s),
                Some(Value::Null) | None => String::new(),
                Some(v) => csv_field(&v.to_string()),
            })
            .collect();
        writeln!(w, "{}", line.join(","))?;
    }
    Ok(())
}
