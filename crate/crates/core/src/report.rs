//! Report documents: provenance plus named result sections.
//!
//! JSON output keeps insertion order for every object, and numbers are
//! written in shortest round-trip form, so the same document always
//! serializes to the same bytes.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::metrics::MetricInterval;
use crate::resample::BootstrapSpec;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputDigest {
    pub role: String,
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub tool_version: String,
    pub command: Vec<String>,
    pub seed: Option<u64>,
    pub inputs: Vec<InputDigest>,
    pub results: Map<String, Value>,
}

impl ReportDocument {
    pub fn new(command: Vec<String>) -> Self {
        Self {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command,
            seed: None,
            inputs: Vec::new(),
            results: Map::new(),
        }
    }

    pub fn add_input(&mut self, role: &str, path: &str, sha256: String) {
        self.inputs.push(InputDigest {
            role: role.to_string(),
            path: path.to_string(),
            sha256,
        });
    }

    /// Adds a deterministic section.
    pub fn section(&mut self, name: &str, value: impl Serialize) -> Result<()> {
        let value = serde_json::to_value(value).map_err(|e| Error::Serialization(e.to_string()))?;
        self.results.insert(name.to_string(), value);
        Ok(())
    }

    /// Adds a section computed by resampling; the seed and replicate count are
    /// recorded inside it and the document seed is set.
    pub fn stochastic_section(
        &mut self,
        name: &str,
        value: impl Serialize,
        seed: u64,
        replicates: usize,
    ) -> Result<()> {
        let mut value = serde_json::to_value(value).map_err(|e| Error::Serialization(e.to_string()))?;
        let provenance = serde_json::json!({ "seed": seed, "replicates": replicates });
        match &mut value {
            Value::Object(m) => {
                m.insert("provenance".into(), provenance);
            }
            other => {
                let inner = other.take();
                let mut m = Map::new();
                m.insert("value".into(), inner);
                m.insert("provenance".into(), provenance);
                *other = Value::Object(m);
            }
        }
        self.seed = Some(seed);
        self.results.insert(name.to_string(), value);
        Ok(())
    }

    /// Every stochastic section carries a seed and replicate count.
    pub fn check_provenance(&self) -> Result<()> {
        if self.results.values().any(has_provenance) && self.seed.is_none() {
            return Err(Error::invalid("stochastic results without a document seed"));
        }
        Ok(())
    }
}

fn has_provenance(v: &Value) -> bool {
    v.get("provenance")
        .is_some_and(|p| p.get("seed").is_some() && p.get("replicates").is_some())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(Error::UnsupportedFormat(other.to_string())),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Json => "json",
            Format::Csv => "csv",
        })
    }
}

/// Row of the metric table: `metric,estimate,lower,upper`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub metric: String,
    pub estimate: Option<f64>,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
}

/// The `metrics` section: `{metric: {estimate, lower, upper, n_valid_replicates, n_undefined_replicates}}`.
pub fn metrics_section(intervals: &[MetricInterval], spec: &BootstrapSpec) -> Value {
    let mut m = Map::new();
    for mi in intervals {
        let mut entry = Map::new();
        entry.insert("estimate".into(), serde_json::json!(mi.estimate));
        entry.insert("lower".into(), serde_json::json!(mi.interval.map(|i| i.lower)));
        entry.insert("upper".into(), serde_json::json!(mi.interval.map(|i| i.upper)));
        entry.insert(
            "n_valid_replicates".into(),
            serde_json::json!(mi.interval.map_or(0, |i| i.n_valid_replicates)),
        );
        entry.insert(
            "n_undefined_replicates".into(),
            serde_json::json!(mi.interval.map_or(spec.replicates, |i| i.n_undefined_replicates)),
        );
        m.insert(mi.metric.name().into(), Value::Object(entry));
    }
    Value::Object(m)
}

/// Metric rows from the document's `metrics` section, if it has one.
pub fn metric_rows(doc: &ReportDocument) -> Option<Vec<MetricRow>> {
    let metrics = doc.results.get("metrics")?.as_object()?;
    Some(
        metrics
            .iter()
            .filter(|(k, _)| k.as_str() != "provenance")
            .map(|(name, v)| MetricRow {
                metric: name.clone(),
                estimate: v.get("estimate").and_then(Value::as_f64),
                lower: v.get("lower").and_then(Value::as_f64),
                upper: v.get("upper").and_then(Value::as_f64),
            })
            .collect(),
    )
}

pub fn emit_report(doc: &ReportDocument, format: Format) -> Result<Vec<u8>> {
    doc.check_provenance()?;
    match format {
        Format::Json => {
            let mut out = serde_json::to_vec_pretty(doc).map_err(|e| Error::Serialization(e.to_string()))?;
            out.push(b'\n');
            Ok(out)
        }
        Format::Csv => {
            let rows = metric_rows(doc)
                .ok_or_else(|| Error::UnsupportedFormat("csv output needs a metrics section".into()))?;
            let ser = |e: csv::Error| Error::Serialization(e.to_string());
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["metric", "estimate", "lower", "upper"]).map_err(ser)?;
            let cell = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
            for r in rows {
                w.write_record([r.metric.clone(), cell(r.estimate), cell(r.lower), cell(r.upper)])
                    .map_err(ser)?;
            }
            w.into_inner().map_err(|e| Error::Serialization(e.to_string()))
        }
    }
}

pub fn parse_report(bytes: &[u8]) -> Result<ReportDocument> {
    serde_json::from_slice(bytes).map_err(|e| Error::Serialization(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::ALGORITHM_CONTINGENCY;
    use crate::metrics::bootstrap_metrics;

    fn doc() -> ReportDocument {
        let spec = BootstrapSpec::new(200, 7);
        let intervals = bootstrap_metrics(&ALGORITHM_CONTINGENCY.expand(), &spec).unwrap();
        let mut d = ReportDocument::new(vec!["validate".into(), "--seed".into(), "7".into()]);
        d.add_input("predictions", "p.csv", "00".repeat(32));
        d.stochastic_section("metrics", metrics_section(&intervals, &spec), 7, 200)
            .unwrap();
        d.section("counts", serde_json::json!({"tp": 125})).unwrap();
        d
    }

    #[test]
    fn json_roundtrip_and_stability() {
        let d = doc();
        let bytes = emit_report(&d, Format::Json).unwrap();
        assert_eq!(parse_report(&bytes).unwrap(), d);
        assert_eq!(emit_report(&doc(), Format::Json).unwrap(), bytes);
        let text = String::from_utf8(bytes).unwrap();
        let keys: Vec<usize> = ["tool_version", "command", "seed", "inputs", "results"]
            .iter()
            .map(|k| text.find(&format!("\"{k}\"")).unwrap())
            .collect();
        assert!(keys.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn csv_metric_table() {
        let bytes = emit_report(&doc(), Format::Csv).unwrap();
        let text = String::from_utf8(bytes).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("metric,estimate,lower,upper"));
        let names: Vec<&str> = lines.map(|l| l.split(',').next().unwrap()).collect();
        assert_eq!(
            names,
            [
                "sensitivity",
                "specificity",
                "ppv",
                "npv",
                "f1",
                "balanced_accuracy",
                "mcc",
                "jaccard"
            ]
        );
    }

    #[test]
    fn csv_needs_metrics() {
        let d = ReportDocument::new(vec![]);
        assert!(matches!(emit_report(&d, Format::Csv), Err(Error::UnsupportedFormat(_))));
        assert!("xml".parse::<Format>().is_err());
    }

    #[test]
    fn stochastic_sections_record_seed() {
        let d = doc();
        assert_eq!(d.seed, Some(7));
        let prov = &d.results["metrics"]["provenance"];
        assert_eq!(prov["seed"], 7);
        assert_eq!(prov["replicates"], 200);
        assert!(d.results["counts"].get("provenance").is_none());
    }
}
