//! Machine-readable run documents for the CLI.
//!
//! One JSON document per run: schema tag, full configuration echo, result
//! payload. Rationals are serialized as `num/den` strings and nothing
//! schedule- or time-dependent is included, so identical configurations
//! produce byte-identical documents.

use serde::Serialize;
use serde_json::Value;

pub const SCHEMA: &str = "linlat.report.v1";

/// Echo of the run parameters that determine the output.
#[derive(Debug, Clone, Default, Serialize)]
pub struct RunConfig {
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dims: Option<(usize, usize)>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub forbidden: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub induced: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub structure: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub enumerate_extremal: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub budget_nodes: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// Assemble the single-document report.
pub fn document(config: &RunConfig, result: Value) -> Value {
    serde_json::json!({
        "schema": SCHEMA,
        "config": config,
        "result": result,
    })
}

/// Stable rendering: pretty JSON plus a trailing newline.
pub fn render(doc: &Value) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("serializable");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rendering_is_stable() {
        let config = RunConfig {
            command: "search".into(),
            n: Some(3),
            q: Some(2),
            forbidden: vec!["V:2".into(), "L:2".into()],
            induced: Some(true),
            seed: Some(1),
            ..Default::default()
        };
        let a = render(&document(&config, serde_json::json!({ "optimum": 7 })));
        let b = render(&document(&config, serde_json::json!({ "optimum": 7 })));
        assert_eq!(a, b);
        assert!(a.ends_with('\n'));
        assert!(a.contains("\"schema\""));
    }

    #[test]
    fn skipped_fields_stay_out() {
        let config = RunConfig { command: "qbinom".into(), ..Default::default() };
        let s = render(&document(&config, serde_json::json!({ "value": "35" })));
        assert!(!s.contains("induced"));
        assert!(!s.contains("budget_nodes"));
    }
}
