//! Versioned JSON analysis reports.
//!
//! Reports carry no timestamps and timings are opt-in, so equal inputs and
//! seeds give byte-identical output.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::completeness::{ResolventProfile, VerdictReport};

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Hex SHA-256 over length-prefixed parts, so part boundaries matter.
pub fn fingerprint<I, B>(parts: I) -> String
where
    I: IntoIterator<Item = B>,
    B: AsRef<[u8]>,
{
    let mut h = Sha256::new();
    for p in parts {
        let p = p.as_ref();
        h.update((p.len() as u64).to_le_bytes());
        h.update(p);
    }
    hex::encode(h.finalize())
}

#[derive(Clone, Debug, Serialize)]
pub struct AnalysisReport {
    pub schema: u32,
    pub tool: String,
    pub version: String,
    pub command: String,
    pub input_fingerprint: String,
    pub blocks: BTreeMap<String, Value>,
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings_ms: Option<BTreeMap<String, f64>>,
}

impl AnalysisReport {
    pub fn new(command: impl Into<String>, input_fingerprint: String) -> Self {
        AnalysisReport {
            schema: SCHEMA_VERSION,
            tool: "sclab".into(),
            version: TOOL_VERSION.into(),
            command: command.into(),
            input_fingerprint,
            blocks: BTreeMap::new(),
            warnings: vec![],
            timings_ms: None,
        }
    }

    pub fn insert(&mut self, name: &str, block: impl Serialize) {
        let value = serde_json::to_value(block).unwrap_or_else(|e| json!({ "serialization_error": e.to_string() }));
        self.blocks.insert(name.to_string(), value);
    }

    pub fn warn(&mut self, message: impl Into<String>) {
        self.warnings.push(message.into());
    }

    pub fn record_timing(&mut self, name: &str, millis: f64) {
        self.timings_ms
            .get_or_insert_with(BTreeMap::new)
            .insert(name.to_string(), millis);
    }

    pub fn has_warnings(&self) -> bool {
        !self.warnings.is_empty()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report values are always serializable");
        s.push('\n');
        s
    }
}

/// Resolvent block with the fixed keys `lambda`, `radii`, `deficiency`,
/// `verdict`, `seed`, `residuals`.
pub fn resolvent_block(profile: &ResolventProfile, verdict: &VerdictReport, seed: u64) -> Value {
    json!({
        "lambda": profile.lambda,
        "radii": profile.radii,
        "deficiency": profile.deficiency,
        "verdict": verdict.verdict,
        "seed": seed,
        "residuals": profile.residuals,
        "center": profile.center,
        "window_sizes": profile.window_sizes,
        "iterations": profile.iterations,
        "extrapolated_deficiency": verdict.extrapolated,
        "last_change": verdict.last_change,
        "threshold": verdict.threshold,
        "stability_tolerance": verdict.stability_tolerance,
        "monotone": verdict.monotone,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fingerprint_separates_parts() {
        assert_ne!(fingerprint(["ab", "c"]), fingerprint(["a", "bc"]));
        assert_eq!(fingerprint(["x"]).len(), 64);
        assert_eq!(fingerprint(["x"]), fingerprint([b"x".to_vec()]));
    }

    #[test]
    fn report_json_is_stable() {
        let mut r = AnalysisReport::new("volume", fingerprint(["g"]));
        r.insert("b", json!({"z": 1, "a": 2}));
        r.insert("a", 3);
        let s = r.to_json();
        assert_eq!(s, r.clone().to_json());
        assert!(s.find("\"a\": 3").unwrap() < s.find("\"b\"").unwrap());
        assert!(!s.contains("timings_ms"));
        r.record_timing("total", 1.5);
        assert!(r.to_json().contains("timings_ms"));
        let v: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["schema"], 1);
    }
}
