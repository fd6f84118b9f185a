use serde::{Deserialize, Serialize};

use crate::config::Params;

/// One failed check. `pair` is set when the failure is about a specific pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub pair: Option<[usize; 2]>,
    pub value: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub build_ms: f64,
    pub verify_ms: f64,
}

/// Verification outcome. Field order is the JSON key order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub structure: String,
    pub params: Params,
    pub seed: u64,
    pub num_orderings: Option<usize>,
    pub edges: Option<usize>,
    pub weight: Option<f64>,
    pub verified_pairs: usize,
    /// Total failures; `violations` lists at most the first 64.
    pub violation_count: usize,
    pub violations: Vec<Violation>,
    pub max_observed_stretch: f64,
    pub stretch_bound: Option<f64>,
    pub weak_sparsity: Option<f64>,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timings: Option<Timings>,
}

pub const MAX_LISTED: usize = 64;

impl Report {
    pub fn new(structure: String, params: Params, seed: u64) -> Self {
        Report {
            structure,
            params,
            seed,
            num_orderings: None,
            edges: None,
            weight: None,
            verified_pairs: 0,
            violation_count: 0,
            violations: Vec::new(),
            max_observed_stretch: 0.0,
            stretch_bound: None,
            weak_sparsity: None,
            pass: true,
            timings: None,
        }
    }

    pub fn flag(&mut self, pair: Option<[usize; 2]>, value: f64, detail: impl Into<String>) {
        self.violation_count += 1;
        if self.violations.len() < MAX_LISTED {
            self.violations.push(Violation {
                pair,
                value,
                detail: detail.into(),
            });
        }
    }

    /// Sets `pass` from the violation list.
    pub fn finish(&mut self) {
        self.pass = self.violations.is_empty();
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

pub const CSV_HEADER: &str = "file,structure,seed,num_orderings,edges,weight,verified_pairs,violation_count,\
max_observed_stretch,stretch_bound,weak_sparsity,pass,build_ms,verify_ms";

fn opt<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

pub fn csv_row(file: &str, r: &Report) -> String {
    let quoted = |s: &str| {
        if s.contains([',', '"']) {
            format!("\"{}\"", s.replace('"', "\"\""))
        } else {
            s.to_string()
        }
    };
    [
        quoted(file),
        quoted(&r.structure),
        r.seed.to_string(),
        opt(r.num_orderings),
        opt(r.edges),
        opt(r.weight),
        r.verified_pairs.to_string(),
        r.violation_count.to_string(),
        r.max_observed_stretch.to_string(),
        opt(r.stretch_bound),
        opt(r.weak_sparsity),
        r.pass.to_string(),
        opt(r.timings.as_ref().map(|t| t.build_ms)),
        opt(r.timings.as_ref().map(|t| t.verify_ms)),
    ]
    .join(",")
}
