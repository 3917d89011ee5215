//! Report document emitted by every command.
//!
//! The machine format (`--format machine`) is a single JSON document with a
//! versioned schema. It embeds the run configuration and is byte-identical
//! for identical (inputs, config, seed) regardless of worker count; wall
//! times therefore appear only in the human-readable text output.

use serde::Serialize;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize)]
pub struct ConfigSection {
    pub tolerance: f64,
    pub enumeration_cap: usize,
    pub samples: usize,
    pub seed: u64,
}

#[derive(Serialize)]
pub struct CodeSection {
    pub label: String,
    pub q: usize,
    pub sites: usize,
    pub dimension: usize,
}

#[derive(Serialize)]
pub struct CheckSection {
    pub t1: usize,
    pub t2: usize,
    pub family_size: usize,
    pub max_offdiag: f64,
    pub max_diag_spread: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worst_pair: Option<[usize; 2]>,
}

#[derive(Serialize)]
pub struct SuiteSection {
    pub name: String,
    pub instances: usize,
    pub failures: usize,
    pub worst_deviation: f64,
    pub tolerance: f64,
    pub contractions: usize,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<String>,
}

#[derive(Serialize)]
pub struct RecoverySection {
    pub elements: usize,
    pub samples: usize,
    pub max_deviation: f64,
    pub completeness_violation: f64,
    pub recovery_tolerance: f64,
    pub passed: bool,
}

#[derive(Serialize)]
pub struct MachineReport {
    pub schema_version: u32,
    pub command: &'static str,
    pub config: ConfigSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub code: Option<CodeSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub checks: Option<Vec<CheckSection>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub agreement: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub suites: Option<Vec<SuiteSection>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub recovery: Option<RecoverySection>,
    pub passed: bool,
}

impl MachineReport {
    pub fn new(command: &'static str, config: ConfigSection) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            command,
            config,
            code: None,
            checks: None,
            agreement: None,
            suites: None,
            recovery: None,
            passed: false,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}
