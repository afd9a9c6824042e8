use std::fmt;
use std::num::NonZeroUsize;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pool::BugType;

/// Type label carried by a finding. Labels outside the seven bug types
/// collapse to `Miscellaneous`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ReportedType {
    Bug(BugType),
    Miscellaneous,
}

impl ReportedType {
    pub fn bug(self) -> Option<BugType> {
        match self {
            ReportedType::Bug(t) => Some(t),
            ReportedType::Miscellaneous => None,
        }
    }
}

impl From<&str> for ReportedType {
    fn from(s: &str) -> Self {
        BugType::from_str(s).map_or(ReportedType::Miscellaneous, ReportedType::Bug)
    }
}

impl fmt::Display for ReportedType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReportedType::Bug(t) => t.fmt(f),
            ReportedType::Miscellaneous => f.write_str("Miscellaneous"),
        }
    }
}

impl Serialize for ReportedType {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ReportedType {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Ok(ReportedType::from(s.as_str()))
    }
}

/// One analyzer warning in normalized form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finding {
    pub tool: String,
    pub file: String,
    pub line: usize,
    #[serde(rename = "type")]
    pub reported_type: ReportedType,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

#[derive(Deserialize)]
struct RawFinding {
    tool: String,
    file: String,
    line: NonZeroUsize,
    #[serde(rename = "type")]
    reported_type: ReportedType,
    #[serde(default)]
    message: Option<String>,
}

impl From<RawFinding> for Finding {
    fn from(r: RawFinding) -> Self {
        Finding {
            tool: r.tool,
            file: r.file,
            line: r.line.get(),
            reported_type: r.reported_type,
            message: r.message,
        }
    }
}

/// Settings a synthetic tool was generated with.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct OracleSettings {
    pub miss_rate: f64,
    pub mistype_rate: f64,
    pub extra_per_file: usize,
    pub seed: u64,
}

/// Report written by the synthetic oracle: the findings plus the settings
/// that produced them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleReport {
    pub tool: String,
    pub settings: OracleSettings,
    pub findings: Vec<Finding>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Adapter {
    NormalizedJson,
    SyntheticOracle,
}

impl Adapter {
    /// Guesses the adapter from the top-level JSON shape.
    pub fn detect(bytes: &[u8]) -> Adapter {
        match bytes.iter().find(|b| !b.is_ascii_whitespace()) {
            Some(b'{') => Adapter::SyntheticOracle,
            _ => Adapter::NormalizedJson,
        }
    }
}

impl FromStr for Adapter {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "normalized-json" => Ok(Adapter::NormalizedJson),
            "synthetic-oracle" => Ok(Adapter::SyntheticOracle),
            other => Err(format!("unknown report adapter `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("report line {line}: {reason}")]
pub struct FormatError {
    pub line: usize,
    pub reason: String,
}

impl From<serde_json::Error> for FormatError {
    fn from(e: serde_json::Error) -> Self {
        FormatError {
            line: e.line(),
            reason: e.to_string(),
        }
    }
}

pub fn ingest_report(bytes: &[u8], adapter: Adapter) -> Result<Vec<Finding>, FormatError> {
    if bytes.iter().all(u8::is_ascii_whitespace) {
        return Ok(Vec::new());
    }
    match adapter {
        Adapter::NormalizedJson => {
            let raw: Vec<RawFinding> = serde_json::from_slice(bytes)?;
            Ok(raw.into_iter().map(Finding::from).collect())
        }
        Adapter::SyntheticOracle => {
            #[derive(Deserialize)]
            struct Envelope {
                #[allow(dead_code)]
                tool: String,
                #[allow(dead_code)]
                settings: OracleSettings,
                findings: Vec<RawFinding>,
            }
            let env: Envelope = serde_json::from_slice(bytes)?;
            Ok(env.findings.into_iter().map(Finding::from).collect())
        }
    }
}
