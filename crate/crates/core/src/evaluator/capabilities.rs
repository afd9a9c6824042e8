use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::injector::BugLogEntry;
use crate::locator::InjectionProfile;
use crate::pool::BugType;

const DEFAULT_CAPABILITIES: &str = include_str!("../../data/capabilities.json");

/// Bug types one analyzer is designed to detect.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToolCapabilities {
    pub tool: String,
    pub detects: BTreeSet<BugType>,
}

impl ToolCapabilities {
    pub fn detects(&self, bug_type: BugType) -> bool {
        self.detects.contains(&bug_type)
    }
}

/// Per-tool capabilities plus the per-type majority thresholds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapabilityMatrix {
    pub tools: Vec<ToolCapabilities>,
    #[serde(default)]
    pub thresholds: BTreeMap<BugType, usize>,
}

impl CapabilityMatrix {
    pub fn tool(&self, name: &str) -> Option<&ToolCapabilities> {
        self.tools
            .iter()
            .find(|t| t.tool.eq_ignore_ascii_case(name))
    }

    pub fn tool_names(&self) -> Vec<String> {
        self.tools.iter().map(|t| t.tool.clone()).collect()
    }
}

#[derive(Debug, Error)]
pub enum CapabilityError {
    #[error("invalid capabilities file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("tool `{0}` detects no bug type")]
    Empty(String),
    #[error("tool `{0}` is listed twice")]
    Duplicate(String),
    #[error("threshold for {0} must be at least 1")]
    ZeroThreshold(BugType),
}

pub fn load_capabilities(json: &str) -> Result<CapabilityMatrix, CapabilityError> {
    let m: CapabilityMatrix = serde_json::from_str(json)?;
    let mut seen = BTreeSet::new();
    for t in &m.tools {
        if t.detects.is_empty() {
            return Err(CapabilityError::Empty(t.tool.clone()));
        }
        if !seen.insert(t.tool.to_ascii_lowercase()) {
            return Err(CapabilityError::Duplicate(t.tool.clone()));
        }
    }
    if let Some((t, _)) = m.thresholds.iter().find(|(_, v)| **v == 0) {
        return Err(CapabilityError::ZeroThreshold(*t));
    }
    Ok(m)
}

/// The six-analyzer matrix shipped with the crate.
pub fn default_capabilities() -> CapabilityMatrix {
    load_capabilities(DEFAULT_CAPABILITIES).expect("bundled capabilities are valid")
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("tool `{0}` has an empty capability set")]
pub struct ScopeError(pub String);

/// Anything tagged with a single bug type.
pub trait Scoped {
    fn scoped_type(&self) -> BugType;
}

impl Scoped for BugLogEntry {
    fn scoped_type(&self) -> BugType {
        self.bug_type
    }
}

impl Scoped for InjectionProfile {
    fn scoped_type(&self) -> BugType {
        self.bug_type
    }
}

impl Scoped for BugType {
    fn scoped_type(&self) -> BugType {
        *self
    }
}

/// Drops items whose bug type the tool is not designed to detect.
pub fn restrict_to_scope<T: Scoped + Clone>(
    items: &[T],
    caps: &ToolCapabilities,
) -> Result<Vec<T>, ScopeError> {
    if caps.detects.is_empty() {
        return Err(ScopeError(caps.tool.clone()));
    }
    Ok(items
        .iter()
        .filter(|i| caps.detects(i.scoped_type()))
        .cloned()
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_matrix() {
        let m = default_capabilities();
        assert_eq!(m.tools.len(), 6);
        let count = |t: BugType| m.tools.iter().filter(|c| c.detects(t)).count();
        assert_eq!(count(BugType::Reentrancy), 6);
        assert_eq!(count(BugType::TimestampDependency), 4);
        assert_eq!(count(BugType::UncheckedSend), 2);
        assert_eq!(count(BugType::UnhandledException), 5);
        assert_eq!(count(BugType::TOD), 2);
        assert_eq!(count(BugType::IntegerOverflowUnderflow), 4);
        assert_eq!(count(BugType::TxOrigin), 3);
        assert!(!m
            .tool("securify")
            .unwrap()
            .detects(BugType::TimestampDependency));
        assert_eq!(m.thresholds[&BugType::Reentrancy], 4);
        assert_eq!(m.thresholds[&BugType::TxOrigin], 2);
    }

    #[test]
    fn scope_restriction() {
        let m = default_capabilities();
        let all = BugType::ALL.to_vec();
        let securify = restrict_to_scope(&all, m.tool("Securify").unwrap()).unwrap();
        assert!(!securify.contains(&BugType::TimestampDependency));
        assert_eq!(securify.len(), 4);
        let full = ToolCapabilities {
            tool: "all".into(),
            detects: all.iter().copied().collect(),
        };
        assert_eq!(restrict_to_scope(&all, &full).unwrap(), all);
        let empty = ToolCapabilities {
            tool: "none".into(),
            detects: BTreeSet::new(),
        };
        assert_eq!(
            restrict_to_scope(&all, &empty),
            Err(ScopeError("none".into()))
        );
    }

    #[test]
    fn rejects_bad_files() {
        assert!(matches!(
            load_capabilities(r#"{"tools":[{"tool":"x","detects":[]}]}"#),
            Err(CapabilityError::Empty(_))
        ));
        assert!(matches!(
            load_capabilities(
                r#"{"tools":[{"tool":"x","detects":["TOD"]},{"tool":"X","detects":["TOD"]}]}"#
            ),
            Err(CapabilityError::Duplicate(_))
        ));
        assert!(load_capabilities(r#"{"tools":[{"tool":"x","detects":["Nope"]}]}"#).is_err());
    }
}
