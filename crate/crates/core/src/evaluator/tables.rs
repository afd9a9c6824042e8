use std::collections::BTreeMap;
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::capabilities::CapabilityMatrix;
use super::fp::FpResult;
use super::scoring::FnResult;
use crate::pool::BugType;

/// Everything the report tables are rendered from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Evaluation {
    pub capabilities: CapabilityMatrix,
    pub false_negatives: Vec<FnResult>,
    pub false_positives: Vec<FpResult>,
    /// Findings per tool that carry no bug type, outside injected spans.
    pub miscellaneous: BTreeMap<String, usize>,
    /// Tools whose report could not be read.
    #[serde(default)]
    pub failed_tools: Vec<String>,
}

pub fn row_label(t: BugType) -> &'static str {
    match t {
        BugType::Reentrancy => "Re-entrancy",
        BugType::TimestampDependency => "Timestamp dep",
        BugType::UncheckedSend => "Unchecked send",
        BugType::UnhandledException => "Unhandled exp",
        BugType::TOD => "TOD",
        BugType::IntegerOverflowUnderflow => "Integer overflow",
        BugType::TxOrigin => "tx.origin",
    }
}

fn md_row(cells: &[String]) -> String {
    format!("| {} |\n", cells.join(" | "))
}

impl Evaluation {
    fn fn_for(&self, tool: &str, t: BugType) -> Option<&FnResult> {
        self.false_negatives
            .iter()
            .find(|r| r.tool == tool && r.bug_type == t)
    }

    fn fp_for(&self, tool: &str, t: BugType) -> Option<&FpResult> {
        self.false_positives
            .iter()
            .find(|r| r.tool == tool && r.bug_type == t)
    }

    /// Cell for one tool and bug type in the false-negative table.
    pub fn fn_cell(&self, tool: &str, t: BugType) -> String {
        let capable = self.capabilities.tool(tool).is_some_and(|c| c.detects(t));
        match (capable, self.fn_for(tool, t)) {
            (false, _) => "NA".to_string(),
            (true, Some(r)) => r.cell(),
            (true, None) => "-".to_string(),
        }
    }

    fn injected(&self, t: BugType) -> Option<usize> {
        self.false_negatives
            .iter()
            .filter(|r| r.bug_type == t)
            .map(|r| r.injected)
            .max()
    }

    pub fn fn_table(&self) -> String {
        let tools = self.capabilities.tool_names();
        let mut head = vec!["Bug type".to_string(), "Injected".to_string()];
        head.extend(tools.iter().cloned());
        let mut out = md_row(&head);
        out.push_str(&md_row(&vec!["---".to_string(); head.len()]));
        for t in BugType::ALL {
            let Some(injected) = self.injected(t) else {
                continue;
            };
            let mut row = vec![row_label(t).to_string(), injected.to_string()];
            row.extend(tools.iter().map(|tool| self.fn_cell(tool, t)));
            out.push_str(&md_row(&row));
        }
        out
    }

    /// Reported, FIL and FP cells; empty where the tool is out of scope.
    pub fn fp_cells(&self, tool: &str, t: BugType) -> [String; 3] {
        let capable = self.capabilities.tool(tool).is_some_and(|c| c.detects(t));
        match (capable, self.fp_for(tool, t)) {
            (false, _) => Default::default(),
            (true, None) => ["0".into(), "0".into(), "-".into()],
            (true, Some(r)) => {
                let fp = match r.estimated_fp {
                    _ if r.filtered == 0 => "-".to_string(),
                    Some(n) => n.to_string(),
                    None => "?".to_string(),
                };
                [r.reported.to_string(), r.filtered.to_string(), fp]
            }
        }
    }

    pub fn fp_table(&self) -> String {
        let tools = self.capabilities.tool_names();
        let mut head = vec!["Bug type".to_string(), "Threshold".to_string()];
        for tool in &tools {
            head.extend(["Reported", "FIL", "FP"].map(|c| format!("{tool} {c}")));
        }
        let mut out = md_row(&head);
        out.push_str(&md_row(&vec!["---".to_string(); head.len()]));
        for t in BugType::ALL {
            let threshold = self
                .capabilities
                .thresholds
                .get(&t)
                .map_or(String::new(), usize::to_string);
            let mut row = vec![row_label(t).to_string(), threshold];
            for tool in &tools {
                row.extend(self.fp_cells(tool, t));
            }
            out.push_str(&md_row(&row));
        }
        let mut row = vec!["Miscellaneous".to_string(), String::new()];
        for tool in &tools {
            let n = self.miscellaneous.get(tool).copied().unwrap_or(0);
            row.extend([n.to_string(), String::new(), String::new()]);
        }
        out.push_str(&md_row(&row));
        out
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::from("# Analyzer evaluation\n\n## False negatives\n\n");
        out.push_str(
            "Cells read `missed (unreported)`; NA marks a type outside the tool's scope.\n\n",
        );
        out.push_str(&self.fn_table());
        out.push_str("\n## False positives\n\n");
        out.push_str(&self.fp_table());
        if !self.failed_tools.is_empty() {
            let _ = write!(
                out,
                "\nPartial results: no usable report for {}.\n",
                self.failed_tools.join(", ")
            );
        }
        out
    }

    pub fn fn_csv(&self) -> Result<Vec<u8>, csv::Error> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "tool",
            "bugType",
            "injected",
            "correctlyDetected",
            "misidentifiedType",
            "unreported",
            "cell",
        ])?;
        for r in &self.false_negatives {
            w.write_record([
                r.tool.clone(),
                r.bug_type.to_string(),
                r.injected.to_string(),
                r.correctly_detected.to_string(),
                r.misidentified_type.to_string(),
                r.unreported.to_string(),
                r.cell(),
            ])?;
        }
        w.into_inner().map_err(|e| e.into_error().into())
    }

    pub fn fp_csv(&self) -> Result<Vec<u8>, csv::Error> {
        let opt = |v: Option<usize>| v.map_or(String::new(), |n| n.to_string());
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "tool",
            "bugType",
            "threshold",
            "reported",
            "excludedByMajority",
            "filtered",
            "sampled",
            "confirmedInSample",
            "estimatedFP",
        ])?;
        for r in &self.false_positives {
            w.write_record([
                r.tool.clone(),
                r.bug_type.to_string(),
                opt(self.capabilities.thresholds.get(&r.bug_type).copied()),
                r.reported.to_string(),
                r.excluded_by_majority.to_string(),
                r.filtered.to_string(),
                r.sampled.to_string(),
                opt(r.confirmed_in_sample),
                opt(r.estimated_fp),
            ])?;
        }
        w.into_inner().map_err(|e| e.into_error().into())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluator::default_capabilities;

    fn fn_result(tool: &str, t: BugType, injected: usize, mis: usize, unrep: usize) -> FnResult {
        FnResult {
            tool: tool.into(),
            bug_type: t,
            injected,
            correctly_detected: injected - mis - unrep,
            misidentified_type: mis,
            unreported: unrep,
        }
    }

    fn evaluation(fns: Vec<FnResult>, fps: Vec<FpResult>) -> Evaluation {
        Evaluation {
            capabilities: default_capabilities(),
            false_negatives: fns,
            false_positives: fps,
            miscellaneous: BTreeMap::from([("Slither".to_string(), 1807)]),
            failed_tools: vec![],
        }
    }

    #[test]
    fn fn_cells() {
        let e = evaluation(
            vec![
                fn_result("SmartCheck", BugType::Reentrancy, 1343, 1237, 106),
                fn_result("Mythril", BugType::Reentrancy, 1343, 280, 805),
                fn_result("Slither", BugType::Reentrancy, 1343, 0, 0),
            ],
            vec![],
        );
        assert_eq!(e.fn_cell("SmartCheck", BugType::Reentrancy), "1343 (106)");
        assert_eq!(e.fn_cell("Mythril", BugType::Reentrancy), "1085 (805)");
        assert_eq!(e.fn_cell("Slither", BugType::Reentrancy), "✓");
        assert_eq!(e.fn_cell("Mythril", BugType::TOD), "NA");
        let table = e.fn_table();
        assert!(
            table.contains("| Re-entrancy | 1343 | - | - | 1085 (805) | 1343 (106) | - | ✓ |"),
            "{table}"
        );
        assert!(!table.contains("Timestamp dep"));
    }

    #[test]
    fn fp_cells() {
        let e = evaluation(
            vec![],
            vec![
                FpResult::new("Oyente", BugType::TOD, 32, 8, 20, Some(20)).unwrap(),
                FpResult::new("Oyente", BugType::Reentrancy, 0, 0, 0, Some(0)).unwrap(),
                FpResult::new("Mythril", BugType::UncheckedSend, 14, 11, 3, None).unwrap(),
            ],
        );
        assert_eq!(
            e.fp_cells("Oyente", BugType::TOD),
            ["32", "24", "24"].map(String::from)
        );
        assert_eq!(
            e.fp_cells("Oyente", BugType::Reentrancy),
            ["0", "0", "-"].map(String::from)
        );
        assert_eq!(
            e.fp_cells("Mythril", BugType::UncheckedSend),
            ["14", "3", "?"].map(String::from)
        );
        assert_eq!(
            e.fp_cells("Oyente", BugType::TxOrigin),
            <[String; 3]>::default()
        );
        let md = e.to_markdown();
        assert!(md.contains("| Miscellaneous |"));
        assert!(md.contains("1807"));
        let csv = String::from_utf8(e.fp_csv().unwrap()).unwrap();
        assert!(csv.contains("Oyente,TOD,2,32,8,24,20,20,24"));
    }
}
