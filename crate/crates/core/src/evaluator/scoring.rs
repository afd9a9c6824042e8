use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::report::{Finding, ReportedType};
use crate::injector::BugLogEntry;
use crate::pool::BugType;

/// How far outside an entry's line range a finding may fall and still match.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MatchPolicy {
    pub line_slack: usize,
}

impl MatchPolicy {
    pub fn matches(&self, entry: &BugLogEntry, finding: &Finding) -> bool {
        entry.file == finding.file
            && finding.line + self.line_slack >= entry.start_line
            && finding.line <= entry.end_line + self.line_slack
    }
}

/// False-negative tally for one tool and bug type.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FnResult {
    pub tool: String,
    pub bug_type: BugType,
    pub injected: usize,
    pub correctly_detected: usize,
    pub misidentified_type: usize,
    pub unreported: usize,
}

impl FnResult {
    /// Bugs not correctly detected: wrong type or not reported at all.
    pub fn missed(&self) -> usize {
        self.misidentified_type + self.unreported
    }

    /// `✓` when nothing was missed, otherwise `missed (unreported)`.
    pub fn cell(&self) -> String {
        if self.missed() == 0 {
            "✓".to_string()
        } else {
            format!("{} ({})", self.missed(), self.unreported)
        }
    }
}

/// Index of the best unmatched entry for `finding`: earliest end line,
/// then narrowest range, then earliest start, then log order.
fn best_entry(
    entries: &[&BugLogEntry],
    taken: &[bool],
    finding: &Finding,
    policy: MatchPolicy,
    want: Option<BugType>,
) -> Option<usize> {
    (0..entries.len())
        .filter(|&i| !taken[i] && policy.matches(entries[i], finding))
        .filter(|&i| want.is_none_or(|t| entries[i].bug_type == t))
        .min_by_key(|&i| {
            let e = entries[i];
            (e.end_line, e.end_line - e.start_line, e.start_line, i)
        })
}

/// Matches each log entry to at most one finding of `tool` and partitions
/// the entries into correctly detected, misidentified and unreported.
///
/// Findings are visited in line order twice: first only those whose type
/// matches an entry, then the rest, which can only yield a misidentified
/// type.
pub fn score_false_negatives(
    tool: &str,
    log: &[BugLogEntry],
    findings: &[Finding],
    policy: MatchPolicy,
) -> Vec<FnResult> {
    let mut by_file: BTreeMap<&str, (Vec<&BugLogEntry>, Vec<&Finding>)> = BTreeMap::new();
    for e in log {
        by_file.entry(&e.file).or_default().0.push(e);
    }
    for f in findings.iter().filter(|f| f.tool == tool) {
        if let Some(slot) = by_file.get_mut(f.file.as_str()) {
            slot.1.push(f);
        }
    }

    let mut tally: BTreeMap<BugType, [usize; 3]> = BTreeMap::new();
    for (entries, mut found) in by_file.into_values() {
        found.sort_by_key(|f| f.line);
        let mut taken = vec![false; entries.len()];
        let mut correct = vec![false; entries.len()];
        let mut used = vec![false; found.len()];
        for (fi, f) in found.iter().enumerate() {
            let ReportedType::Bug(t) = f.reported_type else {
                continue;
            };
            if let Some(i) = best_entry(&entries, &taken, f, policy, Some(t)) {
                taken[i] = true;
                correct[i] = true;
                used[fi] = true;
            }
        }
        for (fi, f) in found.iter().enumerate() {
            if used[fi] {
                continue;
            }
            if let Some(i) = best_entry(&entries, &taken, f, policy, None) {
                taken[i] = true;
            }
        }
        for (i, e) in entries.iter().enumerate() {
            let slot = tally.entry(e.bug_type).or_default();
            match (taken[i], correct[i]) {
                (true, true) => slot[0] += 1,
                (true, false) => slot[1] += 1,
                _ => slot[2] += 1,
            }
        }
    }
    tally
        .into_iter()
        .map(|(bug_type, [c, m, u])| FnResult {
            tool: tool.to_string(),
            bug_type,
            injected: c + m + u,
            correctly_detected: c,
            misidentified_type: m,
            unreported: u,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::injector::Approach;

    fn entry(file: &str, t: BugType, start: usize, end: usize) -> BugLogEntry {
        BugLogEntry {
            bug_id: format!("{}{start}", t.id_prefix()),
            bug_type: t,
            approach: Approach::FullSnippet,
            snippet_id: None,
            file: file.into(),
            start_line: start,
            end_line: end,
            byte_start: 0,
            byte_end: 0,
        }
    }

    fn finding(tool: &str, file: &str, line: usize, t: ReportedType) -> Finding {
        Finding {
            tool: tool.into(),
            file: file.into(),
            line,
            reported_type: t,
            message: None,
        }
    }

    #[test]
    fn perfect_tool() {
        let log: Vec<_> = (0..10)
            .map(|i| entry("a.sol", BugType::TOD, 10 * i + 1, 10 * i + 4))
            .collect();
        let found: Vec<_> = log
            .iter()
            .map(|e| {
                finding(
                    "T",
                    "a.sol",
                    e.start_line + 1,
                    ReportedType::Bug(BugType::TOD),
                )
            })
            .collect();
        let r = score_false_negatives("T", &log, &found, MatchPolicy::default());
        assert_eq!(r.len(), 1);
        assert_eq!(
            (
                r[0].correctly_detected,
                r[0].misidentified_type,
                r[0].unreported
            ),
            (10, 0, 0)
        );
        assert_eq!(r[0].cell(), "✓");
    }

    #[test]
    fn wrong_type_at_line_is_misidentified() {
        let log = vec![entry("a.sol", BugType::Reentrancy, 185, 188)];
        let found = vec![finding(
            "Mythril",
            "a.sol",
            186,
            ReportedType::Bug(BugType::UnhandledException),
        )];
        let r = score_false_negatives("Mythril", &log, &found, MatchPolicy::default());
        assert_eq!(
            (
                r[0].correctly_detected,
                r[0].misidentified_type,
                r[0].unreported
            ),
            (0, 1, 0)
        );
    }

    #[test]
    fn one_finding_serves_one_entry() {
        let log = vec![
            entry("a.sol", BugType::TOD, 5, 5),
            entry("a.sol", BugType::TOD, 5, 5),
        ];
        let found = vec![finding("T", "a.sol", 5, ReportedType::Bug(BugType::TOD))];
        let r = score_false_negatives("T", &log, &found, MatchPolicy::default());
        assert_eq!((r[0].correctly_detected, r[0].unreported), (1, 1));
    }

    #[test]
    fn slack_file_and_tool_boundaries() {
        let log = vec![entry("a.sol", BugType::TOD, 5, 6)];
        let near = vec![finding("T", "a.sol", 8, ReportedType::Bug(BugType::TOD))];
        assert_eq!(
            score_false_negatives("T", &log, &near, MatchPolicy::default())[0].unreported,
            1
        );
        let slack = MatchPolicy { line_slack: 2 };
        assert_eq!(
            score_false_negatives("T", &log, &near, slack)[0].correctly_detected,
            1
        );
        let other_file = vec![finding("T", "b.sol", 5, ReportedType::Bug(BugType::TOD))];
        assert_eq!(
            score_false_negatives("T", &log, &other_file, slack)[0].unreported,
            1
        );
        assert_eq!(
            score_false_negatives("U", &log, &near, slack)[0].unreported,
            1
        );
    }

    #[test]
    fn table_cell_format() {
        let r = FnResult {
            tool: "SmartCheck".into(),
            bug_type: BugType::Reentrancy,
            injected: 1343,
            correctly_detected: 0,
            misidentified_type: 1237,
            unreported: 106,
        };
        assert_eq!(r.cell(), "1343 (106)");
    }
}
