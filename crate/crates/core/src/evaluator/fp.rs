use std::collections::{BTreeMap, BTreeSet};

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::report::{Finding, ReportedType};
use crate::injector::BugLogEntry;
use crate::pool::BugType;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("no majority threshold for {0}")]
pub struct MissingThreshold(pub BugType);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("need confirmed <= sampled <= filtered, got {confirmed} / {sampled} / {filtered}")]
pub struct DomainError {
    pub filtered: usize,
    pub sampled: usize,
    pub confirmed: usize,
}

/// One tool's findings after the majority filter.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MajorityOutcome {
    /// Findings outside every injected span, typed with one of the bug types.
    pub candidates: Vec<Finding>,
    /// Candidates that enough tools agree on.
    pub excluded: Vec<Finding>,
    /// Candidates left for inspection.
    pub filtered: Vec<Finding>,
    /// Findings outside every injected span with no bug type.
    pub miscellaneous: Vec<Finding>,
}

fn injected_line(log: &[BugLogEntry], f: &Finding) -> bool {
    log.iter()
        .any(|e| e.file == f.file && e.contains_line(f.line))
}

/// Splits each tool's findings into excluded and filtered. A candidate is
/// excluded when at least `thresholds[type]` tools, itself included, report
/// the same type in the same file within `line_slack` lines.
pub fn filter_by_majority(
    findings_by_tool: &BTreeMap<String, Vec<Finding>>,
    log: &[BugLogEntry],
    thresholds: &BTreeMap<BugType, usize>,
    line_slack: usize,
) -> Result<BTreeMap<String, MajorityOutcome>, MissingThreshold> {
    let mut out: BTreeMap<String, MajorityOutcome> = BTreeMap::new();
    // (file, type) -> (line, tool) for every candidate.
    let mut index: BTreeMap<(&str, BugType), BTreeSet<(usize, &str)>> = BTreeMap::new();
    for (tool, findings) in findings_by_tool {
        let o = out.entry(tool.clone()).or_default();
        for f in findings.iter().filter(|f| !injected_line(log, f)) {
            match f.reported_type {
                ReportedType::Bug(t) => {
                    if !thresholds.contains_key(&t) {
                        return Err(MissingThreshold(t));
                    }
                    o.candidates.push(f.clone());
                    index
                        .entry((f.file.as_str(), t))
                        .or_default()
                        .insert((f.line, tool.as_str()));
                }
                ReportedType::Miscellaneous => o.miscellaneous.push(f.clone()),
            }
        }
    }
    for o in out.values_mut() {
        for f in &o.candidates {
            let t = f.reported_type.bug().expect("candidates carry a bug type");
            let lo = f.line.saturating_sub(line_slack);
            let tools: BTreeSet<&str> = index[&(f.file.as_str(), t)]
                .range((lo, "")..)
                .take_while(|(l, _)| *l <= f.line + line_slack)
                .map(|(_, tool)| *tool)
                .collect();
            if tools.len() >= thresholds[&t] {
                o.excluded.push(f.clone());
            } else {
                o.filtered.push(f.clone());
            }
        }
    }
    Ok(out)
}

/// `filtered * confirmed / sampled`, rounded half away from zero.
pub fn estimate_false_positives(
    filtered: usize,
    sampled: usize,
    confirmed: usize,
) -> Result<usize, DomainError> {
    if confirmed > sampled || sampled > filtered {
        return Err(DomainError {
            filtered,
            sampled,
            confirmed,
        });
    }
    if sampled == 0 {
        return Ok(0);
    }
    Ok((2 * filtered * confirmed + sampled) / (2 * sampled))
}

/// Uniform sample without replacement, kept in input order. Inputs no
/// larger than `size` come back whole.
pub fn sample_for_inspection<T: Clone>(items: &[T], size: usize, seed: u64) -> Vec<T> {
    if items.len() <= size {
        return items.to_vec();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = index::sample(&mut rng, items.len(), size).into_vec();
    picked.sort_unstable();
    picked.into_iter().map(|i| items[i].clone()).collect()
}

/// False-positive tally for one tool and bug type. Counts that depend on
/// manual inspection stay empty until `confirmed` is known.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FpResult {
    pub tool: String,
    pub bug_type: BugType,
    pub reported: usize,
    pub excluded_by_majority: usize,
    pub filtered: usize,
    pub sampled: usize,
    pub confirmed_in_sample: Option<usize>,
    pub estimated_fp: Option<usize>,
}

impl FpResult {
    pub fn new(
        tool: &str,
        bug_type: BugType,
        reported: usize,
        excluded: usize,
        sampled: usize,
        confirmed: Option<usize>,
    ) -> Result<Self, DomainError> {
        let filtered = reported.checked_sub(excluded).ok_or(DomainError {
            filtered: 0,
            sampled,
            confirmed: confirmed.unwrap_or(0),
        })?;
        let estimated_fp = confirmed
            .map(|c| estimate_false_positives(filtered, sampled, c))
            .transpose()?;
        if confirmed.is_none() && sampled > filtered {
            return Err(DomainError {
                filtered,
                sampled,
                confirmed: 0,
            });
        }
        Ok(FpResult {
            tool: tool.to_string(),
            bug_type,
            reported,
            excluded_by_majority: excluded,
            filtered,
            sampled,
            confirmed_in_sample: confirmed,
            estimated_fp,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::injector::Approach;
    use proptest::prelude::*;

    fn f(tool: &str, line: usize, t: BugType) -> Finding {
        Finding {
            tool: tool.into(),
            file: "a.sol".into(),
            line,
            reported_type: ReportedType::Bug(t),
            message: None,
        }
    }

    fn thresholds() -> BTreeMap<BugType, usize> {
        crate::evaluator::default_capabilities().thresholds
    }

    #[test]
    fn worked_example() {
        assert_eq!(estimate_false_positives(40, 20, 16), Ok(32));
        let r = FpResult::new("T", BugType::TOD, 100, 60, 20, Some(16)).unwrap();
        assert_eq!((r.filtered, r.estimated_fp), (40, Some(32)));
    }

    #[test]
    fn estimate_edges() {
        assert_eq!(estimate_false_positives(40, 20, 0), Ok(0));
        assert_eq!(estimate_false_positives(7, 7, 7), Ok(7));
        assert_eq!(estimate_false_positives(0, 0, 0), Ok(0));
        assert_eq!(estimate_false_positives(3, 2, 1), Ok(2));
        assert!(estimate_false_positives(5, 6, 1).is_err());
        assert!(estimate_false_positives(5, 2, 3).is_err());
    }

    #[test]
    fn lone_finding_stays_filtered() {
        let by_tool = BTreeMap::from([("A".to_string(), vec![f("A", 9, BugType::TOD)])]);
        let out = filter_by_majority(&by_tool, &[], &thresholds(), 0).unwrap();
        assert_eq!(out["A"].filtered.len(), 1);
    }

    #[test]
    fn threshold_boundary() {
        for t in BugType::ALL {
            let need = thresholds()[&t];
            for agreeing in [need - 1, need] {
                let by_tool: BTreeMap<_, _> = (0..agreeing.max(1))
                    .map(|i| (format!("tool{i}"), vec![f(&format!("tool{i}"), 12, t)]))
                    .collect();
                let out = filter_by_majority(&by_tool, &[], &thresholds(), 0).unwrap();
                let excluded = out["tool0"].excluded.len();
                assert_eq!(
                    excluded == 1,
                    agreeing >= need && agreeing > 0,
                    "{t} with {agreeing}"
                );
            }
        }
    }

    #[test]
    fn injected_lines_and_misc_are_not_candidates() {
        let log = vec![BugLogEntry {
            bug_id: "bug_tod1".into(),
            bug_type: BugType::TOD,
            approach: Approach::FullSnippet,
            snippet_id: None,
            file: "a.sol".into(),
            start_line: 10,
            end_line: 14,
            byte_start: 0,
            byte_end: 0,
        }];
        let mut misc = f("A", 3, BugType::TOD);
        misc.reported_type = ReportedType::Miscellaneous;
        let by_tool = BTreeMap::from([(
            "A".to_string(),
            vec![f("A", 12, BugType::TOD), f("A", 15, BugType::TOD), misc],
        )]);
        let out = filter_by_majority(&by_tool, &log, &thresholds(), 0).unwrap();
        assert_eq!(out["A"].candidates.len(), 1);
        assert_eq!(out["A"].miscellaneous.len(), 1);
    }

    #[test]
    fn missing_threshold() {
        let by_tool = BTreeMap::from([("A".to_string(), vec![f("A", 1, BugType::TOD)])]);
        let mut th = thresholds();
        th.remove(&BugType::TOD);
        assert_eq!(
            filter_by_majority(&by_tool, &[], &th, 0),
            Err(MissingThreshold(BugType::TOD))
        );
    }

    #[test]
    fn sampling() {
        let items: Vec<usize> = (0..40).collect();
        let s = sample_for_inspection(&items, 20, 9);
        assert_eq!(s.len(), 20);
        assert_eq!(s.iter().collect::<BTreeSet<_>>().len(), 20);
        assert_eq!(s, sample_for_inspection(&items, 20, 9));
        assert_eq!(
            sample_for_inspection(&items[..5], 20, 9),
            items[..5].to_vec()
        );
    }

    proptest! {
        #[test]
        fn raising_threshold_never_shrinks_filtered(
            reports in proptest::collection::vec((0usize..5, 1usize..8, 0usize..7), 0..60),
            bump in 0usize..7,
            slack in 0usize..2,
        ) {
            let mut by_tool: BTreeMap<String, Vec<Finding>> = BTreeMap::new();
            for (tool, line, t) in reports {
                let name = format!("t{tool}");
                by_tool.entry(name.clone()).or_default().push(f(&name, line, BugType::ALL[t]));
            }
            let low = thresholds();
            let mut high = low.clone();
            *high.get_mut(&BugType::ALL[bump]).unwrap() += 1;
            let a = filter_by_majority(&by_tool, &[], &low, slack).unwrap();
            let b = filter_by_majority(&by_tool, &[], &high, slack).unwrap();
            for tool in a.keys() {
                prop_assert!(b[tool].filtered.len() >= a[tool].filtered.len());
                prop_assert_eq!(
                    a[tool].filtered.len() + a[tool].excluded.len(),
                    a[tool].candidates.len()
                );
            }
        }

        #[test]
        fn estimate_matches_float_rounding(f in 0usize..2000, s in 0usize..50, c in 0usize..50) {
            prop_assume!(c <= s && s <= f);
            let got = estimate_false_positives(f, s, c).unwrap();
            let want = if s == 0 { 0.0 } else { (f as f64 * c as f64 / s as f64).round() };
            prop_assert_eq!(got as f64, want);
        }
    }
}
