//! Synthetic analyzers with known behaviour, used to check the scoring
//! pipeline end to end.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::{index, IndexedRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::capabilities::ToolCapabilities;
use super::report::{Finding, OracleReport, OracleSettings, ReportedType};
use crate::injector::BugLogEntry;
use crate::pool::BugType;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("rates must lie in [0, 1] and sum to at most 1 (miss {miss}, mistype {mistype})")]
    InvalidRates { miss: f64, mistype: f64 },
}

impl OracleSettings {
    pub fn check(&self) -> Result<(), OracleError> {
        let ok = |r: f64| (0.0..=1.0).contains(&r);
        if ok(self.miss_rate) && ok(self.mistype_rate) && self.miss_rate + self.mistype_rate <= 1.0
        {
            Ok(())
        } else {
            Err(OracleError::InvalidRates {
                miss: self.miss_rate,
                mistype: self.mistype_rate,
            })
        }
    }
}

/// One buggy file the oracle reports on.
#[derive(Debug, Clone, Copy)]
pub struct OracleFile<'a> {
    pub file: &'a str,
    pub bug_type: BugType,
    pub line_count: usize,
    pub log: &'a [BugLogEntry],
}

/// What was planted for one bug type.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PlantedCounts {
    pub injected: usize,
    pub correct: usize,
    pub mistyped: usize,
    pub missed: usize,
    /// Spurious findings away from injected lines.
    pub extra: usize,
}

/// Ground truth for one synthetic tool.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PlantedTruth {
    pub tool: String,
    pub settings: OracleSettings,
    pub counts: BTreeMap<BugType, PlantedCounts>,
    /// The spurious findings, all of which are false positives.
    pub false_positives: Vec<Finding>,
}

impl PlantedTruth {
    pub fn is_false_positive(&self, f: &Finding) -> bool {
        self.false_positives
            .iter()
            .any(|p| p.file == f.file && p.line == f.line && p.reported_type == f.reported_type)
    }
}

/// Generates one report per tool. Each log entry in a tool's scope gets a
/// correct finding, a wrongly typed one at the same line, or nothing.
/// Spurious findings never share a (file, line, type) key across tools,
/// so no majority can form on them.
pub fn synthesize(
    tools: &[ToolCapabilities],
    files: &[OracleFile<'_>],
    settings: &OracleSettings,
) -> Result<Vec<(OracleReport, PlantedTruth)>, OracleError> {
    settings.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    let mut taken: BTreeSet<(String, usize, BugType)> = BTreeSet::new();
    let mut out = Vec::new();
    for caps in tools {
        let finding = |file: &str, line: usize, t: ReportedType| Finding {
            tool: caps.tool.clone(),
            file: file.to_string(),
            line,
            reported_type: t,
            message: Some("planted".to_string()),
        };
        let mut findings = Vec::new();
        let mut counts: BTreeMap<BugType, PlantedCounts> = BTreeMap::new();
        let mut false_positives = Vec::new();
        for f in files.iter().filter(|f| caps.detects(f.bug_type)) {
            for e in f.log.iter().filter(|e| caps.detects(e.bug_type)) {
                let c = counts.entry(e.bug_type).or_default();
                c.injected += 1;
                let u: f64 = rng.random();
                if u < settings.miss_rate {
                    c.missed += 1;
                } else if u < settings.miss_rate + settings.mistype_rate {
                    c.mistyped += 1;
                    let others: Vec<_> = BugType::ALL
                        .into_iter()
                        .filter(|t| *t != e.bug_type)
                        .collect();
                    let wrong = *others.choose(&mut rng).expect("six other types");
                    findings.push(finding(f.file, e.start_line, ReportedType::Bug(wrong)));
                } else {
                    c.correct += 1;
                    findings.push(finding(f.file, e.start_line, ReportedType::Bug(e.bug_type)));
                }
            }
            let free: Vec<usize> = (1..=f.line_count)
                .filter(|l| !f.log.iter().any(|e| e.contains_line(*l)))
                .filter(|l| !taken.contains(&(f.file.to_string(), *l, f.bug_type)))
                .collect();
            let n = settings.extra_per_file.min(free.len());
            let mut picked = index::sample(&mut rng, free.len(), n).into_vec();
            picked.sort_unstable();
            for i in picked {
                let line = free[i];
                taken.insert((f.file.to_string(), line, f.bug_type));
                let spurious = finding(f.file, line, ReportedType::Bug(f.bug_type));
                false_positives.push(spurious.clone());
                findings.push(spurious);
                counts.entry(f.bug_type).or_default().extra += 1;
            }
        }
        findings.sort_by(|a, b| (&a.file, a.line).cmp(&(&b.file, b.line)));
        out.push((
            OracleReport {
                tool: caps.tool.clone(),
                settings: *settings,
                findings,
            },
            PlantedTruth {
                tool: caps.tool.clone(),
                settings: *settings,
                counts,
                false_positives,
            },
        ));
    }
    Ok(out)
}
