use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{Context, Result};
use solbugsmith::evaluator::{
    filter_by_majority, ingest_report, restrict_to_scope, sample_for_inspection,
    score_false_negatives, Adapter, Evaluation, Finding, FpResult, MatchPolicy, PlantedTruth,
    ReportedType,
};
use solbugsmith::BugType;

use crate::oracle::{load_logs, selected_tools};
use crate::{usage, CampaignConfig, Summary};

/// Seed for the inspection sample of one (tool, bug type) cell.
fn sample_seed(seed: u64, tool_index: usize, t: BugType) -> u64 {
    let type_index = BugType::ALL.iter().position(|x| *x == t).unwrap_or(0);
    seed ^ ((tool_index as u64) << 8 | type_index as u64)
}

/// Scores `<tool>.json` reports in `reports` against the bug logs in the
/// output directory and writes `evaluation.md`, `evaluation.json`,
/// `fn.csv` and `fp.csv` there. When a `<tool>.truth.json` sits next to a
/// report, it stands in for manual inspection of the sampled findings.
pub fn cmd_evaluate(
    config: &CampaignConfig,
    reports: &Path,
    line_slack: usize,
    sample_size: usize,
) -> Result<(Evaluation, Summary)> {
    let logged = load_logs(&config.out_dir)?;
    let log: Vec<_> = logged
        .iter()
        .filter(|l| config.bug_types.contains(&l.bug_type))
        .flat_map(|l| l.log.iter().cloned())
        .collect();
    let tools = selected_tools(config);
    let mut summary = Summary::default();
    let mut failed = Vec::new();
    let mut missing = Vec::new();
    let mut findings_by_tool: BTreeMap<String, Vec<Finding>> = BTreeMap::new();
    let mut truths: BTreeMap<String, PlantedTruth> = BTreeMap::new();

    for caps in &tools {
        let path = reports.join(format!("{}.json", caps.tool));
        let Ok(bytes) = std::fs::read(&path) else {
            missing.push(caps.tool.clone());
            continue;
        };
        match ingest_report(&bytes, Adapter::detect(&bytes)) {
            Ok(found) => {
                let mine = found
                    .into_iter()
                    .filter(|f| f.tool.eq_ignore_ascii_case(&caps.tool))
                    .map(|mut f| {
                        f.tool = caps.tool.clone();
                        f
                    })
                    .collect();
                findings_by_tool.insert(caps.tool.clone(), mine);
            }
            Err(e) => {
                summary.failures.push(format!("{}: {e}", path.display()));
                failed.push(caps.tool.clone());
                continue;
            }
        }
        let truth_path = reports.join(format!("{}.truth.json", caps.tool));
        if let Ok(text) = std::fs::read_to_string(&truth_path) {
            let truth: PlantedTruth = serde_json::from_str(&text)
                .with_context(|| format!("reading {}", truth_path.display()))?;
            truths.insert(caps.tool.clone(), truth);
        }
    }
    if findings_by_tool.is_empty() && failed.is_empty() {
        return Err(usage(format!(
            "no reports in {} for: {}",
            reports.display(),
            missing.join(", ")
        )));
    }
    for tool in &missing {
        summary.failures.push(format!("no report for {tool}"));
    }
    failed.extend(missing);

    let policy = MatchPolicy { line_slack };
    let mut false_negatives = Vec::new();
    for caps in tools
        .iter()
        .filter(|c| findings_by_tool.contains_key(&c.tool))
    {
        let scoped = restrict_to_scope(&log, caps).map_err(|e| usage(e.to_string()))?;
        false_negatives.extend(score_false_negatives(
            &caps.tool,
            &scoped,
            &findings_by_tool[&caps.tool],
            policy,
        ));
    }

    let outcomes = filter_by_majority(
        &findings_by_tool,
        &log,
        &config.capabilities.thresholds,
        line_slack,
    )
    .map_err(|e| usage(e.to_string()))?;
    let mut false_positives = Vec::new();
    let mut miscellaneous = BTreeMap::new();
    for (tool_index, caps) in tools.iter().enumerate() {
        let Some(o) = outcomes.get(&caps.tool) else {
            continue;
        };
        miscellaneous.insert(caps.tool.clone(), o.miscellaneous.len());
        for &t in config.bug_types.iter().filter(|t| caps.detects(**t)) {
            let of_type = |v: &[Finding]| -> Vec<Finding> {
                v.iter()
                    .filter(|f| f.reported_type == ReportedType::Bug(t))
                    .cloned()
                    .collect()
            };
            let filtered = of_type(&o.filtered);
            let sample = sample_for_inspection(
                &filtered,
                sample_size,
                sample_seed(config.seed, tool_index, t),
            );
            let confirmed = truths
                .get(&caps.tool)
                .map(|truth| sample.iter().filter(|f| truth.is_false_positive(f)).count());
            false_positives.push(FpResult::new(
                &caps.tool,
                t,
                of_type(&o.candidates).len(),
                of_type(&o.excluded).len(),
                sample.len(),
                confirmed,
            )?);
        }
    }

    let evaluation = Evaluation {
        capabilities: config.capabilities.clone(),
        false_negatives,
        false_positives,
        miscellaneous,
        failed_tools: failed,
    };
    std::fs::create_dir_all(&config.out_dir)?;
    for (name, bytes) in [
        ("evaluation.md", evaluation.to_markdown().into_bytes()),
        ("evaluation.json", serde_json::to_vec_pretty(&evaluation)?),
        ("fn.csv", evaluation.fn_csv()?),
        ("fp.csv", evaluation.fp_csv()?),
    ] {
        let path = config.out_dir.join(name);
        std::fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        summary.written.push(path);
    }
    Ok((evaluation, summary))
}
