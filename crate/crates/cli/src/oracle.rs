use std::path::Path;

use anyhow::{Context, Result};
use solbugsmith::evaluator::{synthesize, OracleFile, OracleSettings, ToolCapabilities};
use solbugsmith::{parse_bug_log, BugLogEntry, BugType, LogFormat};

use crate::{usage, CampaignConfig, Summary};

/// A buggy contract with its log, as found in an output directory.
pub(crate) struct LoggedFile {
    pub file: String,
    pub bug_type: BugType,
    pub line_count: usize,
    pub log: Vec<BugLogEntry>,
}

/// Reads every `<name>.<bugType>.buglog.json` in `dir`, sorted by name.
pub(crate) fn load_logs(dir: &Path) -> Result<Vec<LoggedFile>> {
    let mut names: Vec<String> = std::fs::read_dir(dir)
        .map_err(|e| usage(format!("cannot read {}: {e}", dir.display())))?
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".buglog.json"))
        .collect();
    names.sort();
    let mut out = Vec::new();
    for name in names {
        let stem = name.trim_end_matches(".buglog.json");
        let Some(bug_type) = stem.rsplit('.').next().and_then(|t| t.parse().ok()) else {
            continue;
        };
        let bytes = std::fs::read(dir.join(&name))?;
        let log =
            parse_bug_log(&bytes, LogFormat::Json).with_context(|| format!("reading {name}"))?;
        let file = format!("{stem}.sol");
        let source = std::fs::read_to_string(dir.join(&file))
            .with_context(|| format!("{name} has no matching {file}"))?;
        out.push(LoggedFile {
            file,
            bug_type,
            line_count: source.lines().count(),
            log,
        });
    }
    Ok(out)
}

pub(crate) fn selected_tools(config: &CampaignConfig) -> Vec<ToolCapabilities> {
    config
        .capabilities
        .tools
        .iter()
        .filter(|c| config.tools.is_empty() || config.tools.contains(&c.tool))
        .cloned()
        .collect()
}

/// Writes `reports/<tool>.json` and the planted truth `reports/<tool>.truth.json`
/// for each selected tool, from the bug logs in the output directory.
pub fn cmd_oracle(config: &CampaignConfig, settings: &OracleSettings) -> Result<Summary> {
    settings.check().map_err(|e| usage(e.to_string()))?;
    let logged = load_logs(&config.out_dir)?;
    if logged.is_empty() {
        return Err(usage(format!(
            "missing bug logs: no *.buglog.json in {}",
            config.out_dir.display()
        )));
    }
    let files: Vec<OracleFile<'_>> = logged
        .iter()
        .filter(|l| config.bug_types.contains(&l.bug_type))
        .map(|l| OracleFile {
            file: &l.file,
            bug_type: l.bug_type,
            line_count: l.line_count,
            log: &l.log,
        })
        .collect();
    let dir = config.out_dir.join("reports");
    std::fs::create_dir_all(&dir)?;
    let mut summary = Summary::default();
    for (report, truth) in synthesize(&selected_tools(config), &files, settings)? {
        for (path, json) in [
            (
                dir.join(format!("{}.json", report.tool)),
                serde_json::to_string_pretty(&report)?,
            ),
            (
                dir.join(format!("{}.truth.json", truth.tool)),
                serde_json::to_string_pretty(&truth)?,
            ),
        ] {
            std::fs::write(&path, json + "\n")
                .with_context(|| format!("writing {}", path.display()))?;
            summary.written.push(path);
        }
    }
    Ok(summary)
}
