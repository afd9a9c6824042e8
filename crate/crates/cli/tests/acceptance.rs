//! One PASS/FAIL line per acceptance criterion; exits nonzero if any fails.

#[path = "../../core/tests/support/oracles.rs"]
mod oracles;

use std::collections::BTreeMap;
use std::path::Path;
use std::time::{Duration, Instant};

use solbugsmith::corpus::SEED_CORPUS;
use solbugsmith::evaluator::{
    default_capabilities, estimate_false_positives, filter_by_majority, Finding, FnResult,
    OracleSettings, PlantedTruth, ReportedType,
};
use solbugsmith::{
    default_pool, find_all_potential_locations, inject_all, parse, validate, BugType, SnippetForm,
};
use solbugsmith_cli::{cmd_evaluate, cmd_inject, cmd_oracle, CampaignArgs, CampaignConfig};

const FP_EXAMPLE_BOUND: Duration = Duration::from_millis(1);
const VALIDITY_BOUND: Duration = Duration::from_secs(30);
const PROBE_BOUND: Duration = Duration::from_secs(60);
const LOG_LINES_BOUND: Duration = Duration::from_secs(10);
const CLOSURE_BOUND: Duration = Duration::from_secs(30);
const LARGE_CONTRACT_BOUND: Duration = Duration::from_secs(5);
const DETERMINISM_BOUND: Duration = Duration::from_secs(30);
const PROBE_MAX_LINES: usize = 50;
const LARGE_CONTRACT: &str = "registry.sol";

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome, Duration);

fn config(out: &Path, seed: u64) -> CampaignConfig {
    CampaignArgs {
        corpus: None,
        pool: None,
        bug_types: None,
        capabilities: None,
        tools: Vec::new(),
        out: out.to_path_buf(),
        seed,
        counter_start: 0,
        jobs: None,
    }
    .resolve()
    .expect("default campaign resolves")
}

fn fp_example() -> Outcome {
    let est = estimate_false_positives(40, 20, 16).map_err(|e| e.to_string())?;
    if est == 32 {
        Ok("40 filtered, 16/20 confirmed -> 32".into())
    } else {
        Err(format!("estimated {est}, expected 32"))
    }
}

fn validity() -> Outcome {
    let pool = default_pool();
    let mut n = 0;
    for (name, src) in SEED_CORPUS {
        let unit = parse(src).map_err(|e| format!("{name}: {e}"))?;
        for t in BugType::ALL {
            let profile = find_all_potential_locations(&unit, t, &pool, name);
            let r = inject_all(src, &profile, &pool, 0, name)
                .map_err(|e| format!("{name} {t}: {e}"))?;
            validate(&r.buggy_source).map_err(|d| format!("{name} {t}: {}", d[0]))?;
            n += 1;
        }
    }
    if SEED_CORPUS.len() < 10 {
        return Err(format!("corpus has {} contracts", SEED_CORPUS.len()));
    }
    Ok(format!("{n} buggy contracts validate"))
}

fn probe_oracle() -> Outcome {
    let pool = default_pool();
    let mut checked = 0;
    for (name, src) in SEED_CORPUS
        .iter()
        .filter(|(_, s)| s.lines().count() <= PROBE_MAX_LINES)
    {
        let unit = parse(src).map_err(|e| format!("{name}: {e}"))?;
        let expected = oracles::probe_statement_offsets(src);
        for t in BugType::ALL {
            if !pool.forms_for(t).contains(&SnippetForm::SimpleStatement) {
                continue;
            }
            let found = oracles::simple_statement_sites(&find_all_potential_locations(
                &unit, t, &pool, name,
            ));
            if found != expected {
                return Err(format!("{name} {t}: sites {found:?}, probe {expected:?}"));
            }
            checked += 1;
        }
    }
    if checked == 0 {
        return Err("no contract small enough".into());
    }
    Ok(format!(
        "{checked} (contract, type) profiles equal the probe set"
    ))
}

fn log_lines() -> Outcome {
    let pool = default_pool();
    let mut entries = 0;
    for (name, src) in SEED_CORPUS {
        let unit = parse(src).map_err(|e| format!("{name}: {e}"))?;
        for t in BugType::ALL {
            let profile = find_all_potential_locations(&unit, t, &pool, name);
            let r = inject_all(src, &profile, &pool, 0, name)
                .map_err(|e| format!("{name} {t}: {e}"))?;
            oracles::check_log_lines(src, &profile, &r).map_err(|e| format!("{name} {t}: {e}"))?;
            entries += r.log.len();
        }
    }
    Ok(format!("{entries} entries exact"))
}

fn closure() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let config = config(dir.path(), 11);
    let settings = OracleSettings {
        miss_rate: 0.3,
        mistype_rate: 0.2,
        extra_per_file: 5,
        seed: config.seed,
    };
    let s = cmd_inject(&config).map_err(|e| e.to_string())?;
    if !s.failures.is_empty() {
        return Err(s.failures.join("; "));
    }
    cmd_oracle(&config, &settings).map_err(|e| e.to_string())?;
    let reports = dir.path().join("reports");
    let (evaluation, _) = cmd_evaluate(&config, &reports, 0, 20).map_err(|e| e.to_string())?;
    let mut cells = 0;
    for caps in &config.capabilities.tools {
        let text = std::fs::read_to_string(reports.join(format!("{}.truth.json", caps.tool)))
            .map_err(|e| e.to_string())?;
        let truth: PlantedTruth = serde_json::from_str(&text).map_err(|e| e.to_string())?;
        let fns: Vec<&FnResult> = evaluation
            .false_negatives
            .iter()
            .filter(|r| r.tool == caps.tool)
            .collect();
        if fns.len() != truth.counts.len() {
            return Err(format!(
                "{}: {} FN rows, {} planted",
                caps.tool,
                fns.len(),
                truth.counts.len()
            ));
        }
        for r in fns {
            let p = &truth.counts[&r.bug_type];
            let got = (
                r.injected,
                r.correctly_detected,
                r.misidentified_type,
                r.unreported,
            );
            let want = (p.injected, p.correct, p.mistyped, p.missed);
            if got != want {
                return Err(format!(
                    "{} {}: scored {got:?}, planted {want:?}",
                    caps.tool, r.bug_type
                ));
            }
            cells += 1;
        }
        for r in evaluation
            .false_positives
            .iter()
            .filter(|r| r.tool == caps.tool)
        {
            let extra = truth.counts.get(&r.bug_type).map_or(0, |p| p.extra);
            if r.filtered != extra || r.estimated_fp != Some(extra) {
                return Err(format!(
                    "{} {}: filtered {} estimated {:?}, planted {extra}",
                    caps.tool, r.bug_type, r.filtered, r.estimated_fp
                ));
            }
            cells += 1;
        }
    }
    Ok(format!("{cells} cells match the planted truth"))
}

fn cell_convention() -> Outcome {
    let r = FnResult {
        tool: "SmartCheck".into(),
        bug_type: BugType::Reentrancy,
        injected: 1343,
        correctly_detected: 0,
        misidentified_type: 1237,
        unreported: 106,
    };
    match r.cell() {
        c if c == "1343 (106)" => Ok(c),
        c => Err(format!("rendered {c:?}")),
    }
}

fn thresholds() -> Outcome {
    let caps = default_capabilities();
    let expected = [
        (BugType::Reentrancy, 4),
        (BugType::TimestampDependency, 3),
        (BugType::UncheckedSend, 2),
        (BugType::UnhandledException, 3),
        (BugType::TOD, 2),
        (BugType::IntegerOverflowUnderflow, 3),
        (BugType::TxOrigin, 2),
    ];
    for (t, k) in expected {
        if caps.thresholds.get(&t) != Some(&k) {
            return Err(format!(
                "{t}: threshold {:?}, expected {k}",
                caps.thresholds.get(&t)
            ));
        }
        let tools: Vec<String> = (0..k).map(|i| format!("tool{i}")).collect();
        let finding = |tool: &str, line| Finding {
            tool: tool.to_string(),
            file: "a.sol".into(),
            line,
            reported_type: ReportedType::Bug(t),
            message: None,
        };
        let mut by_tool: BTreeMap<String, Vec<Finding>> = BTreeMap::new();
        for (i, tool) in tools.iter().enumerate() {
            let v = by_tool.entry(tool.clone()).or_default();
            v.push(finding(tool, 20));
            if i + 1 < k {
                v.push(finding(tool, 10));
            }
        }
        let out =
            filter_by_majority(&by_tool, &[], &caps.thresholds, 0).map_err(|e| e.to_string())?;
        let first = &out["tool0"];
        let below = first.filtered.iter().any(|f| f.line == 10)
            && !first.excluded.iter().any(|f| f.line == 10);
        let at = first.excluded.iter().any(|f| f.line == 20)
            && !first.filtered.iter().any(|f| f.line == 20);
        if !(below && at) {
            return Err(format!(
                "{t}: {} tools kept={below}, {k} tools excluded={at}",
                k - 1
            ));
        }
    }
    Ok("threshold-1 tools stay filtered, threshold tools are excluded".into())
}

fn large_contract() -> Outcome {
    let (_, src) = SEED_CORPUS
        .iter()
        .find(|(n, _)| *n == LARGE_CONTRACT)
        .ok_or("large contract missing")?;
    let lines = src.lines().count();
    if !(230..=300).contains(&lines) {
        return Err(format!("{LARGE_CONTRACT} has {lines} lines"));
    }
    let pool = default_pool();
    let start = Instant::now();
    let unit = parse(src).map_err(|e| e.to_string())?;
    let mut bugs = 0;
    for t in BugType::ALL {
        let profile = find_all_potential_locations(&unit, t, &pool, LARGE_CONTRACT);
        bugs += inject_all(src, &profile, &pool, 0, LARGE_CONTRACT)
            .map_err(|e| e.to_string())?
            .log
            .len();
    }
    Ok(format!(
        "{lines} lines, {bugs} bugs in {:?}",
        start.elapsed()
    ))
}

fn snapshot(dir: &Path) -> Result<BTreeMap<String, Vec<u8>>, String> {
    let mut out = BTreeMap::new();
    for entry in std::fs::read_dir(dir).map_err(|e| e.to_string())? {
        let path = entry.map_err(|e| e.to_string())?.path();
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        out.insert(name, std::fs::read(&path).map_err(|e| e.to_string())?);
    }
    Ok(out)
}

fn determinism() -> Outcome {
    let mut runs = Vec::new();
    for _ in 0..2 {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let s = cmd_inject(&config(dir.path(), 7)).map_err(|e| e.to_string())?;
        if !s.failures.is_empty() {
            return Err(s.failures.join("; "));
        }
        runs.push(snapshot(dir.path())?);
    }
    if runs[0] != runs[1] {
        let diff = runs[0].keys().find(|k| runs[1].get(*k) != runs[0].get(*k));
        return Err(format!("runs differ at {diff:?}"));
    }
    Ok(format!("{} files byte-identical", runs[0].len()))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("FP extrapolation example", fp_example, FP_EXAMPLE_BOUND),
        ("buggy contracts validate", validity, VALIDITY_BOUND),
        (
            "statement sites match probe oracle",
            probe_oracle,
            PROBE_BOUND,
        ),
        ("bug log lines exact", log_lines, LOG_LINES_BOUND),
        ("synthetic analyzer closure", closure, CLOSURE_BOUND),
        ("false negative cell format", cell_convention, Duration::MAX),
        ("majority filter thresholds", thresholds, Duration::MAX),
        (
            "large contract injection time",
            large_contract,
            LARGE_CONTRACT_BOUND,
        ),
        ("injection determinism", determinism, DETERMINISM_BOUND),
    ];
    let mut failed = Vec::new();
    for (i, (name, check, bound)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > bound => {
                Err(format!("{detail}; took {elapsed:?}, bound {bound:?}"))
            }
            other => other,
        };
        match outcome {
            Ok(detail) => println!("criterion {}: PASS {name}: {detail} ({elapsed:?})", i + 1),
            Err(why) => {
                println!("criterion {}: FAIL {name}: {why} ({elapsed:?})", i + 1);
                failed.push(i + 1);
            }
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
