use std::path::PathBuf;

use anyhow::{Context, Result};
use rayon::prelude::*;
use solbugsmith::front::dump::ast_json;
use solbugsmith::{
    emit_bug_log, find_all_potential_locations, inject_all, parse, validate, BugType,
    InjectionProfile, LogFormat,
};

use crate::{CampaignConfig, SourceFile, Summary};

/// Output stem for one (contract, bug type) pair.
pub fn pair_stem(name: &str, t: BugType) -> String {
    format!("{name}.{t}")
}

/// Output stem, buggy source and serialized log, or an error line.
type Injected = Result<(String, String, Vec<u8>), String>;

struct Located<'a> {
    file: &'a SourceFile,
    result: Result<(serde_json::Value, Vec<InjectionProfile>), String>,
}

fn locate_all<'a>(config: &'a CampaignConfig) -> Result<Vec<Located<'a>>> {
    let pool = config.thread_pool()?;
    Ok(pool.install(|| {
        config
            .corpus
            .par_iter()
            .map(|file| Located {
                file,
                result: locate_one(config, file),
            })
            .collect()
    }))
}

fn locate_one(
    config: &CampaignConfig,
    file: &SourceFile,
) -> Result<(serde_json::Value, Vec<InjectionProfile>), String> {
    let text = file.checked_text()?;
    let unit = parse(text).map_err(|e| format!("{}.sol: {e}", file.name))?;
    let source_id = format!("{}.sol", file.name);
    let profiles = config
        .bug_types
        .iter()
        .map(|t| find_all_potential_locations(&unit, *t, &config.pool, &source_id))
        .collect();
    Ok((ast_json(&unit), profiles))
}

fn write(summary: &mut Summary, path: PathBuf, bytes: &[u8]) -> Result<()> {
    std::fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
    summary.written.push(path);
    Ok(())
}

/// Writes `<name>.<bugType>.bip.json` for every pair, and optionally
/// `<name>.ast.json`.
pub fn cmd_locate(config: &CampaignConfig, dump_ast: bool) -> Result<Summary> {
    config.ensure_out_dir()?;
    let mut summary = Summary::default();
    for located in locate_all(config)? {
        match located.result {
            Err(e) => summary.failures.push(e),
            Ok((ast, profiles)) => {
                let name = &located.file.name;
                if dump_ast {
                    let path = config.out_dir.join(format!("{name}.ast.json"));
                    write(
                        &mut summary,
                        path,
                        serde_json::to_string_pretty(&ast)?.as_bytes(),
                    )?;
                }
                for p in profiles {
                    let path = config
                        .out_dir
                        .join(format!("{}.bip.json", pair_stem(name, p.bug_type)));
                    write(&mut summary, path, p.to_json().as_bytes())?;
                }
            }
        }
    }
    Ok(summary)
}

/// Writes `<name>.<bugType>.sol` and `<name>.<bugType>.buglog.json` for
/// every pair. Bug counters run across the whole campaign in file-name
/// order, so ids are unique and independent of scheduling.
pub fn cmd_inject(config: &CampaignConfig) -> Result<Summary> {
    config.ensure_out_dir()?;
    let mut summary = Summary::default();
    let located = locate_all(config)?;

    let mut jobs = Vec::new();
    let mut counter = config.counter_start;
    for l in &located {
        match &l.result {
            Err(e) => summary.failures.push(e.clone()),
            Ok((_, profiles)) => {
                for p in profiles {
                    jobs.push((l.file, p, counter));
                    counter += p.sites.len() as u64;
                }
            }
        }
    }

    let pool = config.thread_pool()?;
    let outputs: Vec<Injected> = pool.install(|| {
        jobs.par_iter()
            .map(|(file, profile, start)| {
                let stem = pair_stem(&file.name, profile.bug_type);
                let out_name = format!("{stem}.sol");
                let text = std::str::from_utf8(&file.bytes).expect("checked while locating");
                let r = inject_all(text, profile, &config.pool, *start, &out_name)
                    .map_err(|e| format!("{out_name}: {e}"))?;
                if let Err(diags) = validate(&r.buggy_source) {
                    let first = diags.first().map(ToString::to_string).unwrap_or_default();
                    return Err(format!("{out_name}: output fails validation: {first}"));
                }
                let log = emit_bug_log(&r.log, LogFormat::Json).map_err(|e| e.to_string())?;
                Ok((stem, r.buggy_source, log))
            })
            .collect()
    });

    for out in outputs {
        match out {
            Err(e) => summary.failures.push(e),
            Ok((stem, source, log)) => {
                write(
                    &mut summary,
                    config.out_dir.join(format!("{stem}.sol")),
                    source.as_bytes(),
                )?;
                write(
                    &mut summary,
                    config.out_dir.join(format!("{stem}.buglog.json")),
                    &log,
                )?;
            }
        }
    }
    Ok(summary)
}
