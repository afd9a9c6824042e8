//! Campaign driver: locate sites, inject bugs, synthesize analyzer reports,
//! score them and time the injector.

use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use solbugsmith::evaluator::{default_capabilities, load_capabilities, CapabilityMatrix};
use solbugsmith::{default_pool, load_pool, BugPool, BugType};

mod bench;
mod evaluate;
mod inject;
mod oracle;

pub use bench::{cmd_bench, BenchRow};
pub use evaluate::cmd_evaluate;
pub use inject::{cmd_inject, cmd_locate};
pub use oracle::cmd_oracle;

#[derive(Debug, Parser)]
#[command(
    name = "solbugsmith",
    version,
    about = "Inject Solidity bugs and score analyzer reports"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the injection sites of every (contract, bug type) pair.
    Locate {
        #[command(flatten)]
        campaign: CampaignArgs,
        /// Also write the syntax tree of each contract.
        #[arg(long)]
        dump_ast: bool,
    },
    /// Write buggy contracts and their bug logs.
    Inject {
        #[command(flatten)]
        campaign: CampaignArgs,
        /// Also write the injection sites of every pair.
        #[arg(long)]
        dump_bip: bool,
    },
    /// Write reports from synthetic analyzers with planted behaviour.
    Oracle {
        #[command(flatten)]
        campaign: CampaignArgs,
        #[arg(long, default_value_t = 0.0)]
        miss_rate: f64,
        #[arg(long, default_value_t = 0.0)]
        mistype_rate: f64,
        #[arg(long, default_value_t = 0)]
        extra_per_file: usize,
    },
    /// Score analyzer reports against the bug logs.
    Evaluate {
        #[command(flatten)]
        campaign: CampaignArgs,
        /// Directory of `<tool>.json` reports; defaults to `<out>/reports`.
        #[arg(long)]
        reports: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        line_slack: usize,
        #[arg(long, default_value_t = 20)]
        sample_size: usize,
    },
    /// Time injection of every bug type into each contract.
    Bench {
        #[command(flatten)]
        campaign: CampaignArgs,
        #[arg(long, default_value_t = 5)]
        repeats: usize,
    },
}

#[derive(Debug, Clone, Args)]
pub struct CampaignArgs {
    /// Directory of `.sol` files; the bundled seed corpus when omitted.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Bug pool JSON; the bundled pool when omitted.
    #[arg(long)]
    pub pool: Option<PathBuf>,
    /// Comma-separated bug types; all seven when omitted.
    #[arg(long, value_delimiter = ',')]
    pub bug_types: Option<Vec<String>>,
    /// Tool capability matrix; the bundled six-analyzer matrix when omitted.
    #[arg(long)]
    pub capabilities: Option<PathBuf>,
    /// Restrict the campaign to what these tools can detect.
    #[arg(long = "tool", value_delimiter = ',')]
    pub tools: Vec<String>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    #[arg(long, env = "SOLBUGSMITH_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0)]
    pub counter_start: u64,
    /// Worker threads; one per core when omitted.
    #[arg(long)]
    pub jobs: Option<usize>,
}

/// A contract to process: its file stem and raw bytes.
#[derive(Debug, Clone)]
pub struct SourceFile {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl SourceFile {
    /// The text, or the diagnostics that make it unusable.
    pub fn checked_text(&self) -> Result<&str, String> {
        solbugsmith::validate_bytes(&self.bytes).map_err(|diags| {
            diags
                .iter()
                .map(|d| format!("{}.sol:{d}", self.name))
                .collect::<Vec<_>>()
                .join("\n")
        })?;
        Ok(std::str::from_utf8(&self.bytes).expect("validated as UTF-8"))
    }
}

/// Validated campaign settings.
#[derive(Debug, Clone)]
pub struct CampaignConfig {
    pub corpus: Vec<SourceFile>,
    pub pool: BugPool,
    pub bug_types: Vec<BugType>,
    pub capabilities: CapabilityMatrix,
    pub tools: Vec<String>,
    pub out_dir: PathBuf,
    pub seed: u64,
    pub counter_start: u64,
    pub jobs: usize,
}

/// A usage or configuration problem (exit code 1).
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// Outcome of a command that processes many files.
#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct Summary {
    pub written: Vec<PathBuf>,
    pub failures: Vec<String>,
}

impl Summary {
    pub fn exit_code(&self) -> u8 {
        if self.failures.is_empty() {
            0
        } else {
            2
        }
    }

    fn report(&self, what: &str) {
        for f in &self.failures {
            eprintln!("error: {f}");
        }
        eprintln!(
            "{what}: {} files written, {} failures",
            self.written.len(),
            self.failures.len()
        );
    }
}

/// Reads `*.sol` files from `dir`, sorted by name.
pub fn read_corpus(dir: &Path) -> Result<Vec<SourceFile>> {
    let mut files = Vec::new();
    let entries = std::fs::read_dir(dir)
        .map_err(|e| usage(format!("cannot read corpus {}: {e}", dir.display())))?;
    for entry in entries {
        let path = entry?.path();
        if path.extension().is_some_and(|e| e == "sol") {
            let bytes =
                std::fs::read(&path).with_context(|| format!("reading {}", path.display()))?;
            let name = path
                .file_stem()
                .unwrap_or_default()
                .to_string_lossy()
                .into_owned();
            files.push(SourceFile { name, bytes });
        }
    }
    files.sort_by(|a, b| a.name.cmp(&b.name));
    Ok(files)
}

pub fn bundled_corpus() -> Vec<SourceFile> {
    solbugsmith::corpus::SEED_CORPUS
        .iter()
        .map(|(file, text)| SourceFile {
            name: file.trim_end_matches(".sol").to_string(),
            bytes: text.as_bytes().to_vec(),
        })
        .collect()
}

impl CampaignArgs {
    pub fn resolve(&self) -> Result<CampaignConfig> {
        let corpus = match &self.corpus {
            Some(dir) => read_corpus(dir)?,
            None => bundled_corpus(),
        };
        let pool = match &self.pool {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| usage(format!("cannot read pool {}: {e}", p.display())))?;
                load_pool(&text).map_err(|e| usage(format!("{}: {e}", p.display())))?
            }
            None => default_pool(),
        };
        let capabilities = match &self.capabilities {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| usage(format!("cannot read capabilities {}: {e}", p.display())))?;
                load_capabilities(&text).map_err(|e| usage(format!("{}: {e}", p.display())))?
            }
            None => default_capabilities(),
        };
        let mut bug_types = match &self.bug_types {
            None => BugType::ALL.to_vec(),
            Some(list) => {
                let mut v = Vec::new();
                for s in list.iter().map(|s| s.trim()).filter(|s| !s.is_empty()) {
                    let t: BugType = s.parse().map_err(|e| usage(format!("{e}")))?;
                    if !v.contains(&t) {
                        v.push(t);
                    }
                }
                v
            }
        };
        let mut tools = Vec::new();
        for name in &self.tools {
            let Some(caps) = capabilities.tool(name) else {
                bail!(usage(format!("unknown tool `{name}`")));
            };
            tools.push(caps.tool.clone());
        }
        if !tools.is_empty() {
            bug_types.retain(|t| {
                tools
                    .iter()
                    .any(|n| capabilities.tool(n).is_some_and(|c| c.detects(*t)))
            });
        }
        bug_types.sort();
        if bug_types.is_empty() {
            bail!(usage("no bug types selected"));
        }
        let jobs = self
            .jobs
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
        if jobs == 0 {
            bail!(usage("--jobs must be at least 1"));
        }
        Ok(CampaignConfig {
            corpus,
            pool,
            bug_types,
            capabilities,
            tools,
            out_dir: self.out.clone(),
            seed: self.seed,
            counter_start: self.counter_start,
            jobs,
        })
    }
}

impl CampaignConfig {
    pub(crate) fn thread_pool(&self) -> Result<rayon::ThreadPool> {
        Ok(rayon::ThreadPoolBuilder::new()
            .num_threads(self.jobs)
            .build()?)
    }

    pub(crate) fn ensure_out_dir(&self) -> Result<()> {
        std::fs::create_dir_all(&self.out_dir)
            .with_context(|| format!("creating {}", self.out_dir.display()))
    }
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: Cli) -> u8 {
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                1
            } else {
                2
            }
        }
    }
}

fn dispatch(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Locate { campaign, dump_ast } => {
            let s = cmd_locate(&campaign.resolve()?, dump_ast)?;
            s.report("locate");
            Ok(s.exit_code())
        }
        Command::Inject { campaign, dump_bip } => {
            let config = campaign.resolve()?;
            let mut s = cmd_inject(&config)?;
            if dump_bip {
                let located = cmd_locate(&config, false)?;
                s.written.extend(located.written);
            }
            s.report("inject");
            Ok(s.exit_code())
        }
        Command::Oracle {
            campaign,
            miss_rate,
            mistype_rate,
            extra_per_file,
        } => {
            let config = campaign.resolve()?;
            let settings = solbugsmith::evaluator::OracleSettings {
                miss_rate,
                mistype_rate,
                extra_per_file,
                seed: config.seed,
            };
            let s = cmd_oracle(&config, &settings)?;
            s.report("oracle");
            Ok(s.exit_code())
        }
        Command::Evaluate {
            campaign,
            reports,
            line_slack,
            sample_size,
        } => {
            let config = campaign.resolve()?;
            let reports = reports.unwrap_or_else(|| config.out_dir.join("reports"));
            let (evaluation, s) = cmd_evaluate(&config, &reports, line_slack, sample_size)?;
            print!("{}", evaluation.to_markdown());
            s.report("evaluate");
            Ok(s.exit_code())
        }
        Command::Bench { campaign, repeats } => {
            let config = campaign.resolve()?;
            let rows = cmd_bench(&config, repeats)?;
            println!("contract,lines,runs,min_ms,mean_ms,max_ms");
            for r in &rows {
                println!("{r}");
            }
            Ok(0)
        }
    }
}
