use std::fmt;
use std::time::{Duration, Instant};

use anyhow::{bail, Result};
use solbugsmith::{find_all_potential_locations, inject_all, parse};

use crate::{usage, CampaignConfig, SourceFile};

/// Injection time for one contract across all selected bug types.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub contract: String,
    pub lines: usize,
    pub runs: usize,
    pub min: Duration,
    pub mean: Duration,
    pub max: Duration,
}

impl fmt::Display for BenchRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ms = |d: Duration| d.as_secs_f64() * 1e3;
        write!(
            f,
            "{},{},{},{:.3},{:.3},{:.3}",
            self.contract,
            self.lines,
            self.runs,
            ms(self.min),
            ms(self.mean),
            ms(self.max)
        )
    }
}

/// Parses, locates and injects every selected bug type once.
pub fn inject_every_type(config: &CampaignConfig, text: &str) -> Result<()> {
    let unit = parse(text)?;
    for t in &config.bug_types {
        let profile = find_all_potential_locations(&unit, *t, &config.pool, "bench.sol");
        inject_all(
            text,
            &profile,
            &config.pool,
            config.counter_start,
            "bench.sol",
        )?;
    }
    Ok(())
}

fn time_file(config: &CampaignConfig, file: &SourceFile, repeats: usize) -> Result<BenchRow> {
    let text = file.checked_text().map_err(anyhow::Error::msg)?;
    let mut times = Vec::with_capacity(repeats);
    for _ in 0..repeats {
        let start = Instant::now();
        inject_every_type(config, text)?;
        times.push(start.elapsed());
    }
    let total: Duration = times.iter().sum();
    Ok(BenchRow {
        contract: file.name.clone(),
        lines: text.lines().count(),
        runs: repeats,
        min: *times.iter().min().expect("at least one run"),
        mean: total / repeats as u32,
        max: *times.iter().max().expect("at least one run"),
    })
}

/// Wall-clock injection time per contract, sequential so runs do not
/// compete for cores.
pub fn cmd_bench(config: &CampaignConfig, repeats: usize) -> Result<Vec<BenchRow>> {
    if repeats == 0 {
        bail!(usage("--repeats must be at least 1"));
    }
    config
        .corpus
        .iter()
        .map(|f| time_file(config, f, repeats))
        .collect()
}
