//! Command implementations behind the `strongchain` binary, and the preset
//! experiments with their reference values.

mod demo;
mod presets;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use thiserror::Error;

use crate::analytics::{cov_curve, log_grid, pool_table, AnalyticsError};
use crate::sim::{run_scenario, write_csv, ConfigError, RunMetrics, SimConfig};

pub use demo::{cmd_demo_mine, DemoBlock, DemoOptions};
pub use presets::*;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Analytics(#[from] AnalyticsError),
    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
    #[error("nonce budget exhausted while mining height {height}")]
    BudgetExhausted { height: u32 },
    #[error("mined block rejected: {0}")]
    Rejected(String),
    #[error("{failed} of {total} checks outside tolerance")]
    Tolerance { failed: usize, total: usize },
}

impl HarnessError {
    /// 1 usage, 2 configuration or input, 3 tolerance failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Usage(_) => 1,
            HarnessError::Tolerance { .. } => 3,
            _ => 2,
        }
    }

    fn io(path: &Path, e: io::Error) -> HarnessError {
        HarnessError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Check {
        Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }

    pub fn line(&self) -> String {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        format!("{tag} {}: {}", self.name, self.detail)
    }
}

/// A CSV file produced by a preset.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub file: String,
    pub csv: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PresetOutput {
    pub preset: String,
    pub tables: Vec<Table>,
    pub checks: Vec<Check>,
}

impl PresetOutput {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn report(&self) -> String {
        let mut s = format!("preset {}\n", self.preset);
        for c in &self.checks {
            s.push_str(&c.line());
            s.push('\n');
        }
        s
    }

    /// Writes every table and `report.txt` under `dir/<preset>/`.
    pub fn write(&self, dir: &Path) -> Result<PathBuf, HarnessError> {
        let d = dir.join(&self.preset);
        fs::create_dir_all(&d).map_err(|e| HarnessError::io(&d, e))?;
        for t in &self.tables {
            let p = d.join(&t.file);
            fs::write(&p, &t.csv).map_err(|e| HarnessError::io(&p, e))?;
        }
        let p = d.join("report.txt");
        fs::write(&p, self.report()).map_err(|e| HarnessError::io(&p, e))?;
        Ok(d)
    }
}

/// Runs independent cells in parallel; results keep the input order.
pub fn run_matrix(cells: &[SimConfig]) -> Result<Vec<RunMetrics>, ConfigError> {
    cells.par_iter().map(run_scenario).collect()
}

pub fn runs_csv(runs: &[RunMetrics]) -> String {
    let mut buf = Vec::new();
    write_csv(&mut buf, runs).expect("writing to memory");
    String::from_utf8(buf).expect("csv is utf-8")
}

/// Runs the scenario in `config`, optionally overriding its seed, and writes
/// one CSV row to `out` (stdout when `None`). Block records, when enabled,
/// go to `<out stem>_blocks.csv`.
pub fn cmd_simulate(
    config: &Path,
    seed: Option<u64>,
    out: Option<&Path>,
) -> Result<RunMetrics, HarnessError> {
    let mut cfg = SimConfig::load(config)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if cfg.name.is_empty() {
        cfg.name = config
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
    }
    let m = run_scenario(&cfg)?;
    let csv = runs_csv(std::slice::from_ref(&m));
    match out {
        Some(p) => {
            fs::write(p, &csv).map_err(|e| HarnessError::io(p, e))?;
            if cfg.record_blocks {
                let stem = p
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_default();
                let bp = p.with_file_name(format!("{stem}_blocks.csv"));
                let f = fs::File::create(&bp).map_err(|e| HarnessError::io(&bp, e))?;
                crate::sim::metrics::write_block_records(f, &m.records)
                    .map_err(|e| HarnessError::io(&bp, io::Error::other(e)))?;
            }
        }
        None => {
            io::stdout()
                .write_all(csv.as_bytes())
                .map_err(|e| HarnessError::io(Path::new("<stdout>"), e))?;
        }
    }
    Ok(m)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalyzeOptions {
    pub ratio: f64,
    pub gamma: f64,
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub points: usize,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        AnalyzeOptions {
            ratio: 1024.0,
            gamma: 10.0,
            alpha_min: 1e-4,
            alpha_max: 0.5,
            points: 50,
        }
    }
}

/// Coefficient-of-variation curve and pool table for one parameter set.
/// Returns `(cov_curve.csv, pool_table.csv)`; with `out` set, both are also
/// written into that directory.
pub fn cmd_analyze(
    opts: &AnalyzeOptions,
    out: Option<&Path>,
) -> Result<(String, String), HarnessError> {
    if !(opts.ratio >= 1.0
        && opts.gamma >= 0.0
        && opts.alpha_min > 0.0
        && opts.alpha_max >= opts.alpha_min)
    {
        return Err(HarnessError::Usage(
            "need ratio >= 1, gamma >= 0 and 0 < alpha-min <= alpha-max".into(),
        ));
    }
    let grid = log_grid(opts.alpha_min, opts.alpha_max, opts.points.max(1));
    let mut cov = String::from("alpha,ratio,gamma,cov_bitcoin,cov_strongchain\n");
    for r in cov_curve(&grid, opts.ratio, opts.gamma) {
        cov.push_str(&format!(
            "{},{},{},{},{}\n",
            r.alpha, r.ratio, r.gamma, r.cov_bitcoin, r.cov_strongchain
        ));
    }
    let named: Vec<(&str, f64)> = POOLS.iter().map(|p| (p.name, p.bitcoin_share)).collect();
    let mut pools = String::from("pool,bitcoin_share,equivalent_share,reduction\n");
    for r in pool_table(&named, opts.ratio, opts.gamma)? {
        pools.push_str(&format!(
            "{},{},{},{}\n",
            r.pool, r.bitcoin_share, r.equivalent_share, r.reduction
        ));
    }
    if let Some(dir) = out {
        fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
        for (name, text) in [("cov_curve.csv", &cov), ("pool_table.csv", &pools)] {
            let p = dir.join(name);
            fs::write(&p, text).map_err(|e| HarnessError::io(&p, e))?;
        }
    }
    Ok((cov, pools))
}

/// Runs one preset (or `all`), writes its tables and report under `out`,
/// and fails with [`HarnessError::Tolerance`] if any check failed.
pub fn cmd_reproduce(
    preset: &str,
    out: &Path,
    opts: &PresetOptions,
) -> Result<Vec<PresetOutput>, HarnessError> {
    let names: Vec<&str> = if preset == "all" {
        PRESETS.to_vec()
    } else {
        vec![preset]
    };
    let mut outputs = Vec::new();
    for name in names {
        let o = run_preset(name, opts)?;
        o.write(out)?;
        outputs.push(o);
    }
    let total = outputs.iter().map(|o| o.checks.len()).sum();
    let failed = outputs
        .iter()
        .flat_map(|o| &o.checks)
        .filter(|c| !c.passed)
        .count();
    if failed > 0 {
        return Err(HarnessError::Tolerance { failed, total });
    }
    Ok(outputs)
}
