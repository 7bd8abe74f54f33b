//! Run results and their CSV form.

use std::io::Write;

use serde::{Deserialize, Serialize};

/// Streaming mean and variance.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub n: u64,
    pub sum: f64,
    pub sum_sq: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    pub fn mean(&self) -> f64 {
        if self.n == 0 {
            return f64::NAN;
        }
        self.sum / self.n as f64
    }

    /// Sample variance (n - 1 denominator).
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            return f64::NAN;
        }
        let n = self.n as f64;
        ((self.sum_sq - self.sum * self.sum / n) / (n - 1.0)).max(0.0)
    }

    pub fn cov(&self) -> f64 {
        self.variance().sqrt() / self.mean()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinerMetrics {
    pub alpha: f64,
    pub strategy: String,
    pub strong_found: u64,
    pub strong_in_main: u64,
    pub weak_found: u64,
    pub weak_in_main: u64,
    /// Main-chain rewards in atomic units.
    pub reward: u64,
    pub reward_share: f64,
    /// `reward_share / alpha`.
    pub fairness: f64,
    /// Reward per target block interval of simulated time, in currency units.
    pub reward_rate: f64,
    /// Per-block reward of this miner over the main chain, in currency units.
    pub per_block_reward: Moments,
}

impl MinerMetrics {
    pub fn strong_stale_rate(&self) -> f64 {
        ratio_or_nan(self.strong_found - self.strong_in_main, self.strong_found)
    }

    pub fn reward_cov(&self) -> f64 {
        self.per_block_reward.cov()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct TimestampStats {
    pub blocks: u64,
    /// Mean of `strong timestamp - true time` in seconds.
    pub strong_dev: f64,
    /// Mean of `effective timestamp - true time` in seconds.
    pub effective_dev: f64,
    pub strong_abs_dev: f64,
    pub effective_abs_dev: f64,
}

impl TimestampStats {
    /// How much closer to true time the effective timestamp is, on average.
    pub fn reduction(&self) -> f64 {
        self.strong_abs_dev - self.effective_abs_dev
    }
}

#[derive(Debug, Clone, Default)]
pub(crate) struct TimestampAcc {
    n: u64,
    strong: f64,
    eff: f64,
    strong_abs: f64,
    eff_abs: f64,
}

impl TimestampAcc {
    pub(crate) fn push(&mut self, strong_dev: f64, eff_dev: f64) {
        self.n += 1;
        self.strong += strong_dev;
        self.eff += eff_dev;
        self.strong_abs += strong_dev.abs();
        self.eff_abs += eff_dev.abs();
    }

    pub(crate) fn finish(&self) -> TimestampStats {
        let n = self.n.max(1) as f64;
        TimestampStats {
            blocks: self.n,
            strong_dev: self.strong / n,
            effective_dev: self.eff / n,
            strong_abs_dev: self.strong_abs / n,
            effective_abs_dev: self.eff_abs / n,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockRecord {
    pub height: u32,
    pub finder: usize,
    pub n_weak: u32,
    pub timestamp: u32,
    pub effective_timestamp: f64,
    /// Simulated time the strong header was found, on the timestamp scale.
    pub true_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub scenario: String,
    pub seed: u64,
    pub ratio: u64,
    pub gamma: f64,
    pub latency_mean: f64,
    pub strong_found: u64,
    pub main_chain_blocks: u64,
    pub weak_found: u64,
    pub weak_in_main: u64,
    /// Weak headers on the final tip, not yet includable by anyone.
    pub weak_pending_at_horizon: u64,
    pub strong_stale_rate: f64,
    /// `None` when no weak header was found.
    pub weak_stale_rate: Option<f64>,
    pub elapsed: f64,
    pub miners: Vec<MinerMetrics>,
    /// Main-chain blocks found by timestamp adversaries.
    pub adversarial_timestamps: TimestampStats,
    /// All main-chain blocks.
    pub all_timestamps: TimestampStats,
    pub invalid_messages: u64,
    pub stale_weak_ignored: u64,
    pub records: Vec<BlockRecord>,
}

pub(crate) fn ratio_or_nan(num: u64, den: u64) -> f64 {
    if den == 0 {
        f64::NAN
    } else {
        num as f64 / den as f64
    }
}

/// Column order of [`write_csv`].
pub const CSV_COLUMNS: [&str; 22] = [
    "scenario",
    "seed",
    "ratio",
    "gamma",
    "latency_mean",
    "alpha",
    "strategy",
    "strong_found",
    "main_chain_blocks",
    "strong_stale_rate",
    "weak_found",
    "weak_stale_rate",
    "reward_share",
    "fairness",
    "reward_cov",
    "reward_rate",
    "own_strong_stale_rate",
    "honest_reward_rate",
    "ts_blocks",
    "ts_strong_dev",
    "ts_effective_dev",
    "ts_reduction",
];

impl RunMetrics {
    /// Miner 0 is the subject of a scenario (the adversary or the small
    /// miner); the CSV reports it next to the global rates.
    pub fn subject(&self) -> &MinerMetrics {
        &self.miners[0]
    }

    fn csv_row(&self) -> Vec<String> {
        let s = self.subject();
        let honest_rate: f64 = self.miners.iter().skip(1).map(|m| m.reward_rate).sum();
        let f = |x: f64| {
            if x.is_nan() {
                String::new()
            } else {
                format!("{x}")
            }
        };
        let ts = &self.adversarial_timestamps;
        vec![
            self.scenario.clone(),
            self.seed.to_string(),
            self.ratio.to_string(),
            f(self.gamma),
            f(self.latency_mean),
            f(s.alpha),
            s.strategy.clone(),
            self.strong_found.to_string(),
            self.main_chain_blocks.to_string(),
            f(self.strong_stale_rate),
            self.weak_found.to_string(),
            self.weak_stale_rate.map(f).unwrap_or_default(),
            f(s.reward_share),
            f(s.fairness),
            f(s.reward_cov()),
            f(s.reward_rate),
            f(s.strong_stale_rate()),
            f(honest_rate),
            ts.blocks.to_string(),
            f(ts.strong_dev),
            f(ts.effective_dev),
            f(ts.reduction()),
        ]
    }
}

pub fn write_csv<W: Write>(out: W, runs: &[RunMetrics]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_COLUMNS)?;
    for r in runs {
        w.write_record(r.csv_row())?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_block_records<W: Write>(out: W, records: &[BlockRecord]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
