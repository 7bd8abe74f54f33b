//! Scenario configuration, read from TOML.

use std::fmt;
use std::path::Path;

use num_bigint::BigUint;
use num_rational::BigRational;
use rand::Rng;
use rand_distr::{Distribution, Weibull};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::consensus::params::ProtocolParams;
use crate::consensus::target::Target;

pub const DEFAULT_GENESIS_TIMESTAMP: u32 = 1_600_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum LatencyModel {
    Constant {
        #[serde(default)]
        mean: f64,
    },
    Weibull {
        mean: f64,
        #[serde(default = "default_shape")]
        shape: f64,
    },
}

fn default_shape() -> f64 {
    0.6
}

impl Default for LatencyModel {
    fn default() -> Self {
        LatencyModel::Constant { mean: 0.0 }
    }
}

impl LatencyModel {
    pub fn weibull(mean: f64) -> LatencyModel {
        LatencyModel::Weibull { mean, shape: 0.6 }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            LatencyModel::Constant { mean } | LatencyModel::Weibull { mean, .. } => mean,
        }
    }

    pub fn sampler(&self) -> LatencySampler {
        match *self {
            LatencyModel::Constant { mean } => LatencySampler::Constant(mean.max(0.0)),
            LatencyModel::Weibull { mean, shape } => {
                // mean = scale * Gamma(1 + 1/shape)
                let scale = mean / gamma(1.0 + 1.0 / shape);
                LatencySampler::Weibull(Weibull::new(scale, shape).expect("validated"))
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub enum LatencySampler {
    Constant(f64),
    Weibull(Weibull<f64>),
}

impl LatencySampler {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            LatencySampler::Constant(d) => *d,
            LatencySampler::Weibull(w) => w.sample(rng),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "strategy", rename_all = "kebab-case", deny_unknown_fields)]
pub enum StrategySpec {
    Honest,
    /// Withholds blocks following the two-rule release/adopt policy. Weak
    /// headers mined on withheld blocks are withheld too unless
    /// `withhold_weak` is false.
    Selfish {
        #[serde(default = "yes")]
        withhold_weak: bool,
    },
    /// Never broadcasts its own weak headers.
    Reclusive,
    /// Leaves out other miners' weak headers unless their combined PoW, in
    /// strong-block units, exceeds `include_threshold`. An infinite threshold
    /// (`inf` in TOML) never includes them.
    Spiteful {
        #[serde(default = "default_spite_threshold")]
        include_threshold: f64,
    },
    /// Stamps every header one second above the median time past.
    TimestampSlow,
    /// Stamps every header at the maximum accepted future drift.
    TimestampFast,
}

fn default_spite_threshold() -> f64 {
    1.0
}

fn yes() -> bool {
    true
}

impl StrategySpec {
    pub fn name(&self) -> &'static str {
        match self {
            StrategySpec::Honest => "honest",
            StrategySpec::Selfish { .. } => "selfish",
            StrategySpec::Reclusive => "reclusive",
            StrategySpec::Spiteful { .. } => "spiteful",
            StrategySpec::TimestampSlow => "timestamp-slow",
            StrategySpec::TimestampFast => "timestamp-fast",
        }
    }

    pub fn is_honest(&self) -> bool {
        matches!(self, StrategySpec::Honest)
    }

    pub fn selfish() -> StrategySpec {
        StrategySpec::Selfish {
            withhold_weak: true,
        }
    }

    pub fn is_timestamp_adversary(&self) -> bool {
        matches!(
            self,
            StrategySpec::TimestampSlow | StrategySpec::TimestampFast
        )
    }

    pub fn spiteful() -> StrategySpec {
        StrategySpec::Spiteful {
            include_threshold: default_spite_threshold(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinerConfig {
    pub alpha: f64,
    #[serde(flatten)]
    pub strategy: StrategySpec,
}

impl MinerConfig {
    pub fn honest(alpha: f64) -> MinerConfig {
        MinerConfig {
            alpha,
            strategy: StrategySpec::Honest,
        }
    }

    pub fn with(alpha: f64, strategy: StrategySpec) -> MinerConfig {
        MinerConfig { alpha, strategy }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    #[serde(default)]
    pub name: String,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Run length in strong blocks found (by anyone, stale or not).
    pub horizon_blocks: u64,
    /// `T_w / T_s`; 1 disables weak headers.
    pub ratio: u64,
    pub gamma: f64,
    #[serde(default = "default_reward")]
    pub block_reward: u64,
    #[serde(default = "default_interval")]
    pub target_block_interval: u32,
    #[serde(default = "default_window")]
    pub retarget_window: u32,
    #[serde(default = "default_drift")]
    pub max_future_drift: u32,
    #[serde(default = "default_median")]
    pub median_window: usize,
    #[serde(default = "default_genesis")]
    pub genesis_timestamp: u32,
    #[serde(default)]
    pub latency: LatencyModel,
    /// Keep one record per main-chain block in the metrics.
    #[serde(default)]
    pub record_blocks: bool,
    pub miners: Vec<MinerConfig>,
}

fn default_seed() -> u64 {
    1
}
fn default_reward() -> u64 {
    1_250_000_000
}
fn default_interval() -> u32 {
    600
}
fn default_window() -> u32 {
    2016
}
fn default_drift() -> u32 {
    7200
}
fn default_median() -> usize {
    11
}
fn default_genesis() -> u32 {
    DEFAULT_GENESIS_TIMESTAMP
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldError {
    pub field: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("cannot parse config: {0}")]
    Parse(String),
    #[error("invalid config: {}", display_fields(.0))]
    Invalid(Vec<FieldError>),
}

fn display_fields(errs: &[FieldError]) -> String {
    errs.iter()
        .map(|e| format!("{}: {}", e.field, e.message))
        .collect::<Vec<_>>()
        .join("; ")
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

impl SimConfig {
    /// Two-party scenario: miner 0 with share `alpha` and `strategy`, miner 1
    /// honest with the rest.
    pub fn two_party(alpha: f64, strategy: StrategySpec, ratio: u64, gamma: f64) -> SimConfig {
        SimConfig {
            name: String::new(),
            seed: default_seed(),
            horizon_blocks: 20_000,
            ratio,
            gamma,
            block_reward: default_reward(),
            target_block_interval: default_interval(),
            retarget_window: default_window(),
            max_future_drift: default_drift(),
            median_window: default_median(),
            genesis_timestamp: default_genesis(),
            latency: LatencyModel::default(),
            record_blocks: false,
            miners: vec![
                MinerConfig::with(alpha, strategy),
                MinerConfig::honest(1.0 - alpha),
            ],
        }
    }

    pub fn from_toml(text: &str) -> Result<SimConfig, ConfigError> {
        let cfg: SimConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<SimConfig, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        SimConfig::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let mut errs = Vec::new();
        let mut bad = |field: String, message: &str| {
            errs.push(FieldError {
                field,
                message: message.to_string(),
            })
        };
        if self.horizon_blocks == 0 {
            bad("horizon_blocks".into(), "must be at least 1");
        }
        if self.ratio == 0 {
            bad("ratio".into(), "must be at least 1");
        }
        if !(self.gamma.is_finite() && self.gamma >= 0.0) {
            bad("gamma".into(), "must be a nonnegative number");
        }
        if self.target_block_interval == 0 {
            bad("target_block_interval".into(), "must be positive");
        }
        if self.retarget_window == 0 {
            bad("retarget_window".into(), "must be at least 1");
        }
        if self.median_window == 0 {
            bad("median_window".into(), "must be at least 1");
        }
        match self.latency {
            LatencyModel::Constant { mean } if !(mean.is_finite() && mean >= 0.0) => {
                bad("latency.mean".into(), "must be a nonnegative number")
            }
            LatencyModel::Weibull { mean, shape } => {
                if !(mean.is_finite() && mean >= 0.0) {
                    bad("latency.mean".into(), "must be a nonnegative number");
                }
                if !(shape.is_finite() && shape > 0.0) {
                    bad("latency.shape".into(), "must be positive");
                }
            }
            _ => {}
        }
        if self.miners.is_empty() {
            bad("miners".into(), "at least one miner is required");
        }
        if self.miners.len() > u16::MAX as usize {
            bad("miners".into(), "too many miners");
        }
        let mut sum = 0.0;
        for (i, m) in self.miners.iter().enumerate() {
            if !(m.alpha.is_finite() && (0.0..=1.0).contains(&m.alpha)) {
                bad(format!("miners[{i}].alpha"), "must lie in [0, 1]");
            }
            sum += m.alpha;
            if let StrategySpec::Spiteful {
                include_threshold: t,
            } = m.strategy
            {
                if t.is_nan() || t < 0.0 {
                    bad(
                        format!("miners[{i}].include_threshold"),
                        "must be a nonnegative number",
                    );
                }
            }
        }
        if (sum - 1.0).abs() > 1e-9 {
            bad("miners".into(), "alpha shares must sum to 1");
        }
        if self
            .miners
            .iter()
            .filter(|m| matches!(m.strategy, StrategySpec::Selfish { .. }))
            .count()
            > 1
        {
            bad("miners".into(), "at most one selfish miner is supported");
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(ConfigError::Invalid(errs))
        }
    }

    /// Protocol parameters matching this scenario, used for reward amounts.
    pub fn protocol_params(&self) -> ProtocolParams {
        let strong = Target::new(BigUint::from(0xffffu32) << 192u32);
        let gamma = BigRational::from_float(self.gamma).unwrap_or_default();
        let mut p = ProtocolParams::with_ratio(Target::pow2(256), strong, self.ratio, gamma);
        p.block_reward = self.block_reward;
        p.target_block_interval = self.target_block_interval;
        p.retarget_window = self.retarget_window;
        p.max_future_drift = self.max_future_drift;
        p.median_window = self.median_window;
        p
    }
}
