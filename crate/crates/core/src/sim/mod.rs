//! Discrete-event simulation of miners exchanging blocks and weak headers.

pub mod config;
pub mod engine;
pub mod metrics;

pub use config::{ConfigError, FieldError, LatencyModel, MinerConfig, SimConfig, StrategySpec};
pub use engine::run_scenario;
pub use metrics::{write_csv, MinerMetrics, Moments, RunMetrics, TimestampStats};
