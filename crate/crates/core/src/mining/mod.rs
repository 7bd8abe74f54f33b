//! Block production: toy-difficulty grinding and the stochastic oracle used
//! by the simulator.

pub mod grind;
pub mod oracle;
pub mod rng;

pub use grind::{block_template, grind_block, mine_on_tip, GrindOutcome, GrindStep, Grinder};
pub use oracle::{
    calibrated_hash_rate, hit_probability, next_event, EventKind, MinerIdentity, MiningEvent,
    MiningOracle, OracleError,
};
pub use rng::{channel_rng, miner_rng, stream_rng};
