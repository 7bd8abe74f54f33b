//! Protocol rules: data model, serialization, validation, fork choice,
//! rewards and timestamps.

pub mod block;
pub mod chain;
pub mod hash;
pub mod header;
pub mod merkle;
pub mod params;
pub mod retarget;
pub mod reward;
pub mod spv;
pub mod target;
pub mod timestamp;
pub mod validate;
pub mod work;

pub use block::{binding_commitment, binding_transaction, commitment_digest, BindingError, Block};
pub use chain::{fork_choice, genesis_block, genesis_header, ChainError, ChainState};
pub use hash::Hash256;
pub use header::{Address, BlockHeader, CompressedWeakHeader, DecodeError};
pub use merkle::MerkleProof;
pub use params::{ParamsError, ProtocolParams, ATOMIC_PER_UNIT};
pub use retarget::{retarget, RetargetError, WindowState};
pub use reward::{compute_block_rewards, Payout, RewardKind, RewardLedger, RewardSchedule};
pub use spv::{spv_verify_update, SpvClient, SpvUpdate};
pub use target::Target;
pub use timestamp::{effective_timestamp, median_time};
pub use validate::{validate_block, RejectReason, WeakViolation};
pub use work::{block_pow, chain_pow, classify_hash, HashClass};
