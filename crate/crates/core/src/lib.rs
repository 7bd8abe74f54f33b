//! Weak-header-aware proof-of-work consensus.

pub mod analytics;
pub mod consensus;
pub mod harness;
pub mod mining;
pub mod sim;
