use std::io::Write;

use num_traits::ToPrimitive;

use super::HarnessError;
use crate::consensus::chain::ChainState;
use crate::consensus::hash::Hash256;
use crate::consensus::header::Address;
use crate::consensus::params::ProtocolParams;
use crate::consensus::reward::{compute_block_rewards, exact_minted};
use crate::consensus::timestamp::effective_timestamp;
use crate::mining::grind::{mine_on_tip, GrindOutcome};

#[derive(Debug, Clone, PartialEq)]
pub struct DemoOptions {
    /// Leading zero bits required of a strong header.
    pub difficulty_bits: u32,
    pub blocks: u32,
    pub ratio: u64,
    pub gamma: u64,
    pub nonce_budget: u64,
    pub block_interval: u32,
}

impl Default for DemoOptions {
    fn default() -> Self {
        DemoOptions {
            difficulty_bits: 12,
            blocks: 3,
            ratio: 8,
            gamma: 3,
            nonce_budget: 1 << 26,
            block_interval: 600,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DemoBlock {
    pub height: u32,
    pub hash: Hash256,
    pub n_weak: usize,
    pub minted: u64,
    /// Exact `c*R*(1 + gamma*n/ratio)` in atomic units.
    pub exact_minted: f64,
    pub effective_timestamp: f64,
}

/// Grinds `blocks` blocks with real hashing on a single-miner chain,
/// submitting each to a full [`ChainState`] (which validates it), and
/// prints one line per block to `out`.
pub fn cmd_demo_mine(
    opts: &DemoOptions,
    out: &mut dyn Write,
) -> Result<Vec<DemoBlock>, HarnessError> {
    if opts.difficulty_bits == 0 || opts.difficulty_bits > 64 || opts.ratio == 0 {
        return Err(HarnessError::Usage(
            "difficulty bits must be in 1..=64 and ratio at least 1".into(),
        ));
    }
    if opts.ratio > 1u64 << opts.difficulty_bits.min(63) {
        return Err(HarnessError::Usage(
            "ratio too large for the difficulty".into(),
        ));
    }
    let params = ProtocolParams::toy(opts.difficulty_bits, opts.ratio, opts.gamma);
    let mut state = ChainState::new(params, 0);
    let coinbase = Address::from_id(1);
    let mut mined = Vec::new();
    for height in 1..=opts.blocks {
        let ts = height * opts.block_interval;
        let parent = state.best_tip();
        let p = state.child_params(&parent).expect("tip is known");
        let block = match mine_on_tip(&state, coinbase, ts, opts.nonce_budget) {
            GrindOutcome::Strong(b) => b,
            _ => return Err(HarnessError::BudgetExhausted { height }),
        };
        let minted: u64 = compute_block_rewards(&block, 0, &p)
            .iter()
            .map(|x| x.amount)
            .sum();
        let exact = exact_minted(block.weak_headers.len() as u64, &p)
            .to_f64()
            .unwrap_or(f64::NAN);
        let d = DemoBlock {
            height,
            hash: block.hash(),
            n_weak: block.weak_headers.len(),
            minted,
            exact_minted: exact,
            effective_timestamp: effective_timestamp(&block, &p),
        };
        state
            .submit_block(block, ts as u64)
            .map_err(|e| HarnessError::Rejected(format!("{e:?}")))?;
        let _ = writeln!(
            out,
            "height {} hash {} weak {} minted {} effective_ts {:.2}",
            d.height, d.hash, d.n_weak, d.minted, d.effective_timestamp
        );
        mined.push(d);
    }
    if !mined.is_empty() {
        let total: u64 = mined.iter().map(|d| d.minted).sum();
        let exact: f64 = mined.iter().map(|d| d.exact_minted).sum();
        let _ = writeln!(out, "total minted {total} (exact {exact:.2})");
    }
    Ok(mined)
}
