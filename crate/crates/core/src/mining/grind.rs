//! Real hash grinding at toy difficulty.

use crate::consensus::block::Block;
use crate::consensus::chain::ChainState;
use crate::consensus::hash::Hash256;
use crate::consensus::header::{Address, BlockHeader, CompressedWeakHeader};
use crate::consensus::params::ProtocolParams;
use crate::consensus::work::{classify_hash, HashClass};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GrindStep {
    Strong(Block),
    /// A weak header found by this grinder, already appended to the block.
    Weak(BlockHeader),
    Miss,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GrindOutcome {
    /// First strong hit. The block carries every weak header found on the way.
    Strong(Block),
    /// Budget spent; the weak headers found so far.
    WeakHeaders(Vec<BlockHeader>),
    Exhausted,
}

/// Iterates the nonce of a block template. Each weak hit is appended to the
/// block's weak set and the binding transaction and `tx_root` are rebuilt
/// before the next trial. On nonce overflow the timestamp is bumped.
#[derive(Debug, Clone)]
pub struct Grinder {
    params: ProtocolParams,
    block: Block,
    other_txs: Vec<Vec<u8>>,
    found: Vec<BlockHeader>,
}

impl Grinder {
    pub fn new(
        template: BlockHeader,
        weak: Vec<CompressedWeakHeader>,
        other_txs: Vec<Vec<u8>>,
        params: ProtocolParams,
    ) -> Grinder {
        let block = Block::assemble(template, weak, other_txs.clone());
        Grinder {
            params,
            block,
            other_txs,
            found: Vec::new(),
        }
    }

    pub fn block(&self) -> &Block {
        &self.block
    }

    /// Weak headers found by this grinder.
    pub fn found(&self) -> &[BlockHeader] {
        &self.found
    }

    /// Adds a weak header heard from another miner.
    pub fn include(&mut self, weak: CompressedWeakHeader) {
        let mut list = std::mem::take(&mut self.block.weak_headers);
        list.push(weak);
        self.rebuild(list);
    }

    fn rebuild(&mut self, weak: Vec<CompressedWeakHeader>) {
        let header = self.block.header;
        self.block = Block::assemble(header, weak, self.other_txs.clone());
    }

    /// Tries the current nonce, then advances it.
    pub fn step(&mut self) -> GrindStep {
        let header = self.block.header;
        let class = classify_hash(&header.hash(), &self.params);
        let out = match class {
            HashClass::Strong => GrindStep::Strong(self.block.clone()),
            HashClass::Weak => {
                self.found.push(header);
                let mut list = std::mem::take(&mut self.block.weak_headers);
                list.push(header.compress());
                self.rebuild(list);
                GrindStep::Weak(header)
            }
            HashClass::None => GrindStep::Miss,
        };
        self.advance();
        out
    }

    fn advance(&mut self) {
        let h = &mut self.block.header;
        match h.nonce.checked_add(1) {
            Some(n) => h.nonce = n,
            None => {
                h.nonce = 0;
                h.timestamp = h.timestamp.wrapping_add(1);
            }
        }
    }
}

pub fn grind_block(
    template: BlockHeader,
    weak: Vec<CompressedWeakHeader>,
    other_txs: Vec<Vec<u8>>,
    params: &ProtocolParams,
    nonce_budget: u64,
) -> GrindOutcome {
    let mut g = Grinder::new(template, weak, other_txs, params.clone());
    for _ in 0..nonce_budget {
        if let GrindStep::Strong(b) = g.step() {
            return GrindOutcome::Strong(b);
        }
    }
    if g.found.is_empty() {
        GrindOutcome::Exhausted
    } else {
        GrindOutcome::WeakHeaders(g.found)
    }
}

/// Header template for a child of `parent` in `state`, with the targets of
/// the child's window. `tx_root` and `nonce` are left zero.
pub fn block_template(
    state: &ChainState,
    parent: &Hash256,
    coinbase: Address,
    timestamp: u32,
) -> Option<(BlockHeader, ProtocolParams)> {
    let params = state.child_params(parent)?;
    let header = BlockHeader {
        version: params.version,
        prev_hash: *parent,
        tx_root: Hash256::ZERO,
        timestamp,
        target_bits: params.strong_target.to_compact(),
        nonce: 0,
        coinbase,
    };
    Some((header, params))
}

/// Grinds a block on the current best tip, including every pending weak
/// header the state knows of for that tip.
pub fn mine_on_tip(
    state: &ChainState,
    coinbase: Address,
    timestamp: u32,
    nonce_budget: u64,
) -> GrindOutcome {
    let tip = state.best_tip();
    let (template, params) =
        block_template(state, &tip, coinbase, timestamp).expect("tip is known");
    let mut pending = state.pending_weak(&tip);
    pending.sort_by_key(|h| (h.timestamp, h.hash()));
    let weak = pending.iter().map(BlockHeader::compress).collect();
    grind_block(template, weak, Vec::new(), &params, nonce_budget)
}
