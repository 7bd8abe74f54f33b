//! Block tree with aggregated-PoW fork choice.
//!
//! The score of a block is its cumulative PoW plus the PoW of weak headers
//! that point to it and are not yet included in any known child. The best tip
//! is the block with the highest score; among equal scores the one received
//! first wins.

use std::collections::{HashMap, HashSet};

use num_rational::BigRational;
use num_traits::Zero;
use thiserror::Error;

use super::block::Block;
use super::hash::Hash256;
use super::header::{Address, BlockHeader};
use super::params::ProtocolParams;
use super::retarget::WindowState;
use super::validate::{validate_block_with_parent_hash, RejectReason, TimeWindow, WeakViolation};
use super::work::{block_pow, classify_hash, HashClass};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChainError {
    #[error("parent {0} is unknown")]
    UnknownParent(Hash256),
    #[error("already known")]
    Duplicate,
    #[error("invalid: {0}")]
    Invalid(#[from] RejectReason),
}

#[derive(Debug, Clone)]
pub struct ChainEntry {
    pub block: Block,
    pub hash: Hash256,
    pub height: u64,
    pub cumulative_pow: BigRational,
    pub window: WindowState,
    /// Arrival order; lower is earlier.
    pub seq: u64,
    child_window: WindowState,
    child_weak_pow: BigRational,
}

impl ChainEntry {
    pub fn parent(&self) -> &Hash256 {
        &self.block.header.prev_hash
    }
}

#[derive(Debug, Clone)]
pub struct ChainState {
    base: ProtocolParams,
    blocks: HashMap<Hash256, ChainEntry>,
    /// Weak headers per parent block, seen but not included in a known child.
    pending_weak: HashMap<Hash256, HashMap<Hash256, BlockHeader>>,
    /// Weak headers per parent block already included by some known child.
    included_weak: HashMap<Hash256, HashSet<Hash256>>,
    genesis: Hash256,
    best_tip: Hash256,
    best_score: BigRational,
    next_seq: u64,
}

/// Fixed genesis header: zero `prev_hash`, configured targets and timestamp.
pub fn genesis_header(params: &ProtocolParams, timestamp: u32) -> BlockHeader {
    let block = genesis_block(params, timestamp);
    block.header
}

pub fn genesis_block(params: &ProtocolParams, timestamp: u32) -> Block {
    let template = BlockHeader {
        version: params.version,
        prev_hash: Hash256::ZERO,
        tx_root: Hash256::ZERO,
        timestamp,
        target_bits: params.strong_target.to_compact(),
        nonce: 0,
        coinbase: Address::default(),
    };
    Block::assemble(template, Vec::new(), Vec::new())
}

impl ChainState {
    pub fn new(params: ProtocolParams, genesis_timestamp: u32) -> ChainState {
        let block = genesis_block(&params, genesis_timestamp);
        let hash = block.hash();
        let window = WindowState::genesis(genesis_timestamp, &params);
        let child_window = window.child(&params);
        let child_weak_pow = child_window.params(&params).weak_pow();
        let entry = ChainEntry {
            block,
            hash,
            height: 0,
            cumulative_pow: BigRational::zero(),
            window,
            seq: 0,
            child_window,
            child_weak_pow,
        };
        let mut blocks = HashMap::new();
        blocks.insert(hash, entry);
        ChainState {
            base: params,
            blocks,
            pending_weak: HashMap::new(),
            included_weak: HashMap::new(),
            genesis: hash,
            best_tip: hash,
            best_score: BigRational::zero(),
            next_seq: 1,
        }
    }

    pub fn params(&self) -> &ProtocolParams {
        &self.base
    }

    pub fn genesis(&self) -> Hash256 {
        self.genesis
    }

    pub fn best_tip(&self) -> Hash256 {
        self.best_tip
    }

    pub fn get(&self, hash: &Hash256) -> Option<&ChainEntry> {
        self.blocks.get(hash)
    }

    pub fn contains(&self, hash: &Hash256) -> bool {
        self.blocks.contains_key(hash)
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = &ChainEntry> {
        self.blocks.values()
    }

    /// Parameters in force for a child of `parent`.
    pub fn child_params(&self, parent: &Hash256) -> Option<ProtocolParams> {
        self.blocks
            .get(parent)
            .map(|e| e.child_window.params(&self.base))
    }

    /// Weak headers pointing at `parent` that no known child includes, in
    /// no particular order.
    pub fn pending_weak(&self, parent: &Hash256) -> Vec<BlockHeader> {
        self.pending_weak
            .get(parent)
            .map(|m| m.values().copied().collect())
            .unwrap_or_default()
    }

    pub fn pending_count(&self, parent: &Hash256) -> usize {
        self.pending_weak.get(parent).map_or(0, HashMap::len)
    }

    /// Timestamps of the last `median_window` blocks ending at `tip`, oldest
    /// first.
    pub fn recent_timestamps(&self, tip: &Hash256) -> Vec<u32> {
        let mut out = Vec::with_capacity(self.base.median_window);
        let mut cur = self.blocks.get(tip);
        while let Some(e) = cur {
            if out.len() == self.base.median_window {
                break;
            }
            out.push(e.block.header.timestamp);
            cur = if e.height == 0 {
                None
            } else {
                self.blocks.get(e.parent())
            };
        }
        out.reverse();
        out
    }

    /// Score used by fork choice.
    pub fn score(&self, hash: &Hash256) -> Option<BigRational> {
        let e = self.blocks.get(hash)?;
        let pending = self.pending_count(hash);
        Some(&e.cumulative_pow + &e.child_weak_pow * BigRational::from_integer(pending.into()))
    }

    pub fn submit_block(&mut self, block: Block, now: u64) -> Result<bool, ChainError> {
        let hash = block.hash();
        if self.blocks.contains_key(&hash) {
            return Err(ChainError::Duplicate);
        }
        let parent_hash = block.header.prev_hash;
        let parent = self
            .blocks
            .get(&parent_hash)
            .ok_or(ChainError::UnknownParent(parent_hash))?;
        let params = parent.child_window.params(&self.base);
        let recent = self.recent_timestamps(&parent_hash);
        validate_block_with_parent_hash(&block, &parent_hash, &params, now, &recent)?;

        let window = parent.window.advance(&self.base, block.header.timestamp);
        let cumulative_pow = &parent.cumulative_pow + block_pow(&block, &params);
        let height = parent.height + 1;
        let child_window = window.child(&self.base);
        let child_weak_pow = child_window.params(&self.base).weak_pow();

        let included = self.included_weak.entry(parent_hash).or_default();
        let pending = self.pending_weak.entry(parent_hash).or_default();
        let before = pending.len();
        for w in block.decompressed_weak() {
            let h = w.hash();
            included.insert(h);
            pending.remove(&h);
        }
        let parent_score_dropped = pending.len() < before;

        let seq = self.next_seq;
        self.next_seq += 1;
        self.blocks.insert(
            hash,
            ChainEntry {
                block,
                hash,
                height,
                cumulative_pow,
                window,
                seq,
                child_window,
                child_weak_pow,
            },
        );

        let old_best = self.best_tip;
        if parent_score_dropped && parent_hash == old_best {
            self.rescan();
        } else {
            self.consider(&hash);
        }
        Ok(self.best_tip != old_best)
    }

    /// Records a weak header heard on the network. Returns `Ok(true)` when it
    /// was added to the pending set and `Ok(false)` when it was already known
    /// or already included in a child of its parent.
    pub fn submit_weak_header(
        &mut self,
        header: BlockHeader,
        now: u64,
    ) -> Result<bool, ChainError> {
        let parent_hash = header.prev_hash;
        let parent = self
            .blocks
            .get(&parent_hash)
            .ok_or(ChainError::UnknownParent(parent_hash))?;
        let params = parent.child_window.params(&self.base);
        let h = header.hash();
        let violation =
            |kind| ChainError::Invalid(RejectReason::WeakHeaderViolation { index: 0, kind });
        if classify_hash(&h, &params) != HashClass::Weak {
            return Err(violation(WeakViolation::OutsideBand));
        }
        if header.target_bits != params.strong_target.to_compact() {
            return Err(ChainError::Invalid(RejectReason::BadTarget));
        }
        if header.version != params.version {
            return Err(ChainError::Invalid(RejectReason::BadVersion));
        }
        let time = TimeWindow::new(&params, now, &self.recent_timestamps(&parent_hash));
        if !time.accepts(header.timestamp) {
            return Err(violation(WeakViolation::BadTimestamp));
        }
        if self
            .included_weak
            .get(&parent_hash)
            .is_some_and(|s| s.contains(&h))
        {
            return Ok(false);
        }
        let pending = self.pending_weak.entry(parent_hash).or_default();
        if pending.insert(h, header).is_some() {
            return Ok(false);
        }
        self.consider(&parent_hash);
        Ok(true)
    }

    fn consider(&mut self, hash: &Hash256) {
        let score = self.score(hash).expect("known block");
        let seq = self.blocks[hash].seq;
        let best_seq = self.blocks[&self.best_tip].seq;
        if score > self.best_score || (score == self.best_score && seq < best_seq) {
            self.best_tip = *hash;
            self.best_score = score;
        }
    }

    fn rescan(&mut self) {
        self.best_tip = fork_choice(self);
        self.best_score = self.score(&self.best_tip).expect("known block");
    }

    /// Hashes from genesis to `tip` inclusive.
    pub fn chain_to(&self, tip: &Hash256) -> Vec<Hash256> {
        let mut out = Vec::new();
        let mut cur = self.blocks.get(tip);
        while let Some(e) = cur {
            out.push(e.hash);
            cur = if e.height == 0 {
                None
            } else {
                self.blocks.get(e.parent())
            };
        }
        out.reverse();
        out
    }

    pub fn main_chain(&self) -> Vec<Hash256> {
        self.chain_to(&self.best_tip)
    }

    /// Whether `ancestor` lies on the chain ending at `tip`.
    pub fn is_ancestor(&self, ancestor: &Hash256, tip: &Hash256) -> bool {
        let Some(a) = self.blocks.get(ancestor) else {
            return false;
        };
        let mut cur = self.blocks.get(tip);
        while let Some(e) = cur {
            if e.height < a.height {
                return false;
            }
            if e.hash == *ancestor {
                return true;
            }
            cur = self.blocks.get(e.parent());
        }
        false
    }
}

/// Full scan: the block with the highest score, earliest arrival on ties.
pub fn fork_choice(state: &ChainState) -> Hash256 {
    let mut best: Option<(BigRational, u64, Hash256)> = None;
    for e in state.entries() {
        let score = state.score(&e.hash).expect("known block");
        let better = match &best {
            None => true,
            Some((s, seq, _)) => score > *s || (score == *s && e.seq < *seq),
        };
        if better {
            best = Some((score, e.seq, e.hash));
        }
    }
    best.map(|(_, _, h)| h).unwrap_or(state.genesis)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::consensus::header::CompressedWeakHeader;
    use crate::consensus::params::rational_from_u64;

    fn params() -> ProtocolParams {
        ProtocolParams::toy(3, 4, 1)
    }

    fn weak_for(
        state: &ChainState,
        parent: Hash256,
        ts: u32,
        tag: u32,
        n: usize,
    ) -> Vec<BlockHeader> {
        let p = state.child_params(&parent).unwrap();
        let tmpl = BlockHeader {
            version: p.version,
            prev_hash: parent,
            tx_root: Hash256::digest(&tag.to_le_bytes()),
            timestamp: ts,
            target_bits: p.strong_target.to_compact(),
            nonce: 0,
            coinbase: Address::from_id(tag),
        };
        let mut out = Vec::new();
        let mut nonce = 0;
        while out.len() < n {
            let h = BlockHeader { nonce, ..tmpl };
            if classify_hash(&h.hash(), &p) == HashClass::Weak {
                out.push(h);
            }
            nonce += 1;
        }
        out
    }

    fn mine(
        state: &ChainState,
        parent: Hash256,
        ts: u32,
        tag: u32,
        weak: Vec<CompressedWeakHeader>,
    ) -> Block {
        let p = state.child_params(&parent).unwrap();
        let tmpl = BlockHeader {
            version: p.version,
            prev_hash: parent,
            tx_root: Hash256::ZERO,
            timestamp: ts,
            target_bits: p.strong_target.to_compact(),
            nonce: 0,
            coinbase: Address::from_id(tag),
        };
        let mut b = Block::assemble(tmpl, weak, vec![]);
        while !p.strong_target.is_met_by(&b.hash()) {
            b.header.nonce += 1;
        }
        b
    }

    #[test]
    fn single_chain_tip() {
        let mut s = ChainState::new(params(), 0);
        let mut tip = s.genesis();
        for i in 1..=5 {
            let b = mine(&s, tip, i * 600, i, vec![]);
            tip = b.hash();
            assert!(s.submit_block(b, 10_000).unwrap());
        }
        assert_eq!(s.best_tip(), tip);
        assert_eq!(s.main_chain().len(), 6);
        assert_eq!(s.score(&tip).unwrap(), rational_from_u64(5 * 8));
    }

    #[test]
    fn pending_weak_headers_decide_fork() {
        // Shared parent P. B includes 5 weak headers and has 2 pending on top;
        // B' includes 6 and has none.
        let mut s = ChainState::new(params(), 0);
        let g = s.genesis();
        let ws = weak_for(&s, g, 100, 7, 6);
        let compressed: Vec<_> = ws.iter().map(|h| h.compress()).collect();
        let b = mine(&s, g, 600, 1, compressed[..5].to_vec());
        let b2 = mine(&s, g, 601, 2, compressed.clone());
        s.submit_block(b2.clone(), 10_000).unwrap();
        s.submit_block(b.clone(), 10_000).unwrap();
        assert_eq!(s.best_tip(), b2.hash());
        for w in weak_for(&s, b.hash(), 700, 9, 2) {
            assert!(s.submit_weak_header(w, 10_000).unwrap());
        }
        assert_eq!(s.best_tip(), b.hash());
        assert_eq!(fork_choice(&s), b.hash());
    }

    #[test]
    fn tie_keeps_first_seen() {
        let mut s = ChainState::new(params(), 0);
        let g = s.genesis();
        let a = mine(&s, g, 600, 1, vec![]);
        let b = mine(&s, g, 600, 2, vec![]);
        assert!(s.submit_block(a.clone(), 10_000).unwrap());
        assert!(!s.submit_block(b.clone(), 10_000).unwrap());
        assert_eq!(s.best_tip(), a.hash());
        assert_eq!(fork_choice(&s), a.hash());
    }

    #[test]
    fn included_weak_headers_leave_pending() {
        let mut s = ChainState::new(params(), 0);
        let g = s.genesis();
        let ws = weak_for(&s, g, 100, 3, 3);
        for w in &ws {
            s.submit_weak_header(*w, 10_000).unwrap();
        }
        assert_eq!(s.pending_count(&g), 3);
        let b = mine(
            &s,
            g,
            600,
            1,
            ws[..2].iter().map(|h| h.compress()).collect(),
        );
        s.submit_block(b.clone(), 10_000).unwrap();
        assert_eq!(s.pending_count(&g), 1);
        assert_eq!(s.submit_weak_header(ws[0], 10_000), Ok(false));
        // 8 + 2*2 for B against 0 + 1*2 for genesis.
        assert_eq!(s.best_tip(), b.hash());
        assert_eq!(
            s.get(&b.hash()).unwrap().cumulative_pow,
            rational_from_u64(12)
        );
    }

    #[test]
    fn rejects_unknown_parent_and_duplicates() {
        let mut s = ChainState::new(params(), 0);
        let g = s.genesis();
        let b = mine(&s, g, 600, 1, vec![]);
        s.submit_block(b.clone(), 10_000).unwrap();
        assert_eq!(
            s.submit_block(b.clone(), 10_000),
            Err(ChainError::Duplicate)
        );
        let mut orphan = b.clone();
        orphan.header.prev_hash = Hash256::digest(b"nowhere");
        assert!(matches!(
            s.submit_block(orphan, 10_000),
            Err(ChainError::UnknownParent(_))
        ));
    }
}
