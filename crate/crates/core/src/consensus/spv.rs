//! Light-client updates. A client receives the strong header, the compressed
//! weak headers and a Merkle proof for the binding transaction; after
//! verification it keeps only the header and the block's aggregated PoW.

use std::collections::HashMap;

use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::block::{binding_transaction, commitment_digest, Block};
use super::hash::Hash256;
use super::header::{BlockHeader, CompressedWeakHeader};
use super::merkle::{txid, MerkleProof};
use super::params::ProtocolParams;
use super::retarget::WindowState;
use super::validate::{check_strong_header, check_weak_headers, RejectReason, TimeWindow};
use super::work::pow_with_weak_count;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpvUpdate {
    pub strong: BlockHeader,
    pub weak: Vec<CompressedWeakHeader>,
    pub binding_proof: MerkleProof,
}

impl SpvUpdate {
    pub fn from_block(b: &Block) -> SpvUpdate {
        SpvUpdate {
            strong: b.header,
            weak: b.weak_headers.clone(),
            binding_proof: b.binding_proof(),
        }
    }
}

/// Verifies an update against its already accepted parent and returns the
/// block's aggregated PoW. Checks run in the same order as full validation,
/// with the Merkle proof standing in for the transaction list.
pub fn spv_verify_update(
    strong: &BlockHeader,
    weak: &[CompressedWeakHeader],
    bt_proof: &MerkleProof,
    parent_hash: &Hash256,
    params: &ProtocolParams,
    now: u64,
    recent_timestamps: &[u32],
) -> Result<BigRational, RejectReason> {
    let time = TimeWindow::new(params, now, recent_timestamps);
    check_strong_header(strong, parent_hash, params, &time)?;
    if bt_proof.leaf_index != 0 {
        return Err(RejectReason::ProofPathInvalid);
    }
    let leaf = txid(&binding_transaction(&commitment_digest(weak, strong)));
    if !bt_proof.verify(&leaf, &strong.tx_root) {
        return Err(RejectReason::BindingMismatch);
    }
    check_weak_headers(strong, weak, params, &time)?;
    Ok(pow_with_weak_count(weak.len(), params))
}

#[derive(Debug, Clone)]
struct SpvEntry {
    header: BlockHeader,
    block_pow: BigRational,
    cumulative_pow: BigRational,
    window: WindowState,
    height: u64,
}

/// Header-only chain keeping `(header, block_pow)` per block.
#[derive(Debug, Clone)]
pub struct SpvClient {
    base: ProtocolParams,
    headers: HashMap<Hash256, SpvEntry>,
    best_tip: Hash256,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SpvError {
    #[error("parent {0} is unknown")]
    UnknownParent(Hash256),
    #[error("rejected: {0}")]
    Rejected(#[from] RejectReason),
}

impl SpvClient {
    pub fn new(params: ProtocolParams, genesis: BlockHeader) -> SpvClient {
        let hash = genesis.hash();
        let window = WindowState::genesis(genesis.timestamp, &params);
        let mut headers = HashMap::new();
        headers.insert(
            hash,
            SpvEntry {
                header: genesis,
                block_pow: BigRational::zero(),
                cumulative_pow: BigRational::zero(),
                window,
                height: 0,
            },
        );
        SpvClient {
            base: params,
            headers,
            best_tip: hash,
        }
    }

    pub fn best_tip(&self) -> Hash256 {
        self.best_tip
    }

    pub fn height(&self, hash: &Hash256) -> Option<u64> {
        self.headers.get(hash).map(|e| e.height)
    }

    pub fn block_pow(&self, hash: &Hash256) -> Option<&BigRational> {
        self.headers.get(hash).map(|e| &e.block_pow)
    }

    pub fn cumulative_pow(&self, hash: &Hash256) -> Option<&BigRational> {
        self.headers.get(hash).map(|e| &e.cumulative_pow)
    }

    fn recent_timestamps(&self, tip: &Hash256) -> Vec<u32> {
        let mut out = Vec::new();
        let mut cur = self.headers.get(tip);
        while let Some(e) = cur {
            if out.len() == self.base.median_window {
                break;
            }
            out.push(e.header.timestamp);
            cur = if e.height == 0 {
                None
            } else {
                self.headers.get(&e.header.prev_hash)
            };
        }
        out.reverse();
        out
    }

    /// Verifies and stores an update. Returns the accepted block's PoW.
    pub fn apply(&mut self, update: &SpvUpdate, now: u64) -> Result<BigRational, SpvError> {
        let parent_hash = update.strong.prev_hash;
        let parent = self
            .headers
            .get(&parent_hash)
            .ok_or(SpvError::UnknownParent(parent_hash))?;
        let params = parent.window.child(&self.base).params(&self.base);
        let recent = self.recent_timestamps(&parent_hash);
        let pow = spv_verify_update(
            &update.strong,
            &update.weak,
            &update.binding_proof,
            &parent_hash,
            &params,
            now,
            &recent,
        )?;
        let entry = SpvEntry {
            header: update.strong,
            cumulative_pow: &parent.cumulative_pow + &pow,
            block_pow: pow.clone(),
            window: parent.window.advance(&self.base, update.strong.timestamp),
            height: parent.height + 1,
        };
        let hash = update.strong.hash();
        let better = entry.cumulative_pow > self.headers[&self.best_tip].cumulative_pow;
        self.headers.insert(hash, entry);
        if better {
            self.best_tip = hash;
        }
        Ok(pow)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::consensus::chain::{genesis_header, ChainState};
    use crate::consensus::header::Address;
    use crate::consensus::work::{block_pow, classify_hash, HashClass};

    fn setup() -> (ProtocolParams, Block, BlockHeader) {
        let p = ProtocolParams::toy(2, 2, 1);
        let g = genesis_header(&p, 0);
        let tmpl = BlockHeader {
            version: p.version,
            prev_hash: g.hash(),
            tx_root: Hash256::ZERO,
            timestamp: 600,
            target_bits: p.strong_target.to_compact(),
            nonce: 0,
            coinbase: Address::from_id(1),
        };
        let mut weak = Vec::new();
        let mut nonce = 0;
        while weak.len() < 3 {
            let h = BlockHeader { nonce, ..tmpl };
            if classify_hash(&h.hash(), &p) == HashClass::Weak {
                weak.push(h.compress());
            }
            nonce += 1;
        }
        let mut b = Block::assemble(tmpl, weak, vec![b"a".to_vec(), b"b".to_vec()]);
        while !p.strong_target.is_met_by(&b.hash()) {
            b.header.nonce += 1;
        }
        (p, b, g)
    }

    #[test]
    fn honest_update_matches_full_node() {
        let (p, b, g) = setup();
        let mut spv = SpvClient::new(p.clone(), g);
        let pow = spv.apply(&SpvUpdate::from_block(&b), 1000).unwrap();
        assert_eq!(pow, block_pow(&b, &p));
        let mut full = ChainState::new(p.clone(), 0);
        full.submit_block(b.clone(), 1000).unwrap();
        assert_eq!(full.best_tip(), spv.best_tip());
    }

    #[test]
    fn dropped_weak_header_is_binding_mismatch() {
        let (p, b, g) = setup();
        let mut u = SpvUpdate::from_block(&b);
        u.weak.pop();
        let r = spv_verify_update(
            &u.strong,
            &u.weak,
            &u.binding_proof,
            &g.hash(),
            &p,
            1000,
            &[0],
        );
        assert_eq!(r, Err(RejectReason::BindingMismatch));
    }

    #[test]
    fn non_first_leaf_rejected() {
        let (p, b, g) = setup();
        let ids: Vec<_> = b.transactions.iter().map(|t| txid(t)).collect();
        let proof = MerkleProof::build(&ids, 1).unwrap();
        let r = spv_verify_update(
            &b.header,
            &b.weak_headers,
            &proof,
            &g.hash(),
            &p,
            1000,
            &[0],
        );
        assert_eq!(r, Err(RejectReason::ProofPathInvalid));
    }
}
