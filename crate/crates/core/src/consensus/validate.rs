//! Block validation. Checks run in a fixed order and the first failure is
//! reported.

use std::collections::HashSet;

use thiserror::Error;

use super::block::{commitment_digest, parse_binding_transaction, Block};
use super::hash::Hash256;
use super::header::{BlockHeader, CompressedWeakHeader};
use super::merkle::merkle_root_of_transactions;
use super::params::ProtocolParams;
use super::timestamp::median_time;
use super::work::{classify_hash, HashClass};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum RejectReason {
    #[error("header hash does not meet the strong target")]
    PowFailure,
    #[error("prev_hash does not reference the parent")]
    BadLinkage,
    #[error("target_bits differ from the window target")]
    BadTarget,
    #[error("timestamp outside the accepted range")]
    BadTimestamp,
    #[error("unrecognized header version")]
    BadVersion,
    #[error("binding transaction missing or commitment mismatch")]
    BindingMismatch,
    #[error("tx_root does not match the transaction list")]
    MerkleMismatch,
    #[error("weak header {index}: {kind}")]
    WeakHeaderViolation { index: usize, kind: WeakViolation },
    #[error("inclusion proof is not for the first transaction")]
    ProofPathInvalid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum WeakViolation {
    #[error("hash outside the weak band")]
    OutsideBand,
    #[error("timestamp outside the accepted range")]
    BadTimestamp,
    #[error("duplicate of an earlier weak header")]
    Duplicate,
}

/// Bounds a timestamp must satisfy: strictly above the median of the recent
/// timestamps and at most `now + max_future_drift`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TimeWindow {
    pub median_time_past: Option<u32>,
    pub max_allowed: u64,
}

impl TimeWindow {
    pub fn new(params: &ProtocolParams, now: u64, recent_timestamps: &[u32]) -> TimeWindow {
        let start = recent_timestamps.len().saturating_sub(params.median_window);
        TimeWindow {
            median_time_past: median_time(&recent_timestamps[start..]),
            max_allowed: now + params.max_future_drift as u64,
        }
    }

    pub fn accepts(&self, ts: u32) -> bool {
        self.median_time_past.is_none_or(|m| ts > m) && ts as u64 <= self.max_allowed
    }
}

/// PoW, linkage and header fields of a strong header.
pub fn check_strong_header(
    header: &BlockHeader,
    parent_hash: &Hash256,
    params: &ProtocolParams,
    time: &TimeWindow,
) -> Result<(), RejectReason> {
    if !params.strong_target.is_met_by(&header.hash()) {
        return Err(RejectReason::PowFailure);
    }
    if header.prev_hash != *parent_hash {
        return Err(RejectReason::BadLinkage);
    }
    if header.target_bits != params.strong_target.to_compact() {
        return Err(RejectReason::BadTarget);
    }
    if !time.accepts(header.timestamp) {
        return Err(RejectReason::BadTimestamp);
    }
    if header.version != params.version {
        return Err(RejectReason::BadVersion);
    }
    Ok(())
}

/// Band, timestamp and uniqueness of each weak header. Linkage is implied:
/// a compressed header inherits `prev_hash` from the strong header it is
/// decompressed against.
pub fn check_weak_headers(
    strong: &BlockHeader,
    weak: &[CompressedWeakHeader],
    params: &ProtocolParams,
    time: &TimeWindow,
) -> Result<(), RejectReason> {
    let mut seen = HashSet::with_capacity(weak.len());
    for (index, w) in weak.iter().enumerate() {
        let violation = |kind| RejectReason::WeakHeaderViolation { index, kind };
        let h = w.decompress(strong).hash();
        if classify_hash(&h, params) != HashClass::Weak {
            return Err(violation(WeakViolation::OutsideBand));
        }
        if !time.accepts(w.timestamp) {
            return Err(violation(WeakViolation::BadTimestamp));
        }
        if !seen.insert(h) {
            return Err(violation(WeakViolation::Duplicate));
        }
    }
    Ok(())
}

/// Full-node validation of `b` as a child of `parent`. `params` carries the
/// targets of the block's own window and `recent_timestamps` the timestamps
/// of the preceding blocks, oldest first, ending with the parent.
pub fn validate_block(
    b: &Block,
    parent: &BlockHeader,
    params: &ProtocolParams,
    now: u64,
    recent_timestamps: &[u32],
) -> Result<(), RejectReason> {
    validate_block_with_parent_hash(b, &parent.hash(), params, now, recent_timestamps)
}

pub fn validate_block_with_parent_hash(
    b: &Block,
    parent_hash: &Hash256,
    params: &ProtocolParams,
    now: u64,
    recent_timestamps: &[u32],
) -> Result<(), RejectReason> {
    let time = TimeWindow::new(params, now, recent_timestamps);
    check_strong_header(&b.header, parent_hash, params, &time)?;

    let commitment = b
        .transactions
        .first()
        .and_then(|tx| parse_binding_transaction(tx))
        .ok_or(RejectReason::BindingMismatch)?;
    if commitment != commitment_digest(&b.weak_headers, &b.header) {
        return Err(RejectReason::BindingMismatch);
    }
    if merkle_root_of_transactions(&b.transactions) != b.header.tx_root {
        return Err(RejectReason::MerkleMismatch);
    }

    check_weak_headers(&b.header, &b.weak_headers, params, &time)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::consensus::header::Address;

    fn params() -> ProtocolParams {
        // Strong 1/4, weak band up to 1/2 of the hash space.
        ProtocolParams::toy(2, 2, 1)
    }

    fn parent() -> BlockHeader {
        BlockHeader {
            version: params().version,
            prev_hash: Hash256::ZERO,
            tx_root: Hash256::ZERO,
            timestamp: 1000,
            target_bits: params().strong_target.to_compact(),
            nonce: 0,
            coinbase: Address::default(),
        }
    }

    fn template() -> BlockHeader {
        BlockHeader {
            prev_hash: parent().hash(),
            timestamp: 1600,
            coinbase: Address::from_id(1),
            ..parent()
        }
    }

    fn find_weak(tmpl: &BlockHeader, p: &ProtocolParams, n: usize) -> Vec<CompressedWeakHeader> {
        let mut out = Vec::new();
        let mut nonce = 0u32;
        while out.len() < n {
            let h = BlockHeader { nonce, ..*tmpl };
            if classify_hash(&h.hash(), p) == HashClass::Weak {
                out.push(h.compress());
            }
            nonce += 1;
        }
        out
    }

    fn mine(weak: Vec<CompressedWeakHeader>, p: &ProtocolParams) -> Block {
        let mut b = Block::assemble(template(), weak, vec![]);
        while !p.strong_target.is_met_by(&b.hash()) {
            b.header.nonce += 1;
        }
        b
    }

    #[test]
    fn accepts_valid_blocks() {
        let p = params();
        let b = mine(vec![], &p);
        assert_eq!(validate_block(&b, &parent(), &p, 2000, &[1000]), Ok(()));
        let b = mine(find_weak(&template(), &p, 3), &p);
        assert_eq!(validate_block(&b, &parent(), &p, 2000, &[1000]), Ok(()));
    }

    #[test]
    fn rejection_codes() {
        let p = params();
        let b = mine(find_weak(&template(), &p, 2), &p);
        let check = |b: &Block| validate_block(b, &parent(), &p, 2000, &[1000]);

        let mut bad = b.clone();
        bad.weak_headers.swap(0, 1);
        assert_eq!(check(&bad), Err(RejectReason::BindingMismatch));

        let mut bad = b.clone();
        bad.transactions.push(vec![1, 2, 3]);
        assert_eq!(check(&bad), Err(RejectReason::MerkleMismatch));

        assert_eq!(
            validate_block(&b, &template(), &p, 2000, &[1000]),
            Err(RejectReason::BadLinkage)
        );
        assert_eq!(
            validate_block(&b, &parent(), &p, 2000, &[1600]),
            Err(RejectReason::BadTimestamp)
        );
        let t = TimeWindow::new(&p, 100, &[1000]);
        assert!(t.accepts(7300));
        assert!(!t.accepts(7301));
    }

    #[test]
    fn weak_header_above_weak_target_rejected() {
        let p = params();
        let mut nonce = 0;
        let outside = loop {
            let h = BlockHeader {
                nonce,
                ..template()
            };
            if classify_hash(&h.hash(), &p) == HashClass::None {
                break h.compress();
            }
            nonce += 1;
        };
        let b = mine(vec![outside], &p);
        assert_eq!(
            validate_block(&b, &parent(), &p, 2000, &[1000]),
            Err(RejectReason::WeakHeaderViolation {
                index: 0,
                kind: WeakViolation::OutsideBand
            })
        );
    }

    #[test]
    fn duplicate_weak_header_rejected() {
        let p = params();
        let w = find_weak(&template(), &p, 1)[0];
        let b = mine(vec![w, w], &p);
        assert_eq!(
            validate_block(&b, &parent(), &p, 2000, &[1000]),
            Err(RejectReason::WeakHeaderViolation {
                index: 1,
                kind: WeakViolation::Duplicate
            })
        );
    }

    #[test]
    fn median_uses_last_window_only() {
        let p = params();
        let mut recent = vec![5000u32; 5];
        recent.extend([100u32; 11]);
        let t = TimeWindow::new(&p, 0, &recent);
        assert_eq!(t.median_time_past, Some(100));
    }
}
