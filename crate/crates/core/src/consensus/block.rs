//! Blocks, the binding transaction and the canonical block encoding.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::hash::Hash256;
use super::header::{
    BlockHeader, CompressedWeakHeader, DecodeError, HEADER_SIZE, WEAK_HEADER_SIZE,
};
use super::merkle::{merkle_root_of_transactions, txid, MerkleProof};
use super::params::ProtocolParams;
use super::work::{classify_hash, HashClass};

/// Marker byte that opens a binding transaction (mirrors `OP_RETURN`).
pub const BINDING_MARKER: u8 = 0x6a;
pub const BINDING_TX_SIZE: usize = 33;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub header: BlockHeader,
    pub weak_headers: Vec<CompressedWeakHeader>,
    /// Opaque transactions; the first one is the binding transaction.
    pub transactions: Vec<Vec<u8>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BindingError {
    #[error("weak header {index} does not fall in the weak band once decompressed")]
    DecompressionMismatch { index: usize },
}

/// Hash over the concatenated full 100-byte headers, without any PoW checks.
pub fn commitment_digest(weak: &[CompressedWeakHeader], strong_ctx: &BlockHeader) -> Hash256 {
    let mut buf = Vec::with_capacity(weak.len() * HEADER_SIZE);
    for w in weak {
        buf.extend_from_slice(&w.decompress(strong_ctx).serialize());
    }
    Hash256::digest(&buf)
}

/// Commitment carried by the binding transaction. Every weak header must
/// decompress to a header whose digest lies in `[T_s, T_w)`.
pub fn binding_commitment(
    weak: &[CompressedWeakHeader],
    strong_ctx: &BlockHeader,
    params: &ProtocolParams,
) -> Result<Hash256, BindingError> {
    for (index, w) in weak.iter().enumerate() {
        let h = w.decompress(strong_ctx).hash();
        if classify_hash(&h, params) != HashClass::Weak {
            return Err(BindingError::DecompressionMismatch { index });
        }
    }
    Ok(commitment_digest(weak, strong_ctx))
}

pub fn binding_transaction(commitment: &Hash256) -> Vec<u8> {
    let mut tx = Vec::with_capacity(BINDING_TX_SIZE);
    tx.push(BINDING_MARKER);
    tx.extend_from_slice(&commitment.0);
    tx
}

/// Extracts the commitment from a binding transaction.
pub fn parse_binding_transaction(tx: &[u8]) -> Option<Hash256> {
    if tx.len() != BINDING_TX_SIZE || tx[0] != BINDING_MARKER {
        return None;
    }
    Some(Hash256(tx[1..].try_into().ok()?))
}

impl Block {
    /// Builds a block from a header template: computes the binding transaction
    /// for `weak_headers`, places it first, and sets `tx_root`. The nonce is
    /// left as given.
    pub fn assemble(
        template: BlockHeader,
        weak_headers: Vec<CompressedWeakHeader>,
        other_txs: Vec<Vec<u8>>,
    ) -> Block {
        let mut header = template;
        let commitment = commitment_digest(&weak_headers, &header);
        let mut transactions = Vec::with_capacity(other_txs.len() + 1);
        transactions.push(binding_transaction(&commitment));
        transactions.extend(other_txs);
        header.tx_root = merkle_root_of_transactions(&transactions);
        Block {
            header,
            weak_headers,
            transactions,
        }
    }

    pub fn hash(&self) -> Hash256 {
        self.header.hash()
    }

    /// Weak headers restored to their full form.
    pub fn decompressed_weak(&self) -> impl Iterator<Item = BlockHeader> + '_ {
        self.weak_headers
            .iter()
            .map(move |w| w.decompress(&self.header))
    }

    /// Inclusion proof of the binding transaction (leaf 0).
    pub fn binding_proof(&self) -> MerkleProof {
        let ids: Vec<Hash256> = self.transactions.iter().map(|tx| txid(tx)).collect();
        MerkleProof::build(&ids, 0).unwrap_or(MerkleProof {
            leaf_index: 0,
            siblings: Vec::new(),
        })
    }

    /// `header ∥ varint(n_weak) ∥ weak headers ∥ varint(n_tx) ∥ (varint(len) ∥ tx)*`
    pub fn encode(&self) -> Vec<u8> {
        let tx_bytes: usize = self.transactions.iter().map(|t| t.len() + 9).sum();
        let mut out = Vec::with_capacity(
            HEADER_SIZE + 18 + self.weak_headers.len() * WEAK_HEADER_SIZE + tx_bytes,
        );
        out.extend_from_slice(&self.header.serialize());
        write_varint(&mut out, self.weak_headers.len() as u64);
        for w in &self.weak_headers {
            out.extend_from_slice(&w.serialize());
        }
        write_varint(&mut out, self.transactions.len() as u64);
        for tx in &self.transactions {
            write_varint(&mut out, tx.len() as u64);
            out.extend_from_slice(tx);
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Block, DecodeError> {
        let mut r = Reader { bytes, pos: 0 };
        let header = BlockHeader::deserialize(r.take(HEADER_SIZE)?)?;
        let n_weak = r.varint()? as usize;
        let mut weak_headers = Vec::with_capacity(n_weak.min(1 << 16));
        for _ in 0..n_weak {
            weak_headers.push(CompressedWeakHeader::deserialize(
                r.take(WEAK_HEADER_SIZE)?,
            )?);
        }
        let n_tx = r.varint()? as usize;
        let mut transactions = Vec::with_capacity(n_tx.min(1 << 16));
        for _ in 0..n_tx {
            let len = r.varint()? as usize;
            transactions.push(r.take(len)?.to_vec());
        }
        if r.pos != bytes.len() {
            return Err(DecodeError::Trailing);
        }
        Ok(Block {
            header,
            weak_headers,
            transactions,
        })
    }
}

/// Bitcoin `CompactSize` encoding.
pub fn write_varint(out: &mut Vec<u8>, v: u64) {
    match v {
        0..=0xfc => out.push(v as u8),
        0xfd..=0xffff => {
            out.push(0xfd);
            out.extend_from_slice(&(v as u16).to_le_bytes());
        }
        0x1_0000..=0xffff_ffff => {
            out.push(0xfe);
            out.extend_from_slice(&(v as u32).to_le_bytes());
        }
        _ => {
            out.push(0xff);
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], DecodeError> {
        let end = self.pos.checked_add(n).ok_or(DecodeError::Truncated)?;
        if end > self.bytes.len() {
            return Err(DecodeError::Truncated);
        }
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn varint(&mut self) -> Result<u64, DecodeError> {
        let tag = self.take(1)?[0];
        let (v, min) = match tag {
            0xfd => (
                u16::from_le_bytes(self.take(2)?.try_into().unwrap()) as u64,
                0xfd,
            ),
            0xfe => (
                u32::from_le_bytes(self.take(4)?.try_into().unwrap()) as u64,
                0x1_0000,
            ),
            0xff => (
                u64::from_le_bytes(self.take(8)?.try_into().unwrap()),
                0x1_0000_0000,
            ),
            b => return Ok(b as u64),
        };
        if v < min {
            return Err(DecodeError::NonCanonicalVarint);
        }
        Ok(v)
    }
}
