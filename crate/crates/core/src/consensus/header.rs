//! Strong and compressed weak headers.
//!
//! Layout (little-endian integers):
//!
//! ```text
//! strong (100 B): version:4 | prev_hash:32 | tx_root:32 | timestamp:4 | target_bits:4 | nonce:4 | coinbase:20
//! weak    (60 B): tx_root:32 | timestamp:4 | nonce:4 | coinbase:20
//! ```
//!
//! A compressed weak header drops the fields it shares with the strong header
//! of the block that carries it.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use super::hash::Hash256;

pub const HEADER_SIZE: usize = 100;
pub const WEAK_HEADER_SIZE: usize = 60;

/// A 20-byte miner address that receives rewards.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Address(pub [u8; 20]);

impl Address {
    /// Deterministic test/demo address derived from a small id.
    pub fn from_id(id: u32) -> Address {
        let digest = Hash256::digest(&id.to_le_bytes());
        let mut out = [0u8; 20];
        out.copy_from_slice(&digest.0[..20]);
        Address(out)
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }
}

impl fmt::Debug for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Address({})", self.to_hex())
    }
}

impl Serialize for Address {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for Address {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        let mut out = [0u8; 20];
        hex::decode_to_slice(&s, &mut out).map_err(serde::de::Error::custom)?;
        Ok(Address(out))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecodeError {
    #[error("expected {expected} bytes, got {got}")]
    Length { expected: usize, got: usize },
    #[error("unexpected end of input")]
    Truncated,
    #[error("trailing bytes after block")]
    Trailing,
    #[error("varint is not minimally encoded")]
    NonCanonicalVarint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BlockHeader {
    pub version: u32,
    pub prev_hash: Hash256,
    pub tx_root: Hash256,
    pub timestamp: u32,
    pub target_bits: u32,
    pub nonce: u32,
    pub coinbase: Address,
}

impl BlockHeader {
    pub fn serialize(&self) -> [u8; HEADER_SIZE] {
        let mut out = [0u8; HEADER_SIZE];
        out[0..4].copy_from_slice(&self.version.to_le_bytes());
        out[4..36].copy_from_slice(&self.prev_hash.0);
        out[36..68].copy_from_slice(&self.tx_root.0);
        out[68..72].copy_from_slice(&self.timestamp.to_le_bytes());
        out[72..76].copy_from_slice(&self.target_bits.to_le_bytes());
        out[76..80].copy_from_slice(&self.nonce.to_le_bytes());
        out[80..100].copy_from_slice(&self.coinbase.0);
        out
    }

    pub fn deserialize(bytes: &[u8]) -> Result<BlockHeader, DecodeError> {
        if bytes.len() != HEADER_SIZE {
            return Err(DecodeError::Length {
                expected: HEADER_SIZE,
                got: bytes.len(),
            });
        }
        Ok(BlockHeader {
            version: u32_at(bytes, 0),
            prev_hash: hash_at(bytes, 4),
            tx_root: hash_at(bytes, 36),
            timestamp: u32_at(bytes, 68),
            target_bits: u32_at(bytes, 72),
            nonce: u32_at(bytes, 76),
            coinbase: Address(bytes[80..100].try_into().expect("20 bytes")),
        })
    }

    pub fn hash(&self) -> Hash256 {
        Hash256::digest(&self.serialize())
    }

    /// Drops the fields inherited from the enclosing strong header.
    pub fn compress(&self) -> CompressedWeakHeader {
        CompressedWeakHeader {
            tx_root: self.tx_root,
            timestamp: self.timestamp,
            nonce: self.nonce,
            coinbase: self.coinbase,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CompressedWeakHeader {
    pub tx_root: Hash256,
    pub timestamp: u32,
    pub nonce: u32,
    pub coinbase: Address,
}

impl CompressedWeakHeader {
    pub fn serialize(&self) -> [u8; WEAK_HEADER_SIZE] {
        let mut out = [0u8; WEAK_HEADER_SIZE];
        out[0..32].copy_from_slice(&self.tx_root.0);
        out[32..36].copy_from_slice(&self.timestamp.to_le_bytes());
        out[36..40].copy_from_slice(&self.nonce.to_le_bytes());
        out[40..60].copy_from_slice(&self.coinbase.0);
        out
    }

    pub fn deserialize(bytes: &[u8]) -> Result<CompressedWeakHeader, DecodeError> {
        if bytes.len() != WEAK_HEADER_SIZE {
            return Err(DecodeError::Length {
                expected: WEAK_HEADER_SIZE,
                got: bytes.len(),
            });
        }
        Ok(CompressedWeakHeader {
            tx_root: hash_at(bytes, 0),
            timestamp: u32_at(bytes, 32),
            nonce: u32_at(bytes, 36),
            coinbase: Address(bytes[40..60].try_into().expect("20 bytes")),
        })
    }

    /// Rebuilds the full header using `strong` for the elided fields.
    pub fn decompress(&self, strong: &BlockHeader) -> BlockHeader {
        BlockHeader {
            version: strong.version,
            prev_hash: strong.prev_hash,
            tx_root: self.tx_root,
            timestamp: self.timestamp,
            target_bits: strong.target_bits,
            nonce: self.nonce,
            coinbase: self.coinbase,
        }
    }
}

fn u32_at(bytes: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(bytes[at..at + 4].try_into().expect("4 bytes"))
}

fn hash_at(bytes: &[u8], at: usize) -> Hash256 {
    Hash256(bytes[at..at + 32].try_into().expect("32 bytes"))
}
