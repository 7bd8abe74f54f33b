//! 256-bit targets and their compact (`nBits`) encoding.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use super::hash::Hash256;

/// A proof-of-work target. A digest meets the target when its little-endian
/// value is strictly below it.
///
/// Values up to and including `2^256` are allowed so that toy configurations
/// can declare every digest strong.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Target {
    value: BigUint,
    // Big-endian 32-byte form, `None` when the value is at least 2^256.
    be: Option<[u8; 32]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum CompactError {
    #[error("compact target has the sign bit set")]
    Negative,
    #[error("compact target decodes to zero")]
    Zero,
    #[error("compact target exceeds 2^256")]
    Overflow,
}

impl Target {
    pub fn new(value: BigUint) -> Target {
        let be = if value.bits() > 256 {
            None
        } else {
            let bytes = value.to_bytes_be();
            let mut out = [0u8; 32];
            out[32 - bytes.len()..].copy_from_slice(&bytes);
            Some(out)
        };
        Target { value, be }
    }

    /// `2^bits`.
    pub fn pow2(bits: u32) -> Target {
        Target::new(BigUint::one() << bits)
    }

    pub fn from_u64(v: u64) -> Target {
        Target::new(BigUint::from(v))
    }

    pub fn value(&self) -> &BigUint {
        &self.value
    }

    /// `true` when `hash < self`.
    pub fn is_met_by(&self, hash: &Hash256) -> bool {
        let Some(be) = &self.be else {
            return true;
        };
        // Compare the little-endian digest from its most significant byte.
        hash.0.iter().rev().cmp(be.iter()) == Ordering::Less
    }

    /// Decodes Bitcoin's compact representation.
    pub fn from_compact(bits: u32) -> Result<Target, CompactError> {
        let exponent = bits >> 24;
        let mantissa = bits & 0x007f_ffff;
        if bits & 0x0080_0000 != 0 {
            return Err(CompactError::Negative);
        }
        let value = if exponent <= 3 {
            BigUint::from(mantissa >> (8 * (3 - exponent)))
        } else {
            BigUint::from(mantissa) << (8 * (exponent - 3))
        };
        if value.is_zero() {
            return Err(CompactError::Zero);
        }
        if value > (BigUint::one() << 256u32) {
            return Err(CompactError::Overflow);
        }
        Ok(Target::new(value))
    }

    /// Encodes to compact form, truncating low-order bits that do not fit in
    /// the 23-bit mantissa.
    pub fn to_compact(&self) -> u32 {
        let mut size = self.value.bits().div_ceil(8) as u32;
        let mut compact: u32 = if size <= 3 {
            let low = self.value.iter_u64_digits().next().unwrap_or(0) as u32;
            low << (8 * (3 - size))
        } else {
            let shifted: BigUint = &self.value >> (8 * (size - 3));
            shifted.iter_u64_digits().next().unwrap_or(0) as u32
        };
        if compact & 0x0080_0000 != 0 {
            compact >>= 8;
            size += 1;
        }
        (size << 24) | compact
    }

    /// The value after a compact encode/decode round trip.
    pub fn compact_rounded(&self) -> Target {
        Target::from_compact(self.to_compact()).unwrap_or_else(|_| self.clone())
    }

    pub fn is_compact_exact(&self) -> bool {
        Target::from_compact(self.to_compact()).is_ok_and(|t| t == *self)
    }
}

impl fmt::Debug for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Target({:#x})", self.value)
    }
}

impl From<BigUint> for Target {
    fn from(v: BigUint) -> Self {
        Target::new(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bitcoin_genesis_bits() {
        let t = Target::from_compact(0x1d00ffff).unwrap();
        assert_eq!(t.value(), &(BigUint::from(0xffffu32) << 208u32));
        assert_eq!(t.to_compact(), 0x1d00ffff);
    }

    #[test]
    fn full_range_target() {
        let t = Target::pow2(256);
        assert_eq!(t.to_compact(), 0x2101_0000);
        assert_eq!(Target::from_compact(0x2101_0000).unwrap(), t);
        let max_digest = Hash256([0xff; 32]);
        assert!(t.is_met_by(&max_digest));
    }

    #[test]
    fn sign_bit_rejected() {
        assert_eq!(
            Target::from_compact(0x1d80_0000),
            Err(CompactError::Negative)
        );
        assert_eq!(Target::from_compact(0x0100_0000), Err(CompactError::Zero));
    }

    #[test]
    fn small_targets_encode() {
        for v in [1u64, 0x7f, 0x80, 0xff, 0x1234, 0x7f_ffff, 0x80_0000] {
            let t = Target::from_u64(v);
            assert!(t.is_compact_exact(), "{v:#x}");
        }
    }

    #[test]
    fn comparison_matches_bigint() {
        let t = Target::new(BigUint::from(0x1234_5678u64) << 200u32);
        for seed in 0..200u32 {
            let h = Hash256::digest(&seed.to_le_bytes());
            // Clear the top bytes on half the samples so both outcomes occur.
            let mut h2 = h;
            if seed % 2 == 0 {
                h2.0[31] = 0;
                h2.0[30] = 0;
                h2.0[29] = 0;
            }
            assert_eq!(t.is_met_by(&h2), h2.to_uint() < *t.value());
        }
        let exact = Hash256::from_uint(t.value()).unwrap();
        assert!(!t.is_met_by(&exact));
    }
}
