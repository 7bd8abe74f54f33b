//! Block time: PoW-weighted timestamps and the median-time-past rule.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;

use super::block::Block;
use super::params::ProtocolParams;

/// Weighted mean of the strong timestamp (weight 1) and every weak timestamp
/// (weight `T_s/T_w` each).
pub fn effective_timestamp(block: &Block, params: &ProtocolParams) -> f64 {
    let w = params.weak_weight();
    let weak_sum: u64 = block.weak_headers.iter().map(|h| h.timestamp as u64).sum();
    let n = BigRational::from_integer(BigInt::from(block.weak_headers.len()));
    let num = BigRational::from_integer(BigInt::from(block.header.timestamp))
        + &w * BigRational::from_integer(BigInt::from(weak_sum));
    let den = BigRational::from_integer(1.into()) + &w * n;
    (num / den).to_f64().unwrap_or(f64::NAN)
}

/// Floating-point form used by the simulator, where weak timestamps are kept
/// as a running sum: `(strong + weight * weak_sum) / (1 + weight * n_weak)`.
pub fn weighted_timestamp(strong: f64, weak_sum: f64, n_weak: u64, weight: f64) -> f64 {
    (strong + weight * weak_sum) / (1.0 + weight * n_weak as f64)
}

/// Median of the given timestamps (upper median for even counts, matching
/// Bitcoin's `GetMedianTimePast`). Returns `None` for an empty slice.
pub fn median_time(timestamps: &[u32]) -> Option<u32> {
    if timestamps.is_empty() {
        return None;
    }
    let mut sorted = timestamps.to_vec();
    sorted.sort_unstable();
    Some(sorted[sorted.len() / 2])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::consensus::hash::Hash256;
    use crate::consensus::header::{Address, BlockHeader, CompressedWeakHeader};

    fn block(strong_ts: u32, weak_ts: &[u32]) -> Block {
        let header = BlockHeader {
            version: 1,
            prev_hash: Hash256::ZERO,
            tx_root: Hash256::ZERO,
            timestamp: strong_ts,
            target_bits: 0,
            nonce: 0,
            coinbase: Address::default(),
        };
        let weak_headers = weak_ts
            .iter()
            .map(|&t| CompressedWeakHeader {
                tx_root: Hash256::ZERO,
                timestamp: t,
                nonce: 0,
                coinbase: Address::default(),
            })
            .collect();
        Block {
            header,
            weak_headers,
            transactions: vec![],
        }
    }

    #[test]
    fn no_weak_headers_gives_strong_timestamp() {
        let p = ProtocolParams::default();
        assert_eq!(effective_timestamp(&block(1234, &[]), &p), 1234.0);
    }

    #[test]
    fn half_weight_example() {
        // T_s/T_w = 1/2: (1000 + 0.5*(2000+2000)) / (1 + 0.5*2) = 1500
        let p = ProtocolParams::toy(8, 2, 1);
        assert_eq!(effective_timestamp(&block(1000, &[2000, 2000]), &p), 1500.0);
    }

    #[test]
    fn constant_timestamps() {
        let p = ProtocolParams::default();
        assert_eq!(effective_timestamp(&block(777, &[777; 50]), &p), 777.0);
    }

    #[test]
    fn float_form_agrees() {
        let p = ProtocolParams::toy(8, 4, 1);
        let b = block(1000, &[900, 950, 1010]);
        let exact = effective_timestamp(&b, &p);
        let approx = weighted_timestamp(1000.0, 2860.0, 3, 0.25);
        assert!((exact - approx).abs() < 1e-9);
    }

    #[test]
    fn median_of_eleven() {
        let ts = [5, 1, 9, 3, 7, 11, 2, 8, 4, 10, 6];
        assert_eq!(median_time(&ts), Some(6));
        assert_eq!(median_time(&[]), None);
        assert_eq!(median_time(&[4, 2]), Some(4));
    }
}
