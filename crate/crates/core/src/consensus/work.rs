//! Hash classification and aggregated proof-of-work.

use num_bigint::BigInt;
use num_rational::BigRational;

use super::block::Block;
use super::hash::Hash256;
use super::params::ProtocolParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HashClass {
    Strong,
    Weak,
    None,
}

/// Strong iff `h < T_s`, weak iff `T_s <= h < T_w`.
pub fn classify_hash(h: &Hash256, params: &ProtocolParams) -> HashClass {
    if params.strong_target.is_met_by(h) {
        HashClass::Strong
    } else if params.weak_target.is_met_by(h) {
        HashClass::Weak
    } else {
        HashClass::None
    }
}

/// `T_max/T_s + n_weak * T_max/T_w`, with the targets of the block's window.
pub fn block_pow(block: &Block, params: &ProtocolParams) -> BigRational {
    pow_with_weak_count(block.weak_headers.len(), params)
}

pub fn pow_with_weak_count(n_weak: usize, params: &ProtocolParams) -> BigRational {
    params.strong_pow() + params.weak_pow() * BigRational::from_integer(BigInt::from(n_weak))
}

/// Sum of [`block_pow`] over a chain, each block with its own window.
pub fn chain_pow<'a>(
    blocks: impl IntoIterator<Item = (&'a Block, &'a ProtocolParams)>,
) -> BigRational {
    blocks
        .into_iter()
        .fold(BigRational::from_integer(0.into()), |acc, (b, p)| {
            acc + block_pow(b, p)
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::consensus::params::rational_from_u64;
    use crate::consensus::target::Target;
    use num_bigint::BigUint;

    fn small_params() -> ProtocolParams {
        let mut p = ProtocolParams::toy(8, 4, 1);
        p.max_target = Target::from_u64(256);
        p.strong_target = Target::from_u64(16);
        p.weak_target = Target::from_u64(64);
        p
    }

    #[test]
    fn zero_is_strong() {
        let p = ProtocolParams::default();
        assert_eq!(classify_hash(&Hash256::ZERO, &p), HashClass::Strong);
    }

    #[test]
    fn band_boundaries() {
        let p = small_params();
        let at = |v: u64| Hash256::from_uint(&BigUint::from(v)).unwrap();
        assert_eq!(classify_hash(&at(15), &p), HashClass::Strong);
        assert_eq!(classify_hash(&at(16), &p), HashClass::Weak);
        assert_eq!(classify_hash(&at(63), &p), HashClass::Weak);
        assert_eq!(classify_hash(&at(64), &p), HashClass::None);
    }

    #[test]
    fn pow_examples() {
        let p = small_params();
        assert_eq!(pow_with_weak_count(0, &p), rational_from_u64(16));
        assert_eq!(pow_with_weak_count(3, &p), rational_from_u64(28));
        let two = pow_with_weak_count(3, &p) + pow_with_weak_count(3, &p);
        assert_eq!(two, rational_from_u64(56));
    }
}
