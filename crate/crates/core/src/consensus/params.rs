use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use super::target::Target;

/// Number of atomic subunits in one currency unit.
pub const ATOMIC_PER_UNIT: u64 = 100_000_000;

pub const DEFAULT_VERSION: u32 = 0x2000_0000;

/// Consensus parameters in force for one difficulty window.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolParams {
    pub strong_target: Target,
    pub weak_target: Target,
    pub max_target: Target,
    /// Weight of weak-header rewards relative to the strong reward.
    pub gamma: BigRational,
    /// Base block reward `R` in atomic subunits.
    pub block_reward: u64,
    pub target_block_interval: u32,
    pub retarget_window: u32,
    pub max_future_drift: u32,
    pub median_window: usize,
    /// The single header version accepted by validation.
    pub version: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParamsError {
    #[error("strong target must not exceed the weak target")]
    StrongAboveWeak,
    #[error("weak target must not exceed the maximum target")]
    WeakAboveMax,
    #[error("targets must be positive")]
    ZeroTarget,
    #[error("gamma must be nonnegative")]
    NegativeGamma,
    #[error("retarget window must be at least one block")]
    EmptyWindow,
    #[error("target block interval must be positive")]
    ZeroInterval,
    #[error("median window must be at least one block")]
    EmptyMedianWindow,
}

pub fn rational_from_uint(v: &BigUint) -> BigRational {
    BigRational::from_integer(BigInt::from(v.clone()))
}

pub fn rational_from_u64(v: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

impl Default for ProtocolParams {
    fn default() -> Self {
        let strong = Target::new(BigUint::from(0xffffu32) << 192u32);
        ProtocolParams::with_ratio(Target::pow2(224), strong, 1024, rational_from_u64(10))
    }
}

impl ProtocolParams {
    /// Parameters with `T_w = ratio * T_s`.
    pub fn with_ratio(
        max_target: Target,
        strong_target: Target,
        ratio: u64,
        gamma: BigRational,
    ) -> ProtocolParams {
        let weak_target = Target::new(strong_target.value() * BigUint::from(ratio));
        ProtocolParams {
            strong_target,
            weak_target,
            max_target,
            gamma,
            block_reward: 1_250_000_000,
            target_block_interval: 600,
            retarget_window: 2016,
            max_future_drift: 7200,
            median_window: 11,
            version: DEFAULT_VERSION,
        }
    }

    /// Toy parameters over the full 256-bit hash range: `T_max = 2^256`,
    /// `T_s = 2^(256 - strong_bits)`, `T_w = ratio * T_s`.
    pub fn toy(strong_bits: u32, ratio: u64, gamma: u64) -> ProtocolParams {
        ProtocolParams::with_ratio(
            Target::pow2(256),
            Target::pow2(256 - strong_bits),
            ratio,
            rational_from_u64(gamma),
        )
    }

    pub fn validate(&self) -> Result<(), ParamsError> {
        if self.strong_target.value().is_zero() || self.weak_target.value().is_zero() {
            return Err(ParamsError::ZeroTarget);
        }
        if self.strong_target > self.weak_target {
            return Err(ParamsError::StrongAboveWeak);
        }
        if self.weak_target > self.max_target {
            return Err(ParamsError::WeakAboveMax);
        }
        if self.gamma < BigRational::zero() {
            return Err(ParamsError::NegativeGamma);
        }
        if self.retarget_window == 0 {
            return Err(ParamsError::EmptyWindow);
        }
        if self.target_block_interval == 0 {
            return Err(ParamsError::ZeroInterval);
        }
        if self.median_window == 0 {
            return Err(ParamsError::EmptyMedianWindow);
        }
        Ok(())
    }

    /// Same parameters with the targets of another window.
    pub fn with_targets(&self, strong: Target, weak: Target) -> ProtocolParams {
        ProtocolParams {
            strong_target: strong,
            weak_target: weak,
            ..self.clone()
        }
    }

    /// `T_w / T_s`.
    pub fn weak_ratio(&self) -> BigRational {
        BigRational::new(
            BigInt::from(self.weak_target.value().clone()),
            BigInt::from(self.strong_target.value().clone()),
        )
    }

    /// `T_s / T_w`, the relative weight of one weak header.
    pub fn weak_weight(&self) -> BigRational {
        self.weak_ratio().recip()
    }

    /// PoW of one strong header, `T_max / T_s`.
    pub fn strong_pow(&self) -> BigRational {
        BigRational::new(
            BigInt::from(self.max_target.value().clone()),
            BigInt::from(self.strong_target.value().clone()),
        )
    }

    /// PoW of one weak header, `T_max / T_w`.
    pub fn weak_pow(&self) -> BigRational {
        BigRational::new(
            BigInt::from(self.max_target.value().clone()),
            BigInt::from(self.weak_target.value().clone()),
        )
    }

    /// Scaling constant `c = 1 / (1 + gamma * (T_w/T_s - 1) * T_s/T_w)`.
    pub fn scaling_constant(&self) -> BigRational {
        let ratio = self.weak_ratio();
        let one = BigRational::one();
        let denom = &one + &self.gamma * (&ratio - &one) / &ratio;
        denom.recip()
    }
}
