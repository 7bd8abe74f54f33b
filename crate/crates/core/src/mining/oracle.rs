//! Stochastic mining oracle: draws hits directly from their distribution
//! instead of hashing.
//!
//! Every hash lands under `T_w` with probability `p_w = T_w / 2^256`, so hits
//! of the network arrive as a Poisson process with rate `eta * p_w`. A hit is
//! strong with probability `p_s / p_w = T_s / T_w`, which makes the number of
//! weak hits between strong hits geometric with mean `T_w/T_s - 1`.

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use rand_distr::Exp;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::consensus::hash::Hash256;
use crate::consensus::header::Address;
use crate::consensus::params::ProtocolParams;
use crate::consensus::target::Target;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinerIdentity {
    pub address: Address,
    /// Share of the global hash rate.
    pub alpha: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EventKind {
    StrongFound,
    WeakFound,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MiningEvent {
    pub time: f64,
    /// Index into the miner list.
    pub finder: usize,
    pub address: Address,
    pub kind: EventKind,
    pub parent: Hash256,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("hit rate must be positive and finite, got {0}")]
    BadRate(f64),
    #[error("hash shares must be nonnegative and sum to 1 (sum {0})")]
    BadShares(f64),
}

/// Probability that a uniform 256-bit hash lies below `t`.
pub fn hit_probability(t: &Target) -> f64 {
    let space = BigUint::from(1u8) << 256u32;
    // Scale into f64 range before dividing.
    let shift = t.value().bits().saturating_sub(60);
    let num = (t.value() >> shift).to_f64().unwrap_or(f64::INFINITY);
    let den = (space >> shift).to_f64().unwrap_or(f64::INFINITY);
    (num / den).min(1.0)
}

/// Network hash rate that yields one strong hit per `interval` seconds.
pub fn calibrated_hash_rate(params: &ProtocolParams, interval: f64) -> f64 {
    1.0 / (interval * hit_probability(&params.strong_target))
}

#[derive(Debug, Clone)]
pub struct MiningOracle {
    miners: Vec<MinerIdentity>,
    finder: WeightedIndex<f64>,
    inter_arrival: Exp<f64>,
    strong_probability: f64,
}

impl MiningOracle {
    /// `eta` is the network hash rate in hashes per second.
    pub fn new(
        miners: Vec<MinerIdentity>,
        params: &ProtocolParams,
        eta: f64,
    ) -> Result<MiningOracle, OracleError> {
        let p_w = hit_probability(&params.weak_target);
        let p_s = hit_probability(&params.strong_target);
        let rate = eta * p_w;
        if !(rate.is_finite() && rate > 0.0) {
            return Err(OracleError::BadRate(rate));
        }
        let sum: f64 = miners.iter().map(|m| m.alpha).sum();
        if (sum - 1.0).abs() > 1e-9 || miners.iter().any(|m| m.alpha < 0.0) {
            return Err(OracleError::BadShares(sum));
        }
        let finder = WeightedIndex::new(miners.iter().map(|m| m.alpha))
            .map_err(|_| OracleError::BadShares(sum))?;
        Ok(MiningOracle {
            miners,
            finder,
            inter_arrival: Exp::new(rate).map_err(|_| OracleError::BadRate(rate))?,
            strong_probability: (p_s / p_w).min(1.0),
        })
    }

    pub fn miners(&self) -> &[MinerIdentity] {
        &self.miners
    }

    pub fn strong_probability(&self) -> f64 {
        self.strong_probability
    }

    pub fn next_event<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        now: f64,
        parent: Hash256,
    ) -> MiningEvent {
        let time = now + self.inter_arrival.sample(rng);
        let finder = self.finder.sample(rng);
        let kind = if rng.gen::<f64>() < self.strong_probability {
            EventKind::StrongFound
        } else {
            EventKind::WeakFound
        };
        MiningEvent {
            time,
            finder,
            address: self.miners[finder].address,
            kind,
            parent,
        }
    }

    /// Number of weak events before the next strong one.
    pub fn weak_count_until_strong<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let mut n = 0;
        while rng.gen::<f64>() >= self.strong_probability {
            n += 1;
        }
        n
    }
}

/// Free-function form of [`MiningOracle::next_event`].
pub fn next_event<R: Rng + ?Sized>(
    rng: &mut R,
    miners: &[MinerIdentity],
    params: &ProtocolParams,
    eta: f64,
    now: f64,
    parent: Hash256,
) -> Result<MiningEvent, OracleError> {
    Ok(MiningOracle::new(miners.to_vec(), params, eta)?.next_event(rng, now, parent))
}
