//! Block rewards split between the strong finder and weak-header finders.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use super::block::Block;
use super::hash::Hash256;
use super::header::Address;
use super::params::{rational_from_u64, ProtocolParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RewardKind {
    Strong,
    Weak,
    Fee,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Payout {
    pub address: Address,
    pub amount: u64,
    pub kind: RewardKind,
}

/// Per-window reward amounts in atomic units, both rounded down.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RewardSchedule {
    /// `c * R`.
    pub strong: u64,
    /// `c * gamma * R * T_s / T_w`.
    pub weak: u64,
}

fn floor_u64(x: &BigRational) -> u64 {
    let (q, _) = x.numer().div_mod_floor(x.denom());
    q.to_u64().unwrap_or(u64::MAX)
}

impl RewardSchedule {
    pub fn new(params: &ProtocolParams) -> RewardSchedule {
        let c = params.scaling_constant();
        let r = rational_from_u64(params.block_reward);
        let strong = &c * &r;
        let weak = &c * &params.gamma * &r * params.weak_weight();
        RewardSchedule {
            strong: floor_u64(&strong),
            weak: floor_u64(&weak),
        }
    }

    /// Amount minted by a block with `n_weak` weak headers, fees excluded.
    pub fn minted(&self, n_weak: u64) -> u64 {
        self.strong + self.weak * n_weak
    }
}

/// Payouts for one block. The strong finder receives `c*R` and, as a
/// separate entry when nonzero, the fees. Every weak header pays its own
/// coinbase, so one address can appear several times.
pub fn compute_block_rewards(b: &Block, fees: u64, params: &ProtocolParams) -> Vec<Payout> {
    compute_with_schedule(b, fees, &RewardSchedule::new(params))
}

pub fn compute_with_schedule(b: &Block, fees: u64, schedule: &RewardSchedule) -> Vec<Payout> {
    let mut out = Vec::with_capacity(b.weak_headers.len() + 2);
    out.push(Payout {
        address: b.header.coinbase,
        amount: schedule.strong,
        kind: RewardKind::Strong,
    });
    if fees > 0 {
        out.push(Payout {
            address: b.header.coinbase,
            amount: fees,
            kind: RewardKind::Fee,
        });
    }
    out.extend(b.weak_headers.iter().map(|w| Payout {
        address: w.coinbase,
        amount: schedule.weak,
        kind: RewardKind::Weak,
    }));
    out
}

/// Exact (unrounded) amount minted for `n_weak` weak headers:
/// `c * R * (1 + gamma * n_weak * T_s/T_w)`.
pub fn exact_minted(n_weak: u64, params: &ProtocolParams) -> BigRational {
    let one = rational_from_u64(1);
    let n = BigRational::from_integer(BigInt::from(n_weak));
    params.scaling_constant()
        * rational_from_u64(params.block_reward)
        * (one + &params.gamma * params.weak_weight() * n)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccountTotals {
    pub strong: u64,
    pub weak: u64,
    pub fee: u64,
}

impl AccountTotals {
    pub fn total(&self) -> u64 {
        self.strong + self.weak + self.fee
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockRewardRecord {
    pub block: Hash256,
    pub payouts: Vec<Payout>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RewardLedger {
    pub accounts: BTreeMap<Address, AccountTotals>,
    pub records: Vec<BlockRewardRecord>,
}

impl RewardLedger {
    pub fn new() -> RewardLedger {
        RewardLedger::default()
    }

    pub fn credit(&mut self, block: Hash256, payouts: Vec<Payout>) {
        for p in &payouts {
            let acct = self.accounts.entry(p.address).or_default();
            match p.kind {
                RewardKind::Strong => acct.strong += p.amount,
                RewardKind::Weak => acct.weak += p.amount,
                RewardKind::Fee => acct.fee += p.amount,
            }
        }
        self.records.push(BlockRewardRecord { block, payouts });
    }

    pub fn credit_block(&mut self, b: &Block, fees: u64, params: &ProtocolParams) {
        self.credit(b.hash(), compute_block_rewards(b, fees, params));
    }

    pub fn account(&self, address: &Address) -> AccountTotals {
        self.accounts.get(address).copied().unwrap_or_default()
    }

    pub fn total_paid(&self) -> u64 {
        self.accounts.values().map(AccountTotals::total).sum()
    }
}
