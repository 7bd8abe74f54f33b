//! Closed-form reward statistics for solo miners.
//!
//! Per strong block, a Bitcoin miner with hash share `alpha` earns
//! `I * (R + F)` where `I ~ Bernoulli(alpha)`. With weak headers the miner
//! earns `I * (c*R + F) + c*gamma*R*(T_s/T_w) * N`, where `N` counts the weak
//! headers it contributed to the block: `N` is a `Bernoulli(alpha)` thinning
//! of `L ~ Geometric(T_s/T_w)` (failures before the first success).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum AnalyticsError {
    #[error("mean reward is zero")]
    ZeroMean,
    #[error("no pool share reaches the target coefficient of variation")]
    NoSolution,
}

/// `c = 1 / (1 + gamma * (ratio - 1) / ratio)` with `ratio = T_w/T_s`.
pub fn scaling_constant(ratio: &BigRational, gamma: &BigRational) -> BigRational {
    let one = BigRational::one();
    (&one + gamma * (ratio - &one) / ratio).recip()
}

pub fn scaling_constant_f64(ratio: f64, gamma: f64) -> f64 {
    1.0 / (1.0 + gamma * (ratio - 1.0) / ratio)
}

/// Exact `c` for integer ratio and gamma.
pub fn scaling_constant_int(ratio: u64, gamma: u64) -> BigRational {
    scaling_constant(
        &BigRational::from_integer(BigInt::from(ratio)),
        &BigRational::from_integer(BigInt::from(gamma)),
    )
}

/// Variance of `X_1 + ... + X_N` for i.i.d. `X_i` independent of `N`.
pub fn variance_of_random_sum(e_n: f64, var_n: f64, e_x: f64, var_x: f64) -> f64 {
    e_n * var_x + var_n * e_x * e_x
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardModelInputs {
    pub alpha: f64,
    /// `T_w / T_s`.
    pub ratio: f64,
    pub gamma: f64,
    pub reward: f64,
    pub fee_mean: f64,
    pub fee_var: f64,
}

impl RewardModelInputs {
    pub fn new(alpha: f64, ratio: f64, gamma: f64, reward: f64) -> RewardModelInputs {
        RewardModelInputs {
            alpha,
            ratio,
            gamma,
            reward,
            fee_mean: 0.0,
            fee_var: 0.0,
        }
    }

    pub fn with_alpha(self, alpha: f64) -> RewardModelInputs {
        RewardModelInputs { alpha, ..self }
    }

    fn fee_term(&self) -> f64 {
        let a = self.alpha;
        variance_of_random_sum(a, a * (1.0 - a), self.fee_mean, self.fee_var)
    }
}

/// `alpha * Var(F) + alpha * (1 - alpha) * (E(F)^2 + R^2)`.
pub fn bitcoin_reward_variance(x: &RewardModelInputs) -> f64 {
    let a = x.alpha;
    a * (1.0 - a) * x.reward * x.reward + x.fee_term()
}

/// Mean and variance of the number of weak headers a miner contributes to
/// one block.
pub fn weak_count_variance(alpha: f64, ratio: f64) -> (f64, f64) {
    let e_l = ratio - 1.0;
    let var_l = ratio * ratio - ratio;
    let e_n = alpha * e_l;
    let var_n = variance_of_random_sum(e_l, var_l, alpha, alpha * (1.0 - alpha));
    (e_n, var_n)
}

/// `(cR)^2 * alpha(1-alpha) + Var(I F) + (c gamma R / ratio)^2 * Var(N)`.
pub fn strongchain_reward_variance(x: &RewardModelInputs) -> f64 {
    let a = x.alpha;
    let c = scaling_constant_f64(x.ratio, x.gamma);
    let strong = c * x.reward;
    let weak = c * x.gamma * x.reward / x.ratio;
    let (_, var_n) = weak_count_variance(a, x.ratio);
    strong * strong * a * (1.0 - a) + x.fee_term() + weak * weak * var_n
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Protocol {
    Bitcoin,
    StrongChain,
}

/// Expected per-block reward: `alpha * (R + E(F))` in both protocols, since
/// the scaling constant keeps the expected issuance per block at `R`.
pub fn mean_reward(x: &RewardModelInputs) -> f64 {
    x.alpha * (x.reward + x.fee_mean)
}

pub fn coefficient_of_variation(
    x: &RewardModelInputs,
    protocol: Protocol,
) -> Result<f64, AnalyticsError> {
    let mean = mean_reward(x);
    if mean == 0.0 {
        return Err(AnalyticsError::ZeroMean);
    }
    let var = match protocol {
        Protocol::Bitcoin => bitcoin_reward_variance(x),
        Protocol::StrongChain => strongchain_reward_variance(x),
    };
    Ok(var.sqrt() / mean)
}

/// Hash share at which a miner has the same coefficient of variation with
/// weak headers as a miner of `bitcoin_share` has without them.
pub fn equivalent_pool_share(
    bitcoin_share: f64,
    ratio: f64,
    gamma: f64,
) -> Result<f64, AnalyticsError> {
    let base = RewardModelInputs::new(bitcoin_share, ratio, gamma, 1.0);
    let target = coefficient_of_variation(&base, Protocol::Bitcoin)?;
    let cov = |a: f64| coefficient_of_variation(&base.with_alpha(a), Protocol::StrongChain);
    if cov(bitcoin_share)? > target {
        return Err(AnalyticsError::NoSolution);
    }
    // CoV grows without bound as alpha -> 0, so the root lies in (0, share].
    let (mut lo, mut hi) = (0.0f64, bitcoin_share);
    for _ in 0..200 {
        if hi - lo <= 1e-9 * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if cov(mid)? > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// `P(L > n)` for the number of weak headers `L` in a block:
/// `(1 - T_s/T_w)^(n + 1)`.
pub fn weak_count_tail(ratio: f64, n: u64) -> f64 {
    let q = 1.0 - 1.0 / ratio;
    ((n + 1) as f64 * q.ln()).exp()
}

/// `P(L = k)`.
pub fn weak_count_pmf(ratio: f64, k: u64) -> f64 {
    let p = 1.0 / ratio;
    p * (k as f64 * (1.0 - p).ln()).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CovRow {
    pub alpha: f64,
    pub ratio: f64,
    pub gamma: f64,
    pub cov_bitcoin: f64,
    pub cov_strongchain: f64,
}

/// Coefficients of variation over a grid of hash shares.
pub fn cov_curve(alphas: &[f64], ratio: f64, gamma: f64) -> Vec<CovRow> {
    alphas
        .iter()
        .filter(|&&a| a > 0.0)
        .map(|&alpha| {
            let x = RewardModelInputs::new(alpha, ratio, gamma, 1.0);
            CovRow {
                alpha,
                ratio,
                gamma,
                cov_bitcoin: coefficient_of_variation(&x, Protocol::Bitcoin).expect("alpha > 0"),
                cov_strongchain: coefficient_of_variation(&x, Protocol::StrongChain)
                    .expect("alpha > 0"),
            }
        })
        .collect()
}

/// Log-spaced grid of `n` points between `lo` and `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n < 2 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolRow {
    pub pool: String,
    pub bitcoin_share: f64,
    pub equivalent_share: f64,
    pub reduction: f64,
}

pub fn pool_table(
    pools: &[(&str, f64)],
    ratio: f64,
    gamma: f64,
) -> Result<Vec<PoolRow>, AnalyticsError> {
    pools
        .iter()
        .map(|&(name, share)| {
            let eq = equivalent_pool_share(share, ratio, gamma)?;
            Ok(PoolRow {
                pool: name.to_string(),
                bitcoin_share: share,
                equivalent_share: eq,
                reduction: share / eq,
            })
        })
        .collect()
}

/// Convenience for reports.
pub fn to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}
