//! Difficulty windows and retargeting.
//!
//! Heights `k*W + 1 ..= (k+1)*W` form window `k`; the genesis block (height 0)
//! anchors window 0. The first block of a window measures the elapsed time of
//! the previous window from the timestamp of the block that closed the window
//! before it, so a window spans exactly `W` block intervals.

use num_bigint::BigUint;
use num_traits::Zero;
use thiserror::Error;

use super::params::ProtocolParams;
use super::target::Target;

/// Maximum per-window adjustment factor.
pub const RETARGET_CLAMP: u64 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum RetargetError {
    #[error("window elapsed time must be positive, got {0} s")]
    NonPositiveElapsed(i64),
}

/// `T_new = T_old * elapsed / (W * interval)`, with elapsed clamped to a
/// factor of four either way, the result capped so that the weak target stays
/// within `T_max`, and `T_w / T_s` carried over unchanged.
pub fn retarget(
    window_first_ts: i64,
    window_last_ts: i64,
    old_strong: &Target,
    old_weak: &Target,
    params: &ProtocolParams,
) -> Result<(Target, Target), RetargetError> {
    let elapsed = window_last_ts - window_first_ts;
    if elapsed <= 0 {
        return Err(RetargetError::NonPositiveElapsed(elapsed));
    }
    Ok(retarget_clamped(elapsed, old_strong, old_weak, params))
}

fn retarget_clamped(
    elapsed: i64,
    old_strong: &Target,
    old_weak: &Target,
    params: &ProtocolParams,
) -> (Target, Target) {
    let expected = params.retarget_window as u64 * params.target_block_interval as u64;
    let lo = (expected / RETARGET_CLAMP).max(1);
    let hi = expected * RETARGET_CLAMP;
    let elapsed = (elapsed.max(0) as u64).clamp(lo, hi);

    let mut strong: BigUint = old_strong.value() * elapsed / expected;
    // Keep T_w = T_s * (old ratio) <= T_max.
    let strong_cap: BigUint = params.max_target.value() * old_strong.value() / old_weak.value();
    if strong > strong_cap {
        strong = strong_cap;
    }
    if strong.is_zero() {
        strong = BigUint::from(1u8);
    }
    let strong = Target::new(strong).compact_rounded();
    let weak = Target::new(old_weak.value() * strong.value() / old_strong.value());
    (strong, weak)
}

/// Window bookkeeping for one block.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowState {
    pub height: u64,
    pub timestamp: u32,
    /// Timestamp of the block that closed the previous window.
    pub window_base_ts: u32,
    pub strong_target: Target,
    pub weak_target: Target,
}

impl WindowState {
    pub fn genesis(timestamp: u32, params: &ProtocolParams) -> WindowState {
        WindowState {
            height: 0,
            timestamp,
            window_base_ts: timestamp,
            strong_target: params.strong_target.clone(),
            weak_target: params.weak_target.clone(),
        }
    }

    /// Targets and window anchor for a child of this block. The child's own
    /// timestamp is filled in by [`WindowState::advance`].
    pub fn child(&self, params: &ProtocolParams) -> WindowState {
        let height = self.height + 1;
        let w = params.retarget_window as u64;
        if (height - 1).is_multiple_of(w) {
            let (strong, weak) = if height > 1 {
                let elapsed = self.timestamp as i64 - self.window_base_ts as i64;
                retarget_clamped(elapsed, &self.strong_target, &self.weak_target, params)
            } else {
                (self.strong_target.clone(), self.weak_target.clone())
            };
            WindowState {
                height,
                timestamp: 0,
                window_base_ts: self.timestamp,
                strong_target: strong,
                weak_target: weak,
            }
        } else {
            WindowState {
                height,
                timestamp: 0,
                window_base_ts: self.window_base_ts,
                strong_target: self.strong_target.clone(),
                weak_target: self.weak_target.clone(),
            }
        }
    }

    pub fn advance(&self, params: &ProtocolParams, timestamp: u32) -> WindowState {
        WindowState {
            timestamp,
            ..self.child(params)
        }
    }

    pub fn params(&self, base: &ProtocolParams) -> ProtocolParams {
        base.with_targets(self.strong_target.clone(), self.weak_target.clone())
    }
}
