//! How far the weak-header-weighted timestamp pulls a manipulated block time
//! back toward the true time.

use strongchain::sim::{run_scenario, SimConfig, StrategySpec};

fn main() {
    for s in [StrategySpec::TimestampSlow, StrategySpec::TimestampFast] {
        let mut cfg = SimConfig::two_party(0.3, s, 256, 8.0);
        cfg.horizon_blocks = 5_000;
        let t = run_scenario(&cfg).unwrap().adversarial_timestamps;
        println!(
            "{:<15} blocks {:>5}  strong-only {:>8.0}s  effective {:>8.0}s  corrected by {:.0}s",
            s.name(),
            t.blocks,
            t.strong_dev,
            t.effective_dev,
            t.reduction()
        );
    }
}
