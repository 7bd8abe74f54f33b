//! Reward share of a selfish miner against one honest miner.

use strongchain::sim::{run_scenario, LatencyModel, SimConfig, StrategySpec};

fn main() {
    for (ratio, gamma) in [(1u64, 0.0), (64, 6.0)] {
        for alpha in [0.2, 0.3, 0.4] {
            let mut cfg = SimConfig::two_party(alpha, StrategySpec::selfish(), ratio, gamma);
            cfg.horizon_blocks = 10_000;
            cfg.latency = LatencyModel::weibull(0.53);
            let m = run_scenario(&cfg).unwrap();
            println!(
                "ratio {ratio:>3} alpha {alpha}: share {:.4} stale {:.4}",
                m.miners[0].reward_share, m.strong_stale_rate
            );
        }
    }
}
