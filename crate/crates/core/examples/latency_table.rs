//! Stale rates and fairness of a 10% miner under Weibull network delays.

use strongchain::sim::{run_scenario, LatencyModel, SimConfig, StrategySpec};

fn main() {
    for (ratio, gamma) in [(1u64, 0.0), (64, 6.0)] {
        for mean in [0.53, 5.3, 53.0] {
            let mut cfg = SimConfig::two_party(0.1, StrategySpec::Honest, ratio, gamma);
            cfg.horizon_blocks = 5_000;
            cfg.latency = LatencyModel::weibull(mean);
            let m = run_scenario(&cfg).unwrap();
            println!(
                "ratio {ratio:>4} latency {mean:>5}s: strong stale {:.4} weak stale {} fairness {:.3}",
                m.strong_stale_rate,
                m.weak_stale_rate.map_or("-".into(), |w| format!("{w:.4}")),
                m.miners[0].fairness
            );
        }
    }
}
