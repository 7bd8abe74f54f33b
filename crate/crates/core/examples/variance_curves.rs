//! Coefficient of variation of per-block rewards with and without weak
//! headers, plus a simulated point for comparison.

use strongchain::analytics::{
    coefficient_of_variation, cov_curve, log_grid, Protocol, RewardModelInputs,
};
use strongchain::sim::{run_scenario, SimConfig, StrategySpec};

fn main() {
    println!("alpha      bitcoin   ratio=1024,gamma=10");
    for r in cov_curve(&log_grid(1e-3, 0.5, 8), 1024.0, 10.0) {
        println!(
            "{:<10.4} {:<9.3} {:.3}",
            r.alpha, r.cov_bitcoin, r.cov_strongchain
        );
    }

    let alpha = 0.1;
    let mut cfg = SimConfig::two_party(alpha, StrategySpec::Honest, 64, 6.0);
    cfg.horizon_blocks = 20_000;
    let m = run_scenario(&cfg).unwrap();
    let analytic = coefficient_of_variation(
        &RewardModelInputs::new(alpha, 64.0, 6.0, 1.0),
        Protocol::StrongChain,
    )
    .unwrap();
    println!(
        "ratio 64, alpha {alpha}: simulated {:.4} analytic {:.4}",
        m.miners[0].reward_cov(),
        analytic
    );
}
