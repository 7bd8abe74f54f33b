//! Loads a scenario from TOML and prints the metrics CSV.
//!
//!     cargo run --example simulate_config -- path/to/scenario.toml

use strongchain::sim::{run_scenario, write_csv, SimConfig};

const SAMPLE: &str = r#"
name = "three-miners"
horizon_blocks = 2000
ratio = 128
gamma = 7

[latency]
family = "weibull"
mean = 5.3

[[miners]]
alpha = 0.2
strategy = "spiteful"

[[miners]]
alpha = 0.3
strategy = "reclusive"

[[miners]]
alpha = 0.5
strategy = "honest"
"#;

fn main() {
    let cfg = match std::env::args().nth(1) {
        Some(path) => SimConfig::load(path.as_ref()),
        None => SimConfig::from_toml(SAMPLE),
    }
    .unwrap_or_else(|e| {
        eprintln!("{e}");
        std::process::exit(2);
    });
    let m = run_scenario(&cfg).unwrap();
    write_csv(std::io::stdout(), std::slice::from_ref(&m)).unwrap();
    for (i, x) in m.miners.iter().enumerate() {
        println!(
            "miner {i} {:<10} share {:.4} fairness {:.3}",
            x.strategy, x.reward_share, x.fairness
        );
    }
}
