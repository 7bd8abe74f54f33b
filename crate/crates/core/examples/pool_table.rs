//! Pool size giving the same reward variance once weak headers are paid.

use strongchain::analytics::pool_table;
use strongchain::harness::POOLS;

fn main() {
    let pools: Vec<(&str, f64)> = POOLS.iter().map(|p| (p.name, p.bitcoin_share)).collect();
    for r in pool_table(&pools, 1024.0, 10.0).unwrap() {
        println!(
            "{:<12} {:>6.1}% -> {:>7.3}%  ({:.0}x)",
            r.pool,
            100.0 * r.bitcoin_share,
            100.0 * r.equivalent_share,
            r.reduction
        );
    }
}
