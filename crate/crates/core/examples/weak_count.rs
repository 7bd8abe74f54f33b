//! Number of weak headers per block: geometric with mean ratio - 1.

use strongchain::analytics::{weak_count_pmf, weak_count_tail};
use strongchain::consensus::Address;
use strongchain::consensus::ProtocolParams;
use strongchain::mining::oracle::{calibrated_hash_rate, MinerIdentity, MiningOracle};
use strongchain::mining::rng::stream_rng;

fn main() {
    let ratio = 1024u64;
    let p = ProtocolParams::toy(32, ratio, 10);
    let oracle = MiningOracle::new(
        vec![MinerIdentity {
            address: Address::from_id(0),
            alpha: 1.0,
        }],
        &p,
        calibrated_hash_rate(&p, 600.0),
    )
    .unwrap();
    let mut rng = stream_rng(1, 0);
    let n = 20_000;
    let counts: Vec<u64> = (0..n)
        .map(|_| oracle.weak_count_until_strong(&mut rng))
        .collect();
    let mean = counts.iter().sum::<u64>() as f64 / n as f64;
    println!("sampled mean {mean:.1}, expected {}", ratio - 1);
    println!("P(n = 0) = {:.6}", weak_count_pmf(ratio as f64, 0));
    println!("P(n > 5000) = {:.3e}", weak_count_tail(ratio as f64, 5000));
    println!(
        "P(n > 16667) = {:.4e}",
        weak_count_tail(ratio as f64, 16_667)
    );
}
