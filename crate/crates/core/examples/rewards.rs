//! Reward split for a block and a running ledger over several blocks.

use num_traits::ToPrimitive;
use strongchain::consensus::reward::exact_minted;
use strongchain::consensus::{
    compute_block_rewards, Address, ChainState, ProtocolParams, RewardLedger, RewardSchedule,
};
use strongchain::mining::grind::{mine_on_tip, GrindOutcome};

fn main() {
    let p = ProtocolParams::toy(11, 32, 5);
    let s = RewardSchedule::new(&p);
    println!("c = {:.6}", p.scaling_constant().to_f64().unwrap());
    println!("strong {} weak {} (atomic units)", s.strong, s.weak);
    for n in [0u64, 31, 100] {
        println!(
            "  {n:>3} weak headers -> minted {} (exact {:.3})",
            s.minted(n),
            exact_minted(n, &p).to_f64().unwrap()
        );
    }

    let mut chain = ChainState::new(p.clone(), 0);
    let mut ledger = RewardLedger::new();
    for h in 1..=4u32 {
        let miner = Address::from_id(h % 2);
        let GrindOutcome::Strong(b) = mine_on_tip(&chain, miner, 600 * h, 1 << 24) else {
            panic!("budget");
        };
        ledger.credit(b.hash(), compute_block_rewards(&b, 1_000, &p));
        chain.submit_block(b, (600 * h) as u64).unwrap();
    }
    for (addr, t) in &ledger.accounts {
        println!(
            "{} strong={} weak={} fee={}",
            addr.to_hex(),
            t.strong,
            t.weak,
            t.fee
        );
    }
    println!("total paid {}", ledger.total_paid());
}
