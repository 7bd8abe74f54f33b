//! Mines a short chain at toy difficulty with real double-SHA256 grinding.
//! Weak hits found along the way are folded into the block being ground.

use strongchain::consensus::{
    effective_timestamp, Address, ChainState, ProtocolParams, RewardSchedule,
};
use strongchain::mining::grind::{mine_on_tip, GrindOutcome};

fn main() {
    // 2^-12 of hashes are strong, 16 times as many are weak.
    let params = ProtocolParams::toy(12, 16, 4);
    let mut chain = ChainState::new(params.clone(), 0);
    let miner = Address::from_id(7);
    let schedule = RewardSchedule::new(&params);
    println!(
        "strong reward {} / weak reward {}",
        schedule.strong, schedule.weak
    );

    for height in 1..=5u32 {
        let ts = 600 * height;
        let GrindOutcome::Strong(block) = mine_on_tip(&chain, miner, ts, 1 << 24) else {
            panic!("no block within budget");
        };
        let p = chain.child_params(&chain.best_tip()).unwrap();
        println!(
            "#{height} {} weak={} minted={} eff_ts={:.1}",
            block.hash(),
            block.weak_headers.len(),
            schedule.minted(block.weak_headers.len() as u64),
            effective_timestamp(&block, &p),
        );
        chain.submit_block(block, ts as u64).expect("valid block");
    }
    println!("main chain length {}", chain.main_chain().len());
}
