//! A header-only client follows the chain from (strong header, weak headers,
//! binding-transaction proof) triples and agrees with the full node.

use strongchain::consensus::{
    genesis_header, Address, ChainState, ProtocolParams, SpvClient, SpvUpdate,
};
use strongchain::mining::grind::{mine_on_tip, GrindOutcome};

fn main() {
    let p = ProtocolParams::toy(10, 16, 4);
    let mut full = ChainState::new(p.clone(), 0);
    let mut spv = SpvClient::new(p.clone(), genesis_header(&p, 0));

    for h in 1..=6u32 {
        let ts = 600 * h;
        let GrindOutcome::Strong(b) = mine_on_tip(&full, Address::from_id(h), ts, 1 << 24) else {
            panic!("budget");
        };
        let update = SpvUpdate::from_block(&b);
        let pow = spv.apply(&update, ts as u64).expect("spv accepts");
        println!(
            "#{h} weak={} pow={} proof_len={}",
            b.weak_headers.len(),
            pow,
            update.binding_proof.siblings.len()
        );
        full.submit_block(b, ts as u64).unwrap();
    }
    let tip = full.best_tip();
    println!("same tip: {}", spv.best_tip() == tip);
    println!(
        "same cumulative pow: {}",
        spv.cumulative_pow(&tip) == Some(&full.get(&tip).unwrap().cumulative_pow)
    );

    // Tampering with one weak header breaks the binding proof.
    let GrindOutcome::Strong(b) = mine_on_tip(&full, Address::from_id(99), 4200, 1 << 24) else {
        panic!("budget");
    };
    let mut bad = SpvUpdate::from_block(&b);
    if let Some(w) = bad.weak.first_mut() {
        w.nonce ^= 1;
        println!("tampered update: {:?}", spv.apply(&bad, 4200).unwrap_err());
    }
}
