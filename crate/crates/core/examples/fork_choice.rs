//! Two competing blocks on the same parent. The first one seen is the tip
//! until weak headers pointing at the other one tip the balance.

use strongchain::consensus::{Address, Block, BlockHeader, ChainState, Hash256, ProtocolParams};
use strongchain::mining::grind::{block_template, grind_block, GrindOutcome, GrindStep, Grinder};

fn mine(chain: &ChainState, parent: Hash256, who: u32, ts: u32) -> Block {
    let (t, p) = block_template(chain, &parent, Address::from_id(who), ts).unwrap();
    match grind_block(t, Vec::new(), Vec::new(), &p, u64::MAX) {
        GrindOutcome::Strong(b) => b,
        _ => unreachable!(),
    }
}

fn weak_on(chain: &ChainState, parent: Hash256, who: u32, ts: u32, n: usize) -> Vec<BlockHeader> {
    let (t, p) = block_template(chain, &parent, Address::from_id(who), ts).unwrap();
    let mut g = Grinder::new(t, Vec::new(), Vec::new(), p);
    let mut out = Vec::new();
    while out.len() < n {
        if let GrindStep::Weak(h) = g.step() {
            out.push(h);
        }
    }
    out
}

fn main() {
    let params = ProtocolParams::toy(10, 8, 3);
    let mut chain = ChainState::new(params, 0);
    let g = chain.genesis();

    let a = mine(&chain, g, 1, 600);
    let b = mine(&chain, g, 2, 601);
    let (ha, hb) = (a.hash(), b.hash());
    chain.submit_block(a, 700).unwrap();
    chain.submit_block(b, 700).unwrap();
    let score = |c: &ChainState, h: &Hash256| c.score(h).unwrap().to_string();
    println!("A {} score {}", ha, score(&chain, &ha));
    println!("B {} score {}", hb, score(&chain, &hb));
    println!("tip is A: {}", chain.best_tip() == ha);

    for w in weak_on(&chain, hb, 3, 650, 20) {
        chain.submit_weak_header(w, 700).unwrap();
        if chain.best_tip() == hb {
            println!(
                "tip moved to B after {} weak headers",
                chain.pending_count(&hb)
            );
            break;
        }
    }
    println!("score A {} / B {}", score(&chain, &ha), score(&chain, &hb));
}
