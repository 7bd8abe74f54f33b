//! Toy-difficulty chain builders and the protocol property checks shared by
//! the integration tests and the acceptance runner.

#![allow(dead_code)]

use std::collections::{HashMap, HashSet};
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

use strongchain::analytics::{coefficient_of_variation, Protocol, RewardModelInputs};
use strongchain::consensus::reward::exact_minted;
use strongchain::consensus::validate::{check_weak_headers, TimeWindow};
use strongchain::consensus::{
    block_pow, compute_block_rewards, genesis_header, Address, Block, BlockHeader, ChainError,
    ChainState, CompressedWeakHeader, Hash256, ProtocolParams, RewardKind, SpvClient, SpvUpdate,
};
use strongchain::mining::{block_template, grind_block, GrindOutcome, GrindStep, Grinder};

pub type Check = Result<(), String>;

/// 2^-8 strong, 2^-6 weak.
pub fn toy() -> ProtocolParams {
    ProtocolParams::toy(8, 4, 1)
}

pub fn ts_for(chain: &ChainState, parent: &Hash256, jitter: u32) -> u32 {
    chain.get(parent).unwrap().block.header.timestamp + 600 + jitter
}

/// Grinds `n` weak headers on `parent` without keeping the block.
pub fn weak_on(
    chain: &ChainState,
    parent: &Hash256,
    who: u32,
    ts: u32,
    n: usize,
) -> Vec<BlockHeader> {
    let (t, p) = block_template(chain, parent, Address::from_id(who), ts).unwrap();
    let mut g = Grinder::new(t, Vec::new(), Vec::new(), p);
    let mut out = Vec::new();
    while out.len() < n {
        if let GrindStep::Weak(h) = g.step() {
            out.push(h);
        }
    }
    out
}

/// Grinds a child of `parent` carrying `weak` plus whatever weak headers turn
/// up while grinding.
pub fn mine_child(
    chain: &ChainState,
    parent: &Hash256,
    who: u32,
    ts: u32,
    weak: &[BlockHeader],
) -> Block {
    let (t, p) = block_template(chain, parent, Address::from_id(who), ts).unwrap();
    let weak = weak.iter().map(BlockHeader::compress).collect();
    let txs = vec![who.to_le_bytes().to_vec(), b"payment".to_vec()];
    match grind_block(t, weak, txs, &p, u64::MAX) {
        GrindOutcome::Strong(b) => b,
        _ => unreachable!(),
    }
}

fn ratio(n: &num_bigint::BigUint, d: &num_bigint::BigUint) -> BigRational {
    BigRational::new(BigInt::from(n.clone()), BigInt::from(d.clone()))
}

/// Fork choice recomputed from scratch: the score of a block is the strong
/// and weak work along its chain plus the work of weak headers pending on it.
/// Ties go to the block seen first.
#[derive(Default)]
struct ForkOracle {
    parent: HashMap<Hash256, Hash256>,
    n_weak: HashMap<Hash256, usize>,
    order: Vec<Hash256>,
    loose: HashMap<Hash256, HashSet<Hash256>>,
    included: HashMap<Hash256, HashSet<Hash256>>,
}

impl ForkOracle {
    fn new(genesis: Hash256) -> ForkOracle {
        let mut o = ForkOracle::default();
        o.n_weak.insert(genesis, 0);
        o.order.push(genesis);
        o
    }

    fn add_block(&mut self, b: &Block) {
        let h = b.hash();
        let p = b.header.prev_hash;
        self.parent.insert(h, p);
        self.n_weak.insert(h, b.weak_headers.len());
        self.order.push(h);
        let inc = self.included.entry(p).or_default();
        for w in b.decompressed_weak() {
            inc.insert(w.hash());
        }
    }

    fn add_weak(&mut self, w: &BlockHeader) {
        self.loose.entry(w.prev_hash).or_default().insert(w.hash());
    }

    fn pending(&self, h: &Hash256) -> usize {
        let empty = HashSet::new();
        let inc = self.included.get(h).unwrap_or(&empty);
        self.loose
            .get(h)
            .map_or(0, |s| s.iter().filter(|x| !inc.contains(x)).count())
    }

    fn best(&self, p: &ProtocolParams) -> Hash256 {
        let s = ratio(p.max_target.value(), p.strong_target.value());
        let w = ratio(p.max_target.value(), p.weak_target.value());
        let mut best: Option<(BigRational, Hash256)> = None;
        for h in &self.order {
            let mut score = w.clone() * BigRational::from_integer(self.pending(h).into());
            let mut cur = *h;
            while let Some(parent) = self.parent.get(&cur) {
                score = score + &s + &w * BigRational::from_integer(self.n_weak[&cur].into());
                cur = *parent;
            }
            if best.as_ref().is_none_or(|(b, _)| score > *b) {
                best = Some((score, *h));
            }
        }
        best.unwrap().1
    }
}

/// Builds the tree where block `i` (1-based) extends `shape[i-1]` (0 is
/// genesis), with loose weak headers sprinkled in, and compares the chain's
/// tip with the oracle after every step.
pub fn fork_choice_matches_oracle(shape: &[usize], seed: u64) -> Check {
    let mut rng = StdRng::seed_from_u64(seed);
    let p = toy();
    let mut chain = ChainState::new(p.clone(), 0);
    let mut oracle = ForkOracle::new(chain.genesis());
    let mut hashes = vec![chain.genesis()];
    let mut loose: HashMap<Hash256, Vec<BlockHeader>> = HashMap::new();
    let mut who = 10;
    for (i, &pi) in shape.iter().enumerate() {
        for _ in 0..rng.gen_range(0..3) {
            let target = *hashes.choose(&mut rng).unwrap();
            who += 1;
            let ts = ts_for(&chain, &target, rng.gen_range(0..5));
            for w in weak_on(&chain, &target, who, ts, 1) {
                chain
                    .submit_weak_header(w, ts as u64)
                    .map_err(|e| e.to_string())?;
                oracle.add_weak(&w);
                loose.entry(target).or_default().push(w);
            }
            if chain.best_tip() != oracle.best(&p) {
                return Err(format!(
                    "shape {shape:?} seed {seed}: tip differs after a weak header"
                ));
            }
        }
        let parent = hashes[pi];
        let mut carry: Vec<BlockHeader> = loose.get(&parent).cloned().unwrap_or_default();
        carry.retain(|_| rng.gen_bool(0.5));
        let ts = ts_for(&chain, &parent, rng.gen_range(0..5));
        let b = mine_child(&chain, &parent, i as u32 + 1, ts, &carry);
        oracle.add_block(&b);
        hashes.push(b.hash());
        chain
            .submit_block(b, ts as u64)
            .map_err(|e| e.to_string())?;
        if chain.best_tip() != oracle.best(&p) {
            return Err(format!(
                "shape {shape:?} seed {seed}: tip differs after block {}",
                i + 1
            ));
        }
    }
    Ok(())
}

/// Every parent assignment for four blocks: 1 * 2 * 3 * 4 shapes.
pub fn four_block_shapes() -> Vec<[usize; 4]> {
    let mut out = Vec::new();
    for a in 0..2 {
        for b in 0..3 {
            for c in 0..4 {
                out.push([0, a, b, c]);
            }
        }
    }
    out
}

pub fn random_header(rng: &mut StdRng) -> BlockHeader {
    BlockHeader {
        version: rng.gen(),
        prev_hash: Hash256(rng.gen()),
        tx_root: Hash256(rng.gen()),
        timestamp: rng.gen(),
        target_bits: rng.gen(),
        nonce: rng.gen(),
        coinbase: Address(rng.gen()),
    }
}

pub fn header_round_trip(h: &BlockHeader) -> Check {
    let bytes = h.serialize();
    if bytes.len() != 100 {
        return Err(format!("strong header is {} bytes", bytes.len()));
    }
    if BlockHeader::deserialize(&bytes).map_err(|e| e.to_string())? != *h {
        return Err("strong header round trip".into());
    }
    let c = h.compress();
    let cb = c.serialize();
    if cb.len() != 60 {
        return Err(format!("weak header is {} bytes", cb.len()));
    }
    let back = CompressedWeakHeader::deserialize(&cb).map_err(|e| e.to_string())?;
    let ctx = BlockHeader {
        tx_root: Hash256::ZERO,
        nonce: 0,
        timestamp: 0,
        coinbase: Address([0; 20]),
        ..*h
    };
    if back != c || back.decompress(&ctx) != *h {
        return Err("weak header round trip".into());
    }
    if BlockHeader::deserialize(&bytes[..99]).is_ok()
        || CompressedWeakHeader::deserialize(&cb[..59]).is_ok()
    {
        return Err("truncated header accepted".into());
    }
    Ok(())
}

pub fn block_encoding_round_trip(b: &Block) -> Check {
    match Block::decode(&b.encode()) {
        Ok(d) if d == *b => Ok(()),
        Ok(_) => Err("decoded block differs".into()),
        Err(e) => Err(e.to_string()),
    }
}

/// A block with at least `min_weak` weak headers on top of genesis.
pub fn block_with_weak(seed: u32, min_weak: usize) -> (ChainState, Block) {
    let chain = ChainState::new(toy(), 0);
    let g = chain.genesis();
    let weak = weak_on(&chain, &g, 1000 + seed, 600, min_weak);
    let b = mine_child(&chain, &g, seed, 600, &weak);
    (chain, b)
}

#[derive(Debug, Clone)]
pub enum Mutation {
    FlipWeakBit { header: usize, bit: usize },
    DropWeak(usize),
    DuplicateWeak(usize),
    SwapWeak,
    FlipBindingBit(usize),
    DropBinding,
}

/// Applies `m` to a valid block and checks the full node rejects the result.
pub fn mutation_rejected(seed: u32, m: &Mutation) -> Check {
    let (mut chain, good) = block_with_weak(seed, 2);
    let mut b = good.clone();
    let n = b.weak_headers.len();
    match *m {
        Mutation::FlipWeakBit { header, bit } => {
            let i = header % n;
            let mut bytes = b.weak_headers[i].serialize();
            let bit = bit % (bytes.len() * 8);
            bytes[bit / 8] ^= 1 << (bit % 8);
            b.weak_headers[i] = CompressedWeakHeader::deserialize(&bytes).unwrap();
        }
        Mutation::DropWeak(i) => {
            b.weak_headers.remove(i % n);
        }
        Mutation::DuplicateWeak(i) => {
            let w = b.weak_headers[i % n];
            b.weak_headers.push(w);
        }
        Mutation::SwapWeak => b.weak_headers.swap(0, 1),
        Mutation::FlipBindingBit(bit) => {
            let tx = &mut b.transactions[0];
            let bit = bit % (tx.len() * 8);
            tx[bit / 8] ^= 1 << (bit % 8);
        }
        Mutation::DropBinding => {
            b.transactions.remove(0);
        }
    }
    if b == good {
        return Ok(());
    }
    // A header-only client never sees transaction bodies, so it only has to
    // catch changes to the weak set.
    let mut spv = SpvClient::new(toy(), genesis_header(&toy(), 0));
    if b.weak_headers != good.weak_headers && spv.apply(&SpvUpdate::from_block(&b), 600).is_ok() {
        return Err("spv client accepted a mutated block".into());
    }
    match chain.submit_block(b, 600) {
        Err(ChainError::Invalid(_)) => Ok(()),
        other => Err(format!("mutated block not rejected: {other:?}")),
    }
}

/// Minted amount is the floor of the exact value per payout: never above it
/// and below by less than one unit per payout. Fees pass through unchanged.
pub fn rewards_conserved(n_weak: u64, ratio: u64, gamma: u64, fees: u64) -> Check {
    let p = ProtocolParams::toy(8, ratio, gamma);
    let weak: Vec<CompressedWeakHeader> = (0..n_weak)
        .map(|i| CompressedWeakHeader {
            tx_root: Hash256::ZERO,
            timestamp: i as u32,
            nonce: i as u32,
            coinbase: Address::from_id(i as u32 % 3),
        })
        .collect();
    let template = genesis_header(&p, 0);
    let b = Block::assemble(template, weak, Vec::new());
    let pay = compute_block_rewards(&b, fees, &p);
    let minted: u64 = pay
        .iter()
        .filter(|x| x.kind != RewardKind::Fee)
        .map(|x| x.amount)
        .sum();
    let fee: u64 = pay
        .iter()
        .filter(|x| x.kind == RewardKind::Fee)
        .map(|x| x.amount)
        .sum();
    let exact = exact_minted(n_weak, &p);
    let minted_r = BigRational::from_integer(minted.into());
    let slack = BigRational::from_integer((n_weak + 1).into());
    if minted_r > exact || exact.clone() - minted_r >= slack {
        return Err(format!(
            "minted {minted} vs exact {}",
            exact.to_f64().unwrap()
        ));
    }
    if fee != fees {
        return Err(format!("fees {fee} paid out of {fees}"));
    }
    if pay.iter().filter(|x| x.kind == RewardKind::Weak).count() as u64 != n_weak {
        return Err("one weak payout per header".into());
    }
    Ok(())
}

/// With gamma 0 and no weak band the protocol is plain Bitcoin: constant
/// block work, the full reward to the finder, no weak headers found,
/// timestamps untouched, equal reward variance.
pub fn bitcoin_degeneracy(seed: u32) -> Check {
    let p = ProtocolParams::toy(8, 1, 0);
    let mut chain = ChainState::new(p.clone(), 0);
    for i in 0..3u32 {
        let tip = chain.best_tip();
        let ts = ts_for(&chain, &tip, 0);
        let b = mine_child(&chain, &tip, seed * 10 + i, ts, &[]);
        if !b.weak_headers.is_empty() {
            return Err("weak header found with an empty band".into());
        }
        if block_pow(&b, &p) != BigRational::from_integer(256.into()) {
            return Err("block work differs from T_max/T_s".into());
        }
        let pay = compute_block_rewards(&b, 0, &p);
        if pay.len() != 1 || pay[0].amount != p.block_reward {
            return Err(format!("payouts {pay:?}"));
        }
        if strongchain::consensus::effective_timestamp(&b, &p) != ts as f64 {
            return Err("effective timestamp moved".into());
        }
        chain
            .submit_block(b, ts as u64)
            .map_err(|e| e.to_string())?;
    }
    if chain.main_chain().len() != 4 {
        return Err("chain did not grow".into());
    }
    for alpha in [0.01, 0.1, 0.4] {
        let x = RewardModelInputs::new(alpha, 1024.0, 0.0, 1.0);
        let a = coefficient_of_variation(&x, Protocol::Bitcoin).unwrap();
        let b = coefficient_of_variation(&x, Protocol::StrongChain).unwrap();
        let x1 = RewardModelInputs::new(alpha, 1.0, 0.0, 1.0);
        let c = coefficient_of_variation(&x1, Protocol::StrongChain).unwrap();
        if (a - b).abs() > 1e-9 * a || (a - c).abs() > 1e-9 * a {
            return Err(format!("cov differs at alpha {alpha}: {a} {b} {c}"));
        }
    }
    Ok(())
}

/// Feeds the same random tree to a full node and a header-only client.
pub fn spv_agrees_with_full_node(seed: u64, blocks: usize) -> Check {
    let mut rng = StdRng::seed_from_u64(seed);
    let p = toy();
    let mut full = ChainState::new(p.clone(), 0);
    let mut spv = SpvClient::new(p.clone(), genesis_header(&p, 0));
    let mut hashes = vec![full.genesis()];
    for i in 0..blocks {
        let parent = *hashes.choose(&mut rng).unwrap();
        let ts = ts_for(&full, &parent, rng.gen_range(0..30));
        let b = mine_child(&full, &parent, i as u32, ts, &[]);
        let h = b.hash();
        let pow = spv
            .apply(&SpvUpdate::from_block(&b), ts as u64)
            .map_err(|e| format!("{e:?}"))?;
        if pow != block_pow(&b, &p) {
            return Err("spv block work differs".into());
        }
        full.submit_block(b, ts as u64).map_err(|e| e.to_string())?;
        hashes.push(h);
        if spv.best_tip() != full.best_tip() {
            return Err(format!("seed {seed}: tips differ after block {i}"));
        }
        if spv.cumulative_pow(&h) != Some(&full.get(&h).unwrap().cumulative_pow) {
            return Err("cumulative work differs".into());
        }
    }
    Ok(())
}

/// Mean validation time per weak header in microseconds.
pub fn weak_validation_micros() -> f64 {
    let p = ProtocolParams::toy(10, 64, 5);
    let chain = ChainState::new(p.clone(), 0);
    let g = chain.genesis();
    let weak = weak_on(&chain, &g, 7, 600, 64);
    let b = mine_child(&chain, &g, 1, 600, &weak);
    let time = TimeWindow::new(&p, 600, &[0]);
    let n = b.weak_headers.len();
    let reps = 200;
    let start = Instant::now();
    for _ in 0..reps {
        check_weak_headers(&b.header, &b.weak_headers, &p, &time).unwrap();
    }
    start.elapsed().as_secs_f64() * 1e6 / (reps * n) as f64
}
