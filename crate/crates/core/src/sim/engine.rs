//! The event loop.
//!
//! Blocks live in one arena shared by all miners; each miner sees it through
//! a `View` that records which blocks and weak headers it has received and
//! keeps its best tip up to date incrementally. Work is tracked in integer
//! units: the first window's weak header is worth `2^32` and a strong header
//! `ratio` times that.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap, VecDeque};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;

use super::config::{LatencySampler, SimConfig, StrategySpec};
use super::metrics::{ratio_or_nan, BlockRecord, MinerMetrics, Moments, RunMetrics, TimestampAcc};
use crate::consensus::params::ATOMIC_PER_UNIT;
use crate::consensus::reward::RewardSchedule;
use crate::consensus::timestamp::weighted_timestamp;
use crate::mining::rng::{channel_rng, miner_rng};

const UNKNOWN: u64 = u64::MAX;
const GENESIS_FINDER: u16 = u16::MAX;
/// Blocks this far below the highest block drop their weak-header lists.
const PRUNE_DEPTH: u32 = 100;
/// A weak header is ignored when its parent is this far below the tip.
const STALE_WEAK_DEPTH: u32 = 2;
const INITIAL_WEAK_WORK: u128 = 1 << 32;

#[derive(Debug, Clone, Copy)]
struct WeakRec {
    finder: u16,
    ts: u32,
}

#[derive(Debug)]
struct SimBlock {
    parent: u32,
    height: u32,
    finder: u16,
    ts: u32,
    found_at: f64,
    cum_work: u128,
    /// Work of a weak header mined on this block.
    child_weak_work: u128,
    child_window_base_ts: u32,
    child_mtp: u32,
    n_weak: u32,
    weak_ts_sum: u64,
    public: bool,
    /// Indices into the parent's `weak` list.
    included: Vec<u32>,
    /// Weak headers mined on this block.
    weak: Vec<WeakRec>,
}

struct Arena {
    blocks: Vec<SimBlock>,
    /// `n_miners` counters per block.
    weak_by_finder: Vec<u32>,
    n_miners: usize,
    ratio: u128,
    max_height: u32,
    pruned: u32,
}

impl Arena {
    fn get(&self, id: u32) -> &SimBlock {
        &self.blocks[id as usize]
    }
}

#[derive(Debug, Default, Clone)]
struct Bits {
    known: Vec<u64>,
    covered: Vec<u64>,
}

fn bit(v: &[u64], i: u32) -> bool {
    v.get((i / 64) as usize)
        .is_some_and(|w| w >> (i % 64) & 1 == 1)
}

/// Sets bit `i`, returning whether it was already set.
fn set_bit(v: &mut Vec<u64>, i: u32) -> bool {
    let w = (i / 64) as usize;
    if v.len() <= w {
        v.resize(w + 1, 0);
    }
    let mask = 1u64 << (i % 64);
    let was = v[w] & mask != 0;
    v[w] |= mask;
    was
}

#[derive(Debug, Clone, Copy)]
enum Orphan {
    Block(u32),
    Weak(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum WeakAdd {
    Added,
    Known,
    Stale,
}

struct View {
    seq: Vec<u64>,
    pending: Vec<u32>,
    bits: VecDeque<Bits>,
    bits_base: u32,
    next_seq: u64,
    best: u32,
    best_score: u128,
    orphans: HashMap<u32, Vec<Orphan>>,
}

impl View {
    fn new(arena: &Arena) -> View {
        View {
            seq: vec![0],
            pending: vec![0],
            bits: VecDeque::new(),
            bits_base: 0,
            next_seq: 1,
            best: 0,
            best_score: arena.get(0).cum_work,
            orphans: HashMap::new(),
        }
    }

    fn knows(&self, id: u32) -> bool {
        self.seq.get(id as usize).is_some_and(|&s| s != UNKNOWN)
    }

    fn bits(&self, id: u32) -> Option<&Bits> {
        id.checked_sub(self.bits_base)
            .and_then(|k| self.bits.get(k as usize))
    }

    fn bits_mut(&mut self, id: u32) -> Option<&mut Bits> {
        let k = id.checked_sub(self.bits_base)? as usize;
        if self.bits.len() <= k {
            self.bits.resize_with(k + 1, Bits::default);
        }
        Some(&mut self.bits[k])
    }

    fn score(&self, arena: &Arena, id: u32) -> u128 {
        let b = arena.get(id);
        b.cum_work + self.pending[id as usize] as u128 * b.child_weak_work
    }

    fn best_height(&self, arena: &Arena) -> u32 {
        arena.get(self.best).height
    }

    fn consider(&mut self, arena: &Arena, id: u32) {
        let s = self.score(arena, id);
        if s > self.best_score
            || (s == self.best_score && self.seq[id as usize] < self.seq[self.best as usize])
        {
            self.best = id;
            self.best_score = s;
        }
    }

    fn rescan(&mut self, arena: &Arena) {
        let start = self.bits_base.min(self.best) as usize;
        self.best_score = self.score(arena, self.best);
        for id in start..self.seq.len() {
            if self.seq[id] != UNKNOWN {
                self.consider(arena, id as u32);
            }
        }
    }

    /// The parent must be known.
    fn add_block(&mut self, arena: &Arena, id: u32) {
        let i = id as usize;
        if self.seq.len() <= i {
            self.seq.resize(i + 1, UNKNOWN);
            self.pending.resize(i + 1, 0);
        }
        self.seq[i] = self.next_seq;
        self.next_seq += 1;
        let b = arena.get(id);
        let parent = b.parent;
        let mut dropped = 0;
        if !b.included.is_empty() {
            if let Some(bits) = self.bits_mut(parent) {
                for &w in &b.included {
                    let was_covered = set_bit(&mut bits.covered, w);
                    if !was_covered && bit(&bits.known, w) {
                        dropped += 1;
                    }
                }
            }
            self.pending[parent as usize] -= dropped;
        }
        if dropped > 0 && parent == self.best {
            self.rescan(arena);
        } else {
            self.consider(arena, id);
        }
    }

    fn add_weak(&mut self, arena: &Arena, parent: u32, idx: u32) -> WeakAdd {
        if parent < self.bits_base
            || arena.get(parent).height + STALE_WEAK_DEPTH <= self.best_height(arena)
        {
            return WeakAdd::Stale;
        }
        let bits = self.bits_mut(parent).expect("parent not pruned");
        if set_bit(&mut bits.known, idx) {
            return WeakAdd::Known;
        }
        if !bit(&bits.covered, idx) {
            self.pending[parent as usize] += 1;
            self.consider(arena, parent);
        }
        WeakAdd::Added
    }

    /// Weak headers on `parent` that this view knows and no known child
    /// has included.
    fn pending_on(&self, parent: u32) -> Vec<u32> {
        let Some(bits) = self.bits(parent) else {
            return Vec::new();
        };
        let mut out = Vec::with_capacity(self.pending[parent as usize] as usize);
        for (w, &k) in bits.known.iter().enumerate() {
            let mut free = k & !bits.covered.get(w).copied().unwrap_or(0);
            while free != 0 {
                out.push(w as u32 * 64 + free.trailing_zeros());
                free &= free - 1;
            }
        }
        out
    }

    fn prune(&mut self, upto: u32) {
        while self.bits_base < upto {
            self.bits.pop_front();
            self.bits_base += 1;
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Payload {
    Block(u32),
    Weak(u32, u32),
}

struct Msg {
    time: f64,
    seq: u64,
    to: u16,
    payload: Payload,
}

impl PartialEq for Msg {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Msg {}
impl PartialOrd for Msg {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Msg {
    // Reversed: BinaryHeap is a max-heap.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then(other.seq.cmp(&self.seq))
    }
}

struct Miner {
    strategy: StrategySpec,
    view: usize,
    /// Selfish miners also track what the network has seen.
    public_view: Option<usize>,
    rng: ChaCha8Rng,
    /// Event rate at weak work `INITIAL_WEAK_WORK`.
    base_rate: f64,
    next_time: f64,
    clock_work: u128,
    parent: u32,
    withheld: Vec<u32>,
    withheld_weak: Vec<(u32, u32)>,
    strong_found: u64,
    weak_found: u64,
}

struct Sim<'a> {
    cfg: &'a SimConfig,
    arena: Arena,
    views: Vec<View>,
    miners: Vec<Miner>,
    latency: LatencySampler,
    zero_latency: bool,
    channels: Vec<Option<ChaCha8Rng>>,
    heap: BinaryHeap<Msg>,
    immediate: VecDeque<(u16, Payload)>,
    stack: Vec<Payload>,
    msg_seq: u64,
    now: f64,
    genesis_ts: u64,
    invalid: u64,
    stale_weak: u64,
}

/// Runs one scenario. The config is validated first.
pub fn run_scenario(cfg: &SimConfig) -> Result<RunMetrics, super::config::ConfigError> {
    cfg.validate()?;
    let mut sim = Sim::new(cfg);
    sim.run();
    Ok(sim.finish())
}

impl<'a> Sim<'a> {
    fn new(cfg: &'a SimConfig) -> Sim<'a> {
        let n = cfg.miners.len();
        let g = cfg.genesis_timestamp;
        let genesis = SimBlock {
            parent: u32::MAX,
            height: 0,
            finder: GENESIS_FINDER,
            ts: g,
            found_at: 0.0,
            cum_work: 0,
            child_weak_work: INITIAL_WEAK_WORK,
            child_window_base_ts: g,
            child_mtp: g,
            n_weak: 0,
            weak_ts_sum: 0,
            public: true,
            included: Vec::new(),
            weak: Vec::new(),
        };
        let arena = Arena {
            blocks: vec![genesis],
            weak_by_finder: vec![0; n],
            n_miners: n,
            ratio: cfg.ratio as u128,
            max_height: 0,
            pruned: 0,
        };
        let mut views = Vec::new();
        let mut miners = Vec::with_capacity(n);
        for (i, m) in cfg.miners.iter().enumerate() {
            views.push(View::new(&arena));
            let view = views.len() - 1;
            let public_view = matches!(m.strategy, StrategySpec::Selfish { .. }).then(|| {
                views.push(View::new(&arena));
                views.len() - 1
            });
            let mut rng = miner_rng(cfg.seed, i);
            let base_rate = m.alpha * cfg.ratio as f64 / cfg.target_block_interval as f64;
            let next_time = draw_clock(&mut rng, 0.0, base_rate, INITIAL_WEAK_WORK);
            miners.push(Miner {
                strategy: m.strategy,
                view,
                public_view,
                rng,
                base_rate,
                next_time,
                clock_work: INITIAL_WEAK_WORK,
                parent: 0,
                withheld: Vec::new(),
                withheld_weak: Vec::new(),
                strong_found: 0,
                weak_found: 0,
            });
        }
        let zero_latency = matches!(cfg.latency.sampler(), LatencySampler::Constant(d) if d <= 0.0);
        let channels = (0..n * n)
            .map(|k| (!zero_latency && k / n != k % n).then(|| channel_rng(cfg.seed, k / n, k % n)))
            .collect();
        Sim {
            cfg,
            arena,
            views,
            miners,
            latency: cfg.latency.sampler(),
            zero_latency,
            channels,
            heap: BinaryHeap::new(),
            immediate: VecDeque::new(),
            stack: Vec::new(),
            msg_seq: 0,
            now: 0.0,
            genesis_ts: g as u64,
            invalid: 0,
            stale_weak: 0,
        }
    }

    fn run(&mut self) {
        let horizon = self.cfg.horizon_blocks;
        let mut strong_total = 0u64;
        loop {
            if let Some((to, p)) = self.immediate.pop_front() {
                self.deliver(to as usize, p);
                continue;
            }
            let mining = strong_total < horizon;
            let (m, tm) = if mining {
                self.miners
                    .iter()
                    .enumerate()
                    .map(|(i, m)| (i, m.next_time))
                    .min_by(|a, b| a.1.total_cmp(&b.1))
                    .expect("at least one miner")
            } else {
                (0, f64::INFINITY)
            };
            match self.heap.peek() {
                Some(msg) if msg.time <= tm => {
                    let msg = self.heap.pop().expect("peeked");
                    self.now = msg.time;
                    self.deliver(msg.to as usize, msg.payload);
                }
                None if !mining => break,
                _ => {
                    self.now = tm;
                    if self.mine(m) {
                        strong_total += 1;
                    }
                }
            }
        }
    }

    fn stamp(&self, m: usize, parent: u32) -> u32 {
        let now = self.now.floor() as u64 + self.genesis_ts;
        let floor = self.arena.get(parent).child_mtp as u64 + 1;
        let ts = match self.miners[m].strategy {
            StrategySpec::TimestampSlow => floor,
            StrategySpec::TimestampFast => now + self.cfg.max_future_drift as u64,
            _ => now.max(floor),
        };
        u32::try_from(ts).unwrap_or(u32::MAX)
    }

    /// One hit for miner `m`. Returns whether it was strong.
    fn mine(&mut self, m: usize) -> bool {
        let parent = self.miners[m].parent;
        let strong = {
            let u: f64 = self.miners[m].rng.gen();
            u * (self.cfg.ratio as f64) < 1.0
        };
        let ts = self.stamp(m, parent);
        let view = self.miners[m].view;
        if strong {
            let mut included = self.views[view].pending_on(parent);
            if let StrategySpec::Spiteful { include_threshold } = self.miners[m].strategy {
                let own = |&w: &u32| self.arena.get(parent).weak[w as usize].finder as usize == m;
                let foreign = included.iter().filter(|w| !own(w)).count();
                if foreign as f64 / self.cfg.ratio as f64 <= include_threshold {
                    included.retain(own);
                }
            }
            let id = self.create_block(m, parent, included, ts);
            self.miners[m].strong_found += 1;
            self.views[view].add_block(&self.arena, id);
            if self.miners[m].public_view.is_some() {
                self.miners[m].withheld.push(id);
            } else {
                self.publish_block(m, id);
            }
        } else {
            let idx = self.arena.blocks[parent as usize].weak.len() as u32;
            self.arena.blocks[parent as usize].weak.push(WeakRec {
                finder: m as u16,
                ts,
            });
            self.miners[m].weak_found += 1;
            self.views[view].add_weak(&self.arena, parent, idx);
            match self.miners[m].strategy {
                StrategySpec::Reclusive => {}
                StrategySpec::Selfish { withhold_weak }
                    if withhold_weak && !self.arena.get(parent).public =>
                {
                    self.miners[m].withheld_weak.push((parent, idx));
                }
                _ => {
                    if let Some(pv) = self.miners[m].public_view {
                        self.views[pv].add_weak(&self.arena, parent, idx);
                    }
                    self.broadcast(m, Payload::Weak(parent, idx));
                }
            }
        }
        self.update_miner(m, true);
        strong
    }

    fn publish_block(&mut self, m: usize, id: u32) {
        self.arena.blocks[id as usize].public = true;
        if let Some(pv) = self.miners[m].public_view {
            self.views[pv].add_block(&self.arena, id);
        }
        self.broadcast(m, Payload::Block(id));
    }

    fn create_block(&mut self, m: usize, parent: u32, included: Vec<u32>, ts: u32) -> u32 {
        let n = self.arena.n_miners;
        let cfg = self.cfg;
        let p = self.arena.get(parent);
        let weak_work = p.child_weak_work;
        let height = p.height + 1;
        let window_base_ts = p.child_window_base_ts;
        let cum_work =
            p.cum_work + weak_work * self.arena.ratio + included.len() as u128 * weak_work;
        let mut counts = vec![0u32; n];
        let mut weak_ts_sum = 0u64;
        for &w in &included {
            let r = p.weak[w as usize];
            counts[r.finder as usize] += 1;
            weak_ts_sum += r.ts as u64;
        }
        let (child_weak_work, child_window_base_ts) = if height.is_multiple_of(cfg.retarget_window)
        {
            let expected = cfg.retarget_window as i64 * cfg.target_block_interval as i64;
            let elapsed = (ts as i64 - window_base_ts as i64).clamp(expected / 4, expected * 4);
            let w = weak_work * expected as u128 / elapsed.max(1) as u128;
            (w.max(1), ts)
        } else {
            (weak_work, window_base_ts)
        };
        let mut recent = Vec::with_capacity(cfg.median_window);
        recent.push(ts);
        let mut cur = parent;
        while recent.len() < cfg.median_window && cur != u32::MAX {
            let b = self.arena.get(cur);
            recent.push(b.ts);
            cur = b.parent;
        }
        recent.sort_unstable();
        let child_mtp = recent[recent.len() / 2];
        let block = SimBlock {
            parent,
            height,
            finder: m as u16,
            ts,
            found_at: self.now,
            cum_work,
            child_weak_work,
            child_window_base_ts,
            child_mtp,
            n_weak: included.len() as u32,
            weak_ts_sum,
            public: false,
            included,
            weak: Vec::new(),
        };
        let id = self.arena.blocks.len() as u32;
        self.arena.blocks.push(block);
        self.arena.weak_by_finder.extend_from_slice(&counts);
        if height > self.arena.max_height {
            self.arena.max_height = height;
            self.prune();
        }
        id
    }

    fn prune(&mut self) {
        let limit = self.arena.max_height.saturating_sub(PRUNE_DEPTH);
        let mut upto = self.arena.pruned;
        while (upto as usize) < self.arena.blocks.len()
            && self.arena.blocks[upto as usize].height < limit
        {
            let b = &mut self.arena.blocks[upto as usize];
            b.weak = Vec::new();
            b.included = Vec::new();
            upto += 1;
        }
        if upto != self.arena.pruned {
            self.arena.pruned = upto;
            for v in &mut self.views {
                v.prune(upto);
            }
        }
    }

    fn broadcast(&mut self, from: usize, payload: Payload) {
        let n = self.miners.len();
        for to in 0..n {
            if to == from {
                continue;
            }
            if self.zero_latency {
                self.immediate.push_back((to as u16, payload));
                continue;
            }
            let rng = self.channels[from * n + to].as_mut().expect("channel");
            let d = self.latency.sample(rng);
            self.msg_seq += 1;
            self.heap.push(Msg {
                time: self.now + d,
                seq: self.msg_seq,
                to: to as u16,
                payload,
            });
        }
    }

    fn deliver(&mut self, m: usize, payload: Payload) {
        let view = self.miners[m].view;
        self.receive(view, payload);
        if let Some(pv) = self.miners[m].public_view {
            self.receive(pv, payload);
        }
        self.update_miner(m, false);
    }

    fn max_ts(&self) -> u64 {
        self.now.floor() as u64 + self.genesis_ts + self.cfg.max_future_drift as u64
    }

    fn receive(&mut self, v: usize, payload: Payload) {
        let mut work = std::mem::take(&mut self.stack);
        work.push(payload);
        while let Some(p) = work.pop() {
            match p {
                Payload::Block(id) => {
                    let b = self.arena.get(id);
                    let parent = b.parent;
                    if self.views[v].knows(id) {
                        continue;
                    }
                    if !self.views[v].knows(parent) {
                        self.views[v]
                            .orphans
                            .entry(parent)
                            .or_default()
                            .push(Orphan::Block(id));
                        continue;
                    }
                    if b.ts <= self.arena.get(parent).child_mtp || b.ts as u64 > self.max_ts() {
                        self.invalid += 1;
                        continue;
                    }
                    self.views[v].add_block(&self.arena, id);
                    if let Some(list) = self.views[v].orphans.remove(&id) {
                        work.extend(list.into_iter().rev().map(|o| match o {
                            Orphan::Block(c) => Payload::Block(c),
                            Orphan::Weak(w) => Payload::Weak(id, w),
                        }));
                    }
                }
                Payload::Weak(parent, idx) => {
                    if !self.views[v].knows(parent) {
                        self.views[v]
                            .orphans
                            .entry(parent)
                            .or_default()
                            .push(Orphan::Weak(idx));
                        continue;
                    }
                    if parent < self.arena.pruned {
                        self.stale_weak += 1;
                        continue;
                    }
                    let ts = self.arena.get(parent).weak[idx as usize].ts;
                    if ts <= self.arena.get(parent).child_mtp || ts as u64 > self.max_ts() {
                        self.invalid += 1;
                        continue;
                    }
                    if self.views[v].add_weak(&self.arena, parent, idx) == WeakAdd::Stale {
                        self.stale_weak += 1;
                    }
                }
            }
        }
        self.stack = work;
    }

    /// Applies the strategy after an event and resamples the clock if the
    /// miner's hit rate changed (or, after its own hit, always).
    fn update_miner(&mut self, m: usize, own_hit: bool) {
        if self.miners[m].public_view.is_some() {
            self.selfish_step(m);
        } else {
            self.miners[m].parent = self.views[self.miners[m].view].best;
        }
        let miner = &mut self.miners[m];
        let work = self.arena.blocks[miner.parent as usize].child_weak_work;
        if own_hit || work != miner.clock_work {
            miner.clock_work = work;
            miner.next_time = draw_clock(&mut miner.rng, self.now, miner.base_rate, work);
        }
    }

    fn selfish_step(&mut self, m: usize) {
        let pv = self.miners[m].public_view.expect("selfish");
        let public_best = self.views[pv].best;
        let Some(&tip) = self.miners[m].withheld.last() else {
            self.miners[m].parent = public_best;
            return;
        };
        let private = self.views[self.miners[m].view].score(&self.arena, tip) as f64;
        let public = self.views[pv].score(&self.arena, public_best) as f64;
        let strong_work = (self.arena.get(public_best).child_weak_work * self.arena.ratio) as f64;
        let lead = (private - public) / strong_work;
        if lead <= -1.0 {
            let miner = &mut self.miners[m];
            miner.withheld.clear();
            miner.withheld_weak.clear();
            miner.parent = public_best;
        } else if self.miners[m].withheld.len() >= 2 && lead > 0.0 && lead <= 1.0 {
            let blocks = std::mem::take(&mut self.miners[m].withheld);
            for id in blocks {
                self.publish_block(m, id);
            }
            let weak = std::mem::take(&mut self.miners[m].withheld_weak);
            for (parent, idx) in weak {
                self.views[pv].add_weak(&self.arena, parent, idx);
                self.broadcast(m, Payload::Weak(parent, idx));
            }
            self.miners[m].parent = self.views[pv].best;
        } else {
            self.miners[m].parent = tip;
        }
    }

    /// Main chain: the best tip of the first honest miner, or of miner 0.
    fn reference_view(&self) -> usize {
        let m = self
            .miners
            .iter()
            .position(|m| m.strategy.is_honest())
            .unwrap_or(0);
        self.miners[m].public_view.unwrap_or(self.miners[m].view)
    }

    fn finish(self) -> RunMetrics {
        let cfg = self.cfg;
        let n = self.miners.len();
        let schedule = RewardSchedule::new(&cfg.protocol_params());
        let tip = self.views[self.reference_view()].best;
        let mut chain = Vec::new();
        let mut cur = tip;
        while cur != 0 {
            chain.push(cur);
            cur = self.arena.get(cur).parent;
        }
        chain.reverse();

        let unit = ATOMIC_PER_UNIT as f64;
        let weight = 1.0 / cfg.ratio as f64;
        let mut reward = vec![0u64; n];
        let mut strong_in_main = vec![0u64; n];
        let mut weak_in_main = vec![0u64; n];
        let mut per_block = vec![Moments::default(); n];
        let mut adversarial = TimestampAcc::default();
        let mut all = TimestampAcc::default();
        let mut records = Vec::new();
        let mut weak_total_main = 0u64;
        let mut block_reward = vec![0u64; n];
        for &id in &chain {
            let b = self.arena.get(id);
            let counts = &self.arena.weak_by_finder[id as usize * n..(id as usize + 1) * n];
            block_reward.iter_mut().for_each(|r| *r = 0);
            block_reward[b.finder as usize] += schedule.strong;
            strong_in_main[b.finder as usize] += 1;
            for i in 0..n {
                block_reward[i] += schedule.weak * counts[i] as u64;
                weak_in_main[i] += counts[i] as u64;
                reward[i] += block_reward[i];
                per_block[i].push(block_reward[i] as f64 / unit);
            }
            weak_total_main += b.n_weak as u64;
            let truth = self.genesis_ts as f64 + b.found_at;
            let eff =
                weighted_timestamp(b.ts as f64, b.weak_ts_sum as f64, b.n_weak as u64, weight);
            let (sd, ed) = (b.ts as f64 - truth, eff - truth);
            all.push(sd, ed);
            if self.miners[b.finder as usize]
                .strategy
                .is_timestamp_adversary()
            {
                adversarial.push(sd, ed);
            }
            if cfg.record_blocks {
                records.push(BlockRecord {
                    height: b.height,
                    finder: b.finder as usize,
                    n_weak: b.n_weak,
                    timestamp: b.ts,
                    effective_timestamp: eff,
                    true_time: truth,
                });
            }
        }

        // Time of the last strong hit.
        let elapsed = self
            .arena
            .blocks
            .iter()
            .map(|b| b.found_at)
            .fold(0.0, f64::max);
        let intervals = elapsed / cfg.target_block_interval as f64;
        let total_reward: u64 = reward.iter().sum();
        let strong_found: u64 = self.miners.iter().map(|m| m.strong_found).sum();
        let weak_found: u64 = self.miners.iter().map(|m| m.weak_found).sum();
        let pending = self.arena.get(tip).weak.len() as u64;
        let miners = self
            .miners
            .iter()
            .enumerate()
            .map(|(i, m)| {
                let alpha = cfg.miners[i].alpha;
                let share = ratio_or_nan(reward[i], total_reward);
                MinerMetrics {
                    alpha,
                    strategy: m.strategy.name().to_string(),
                    strong_found: m.strong_found,
                    strong_in_main: strong_in_main[i],
                    weak_found: m.weak_found,
                    weak_in_main: weak_in_main[i],
                    reward: reward[i],
                    reward_share: share,
                    fairness: if alpha > 0.0 { share / alpha } else { f64::NAN },
                    reward_rate: reward[i] as f64 / unit / intervals,
                    per_block_reward: per_block[i],
                }
            })
            .collect();
        let weak_den = weak_found - pending;
        RunMetrics {
            scenario: cfg.name.clone(),
            seed: cfg.seed,
            ratio: cfg.ratio,
            gamma: cfg.gamma,
            latency_mean: cfg.latency.mean(),
            strong_found,
            main_chain_blocks: chain.len() as u64,
            weak_found,
            weak_in_main: weak_total_main,
            weak_pending_at_horizon: pending,
            strong_stale_rate: ratio_or_nan(strong_found - chain.len() as u64, strong_found),
            weak_stale_rate: (weak_den > 0)
                .then(|| (weak_den - weak_total_main) as f64 / weak_den as f64),
            elapsed,
            miners,
            adversarial_timestamps: adversarial.finish(),
            all_timestamps: all.finish(),
            invalid_messages: self.invalid,
            stale_weak_ignored: self.stale_weak,
            records,
        }
    }
}

fn draw_clock(rng: &mut ChaCha8Rng, now: f64, base_rate: f64, work: u128) -> f64 {
    if base_rate <= 0.0 {
        return f64::INFINITY;
    }
    let rate = base_rate * (INITIAL_WEAK_WORK as f64 / work as f64);
    let e: f64 = rng.sample(Exp1);
    now + e / rate
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::config::{LatencyModel, MinerConfig};

    fn honest(alphas: &[f64], ratio: u64, gamma: f64, blocks: u64) -> SimConfig {
        let mut c = SimConfig::two_party(0.5, StrategySpec::Honest, ratio, gamma);
        c.miners = alphas.iter().map(|&a| MinerConfig::honest(a)).collect();
        c.horizon_blocks = blocks;
        c
    }

    #[test]
    fn lone_miner_never_forks() {
        let m = run_scenario(&honest(&[1.0], 16, 4.0, 3000)).unwrap();
        assert_eq!(m.strong_stale_rate, 0.0);
        assert_eq!(m.main_chain_blocks, 3000);
        assert!((m.miners[0].fairness - 1.0).abs() < 1e-12);
        assert_eq!(m.weak_stale_rate, Some(0.0));
    }

    #[test]
    fn zero_latency_honest_miners_agree() {
        let m = run_scenario(&honest(&[0.3, 0.7], 64, 6.0, 3000)).unwrap();
        assert_eq!(m.strong_stale_rate, 0.0);
        assert_eq!(m.weak_stale_rate, Some(0.0));
        assert_eq!(m.weak_in_main + m.weak_pending_at_horizon, m.weak_found);
    }

    #[test]
    fn same_seed_same_metrics() {
        let mut c = honest(&[0.2, 0.3, 0.5], 32, 5.0, 800);
        c.latency = LatencyModel::weibull(30.0);
        let a = run_scenario(&c).unwrap();
        let b = run_scenario(&c).unwrap();
        assert_eq!(a, b);
        c.seed = 2;
        assert_ne!(a, run_scenario(&c).unwrap());
    }

    #[test]
    fn retarget_keeps_block_interval() {
        let mut c = honest(&[0.5, 0.5], 4, 2.0, 4000);
        c.retarget_window = 100;
        c.latency = LatencyModel::weibull(5.3);
        let m = run_scenario(&c).unwrap();
        let interval = m.elapsed / m.strong_found as f64;
        assert!((interval - 600.0).abs() < 30.0, "{interval}");
    }

    #[test]
    fn slow_stamps_lag_true_time() {
        let mut c = honest(&[0.3, 0.7], 64, 6.0, 2000);
        c.miners[0].strategy = StrategySpec::TimestampSlow;
        let m = run_scenario(&c).unwrap();
        let ts = m.adversarial_timestamps;
        assert!(ts.blocks > 400);
        assert!(ts.strong_dev < -1000.0, "{ts:?}");
        assert!(ts.effective_abs_dev < ts.strong_abs_dev);
        assert!(m.all_timestamps.blocks == m.main_chain_blocks);
    }
}
