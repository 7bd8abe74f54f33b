//! One line per acceptance criterion, at the stated tolerances. Exits
//! nonzero if any criterion fails.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::time::Instant;

use rand::rngs::StdRng;
use rand::SeedableRng;

use common::*;
use strongchain::harness::{
    fig2_variance, fig3_reclusive_spiteful, fig3_selfish, fig4_timestamps, table_latencies,
    table_pools, weakcount_distribution, Check, PresetOptions, PresetOutput,
};

struct Criterion {
    name: &'static str,
    checks: Vec<Check>,
    secs: f64,
}

impl Criterion {
    fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.passed)
    }

    fn print(&self) {
        let tag = if self.passed() { "PASS" } else { "FAIL" };
        println!("{tag} {} ({:.0}s)", self.name, self.secs);
        for c in &self.checks {
            println!("    {}", c.line());
        }
    }
}

fn report(name: &'static str, checks: Vec<Check>, secs: f64) -> Criterion {
    let c = Criterion { name, checks, secs };
    c.print();
    c
}

fn timed(name: &'static str, f: impl FnOnce() -> Vec<Check>) -> Criterion {
    let start = Instant::now();
    let checks = f();
    report(name, checks, start.elapsed().as_secs_f64())
}

fn preset(out: Result<PresetOutput, strongchain::harness::HarnessError>) -> Vec<Check> {
    match out {
        Ok(o) => o.checks,
        Err(e) => vec![Check::new("preset", false, e.to_string())],
    }
}

fn pick(checks: &[Check], names: &[&str]) -> Vec<Check> {
    checks
        .iter()
        .filter(|c| names.contains(&c.name.as_str()))
        .cloned()
        .collect()
}

fn property(name: &str, results: impl IntoIterator<Item = common::Check>) -> Check {
    let mut n = 0;
    for r in results {
        n += 1;
        if let Err(e) = r {
            return Check::new(name, false, e);
        }
    }
    Check::new(name, true, format!("{n} cases"))
}

fn property_suite() -> Vec<Check> {
    let mut rng = StdRng::seed_from_u64(5);
    let mutations = |seed: u32| {
        let mut v = vec![
            Mutation::SwapWeak,
            Mutation::DropBinding,
            Mutation::FlipBindingBit(seed as usize * 7),
        ];
        for i in 0..3 {
            v.push(Mutation::FlipWeakBit {
                header: i,
                bit: seed as usize * 31 + i * 101,
            });
            v.push(Mutation::DropWeak(i));
            v.push(Mutation::DuplicateWeak(i));
        }
        v
    };
    let micros = weak_validation_micros();
    vec![
        property(
            "serialization round trips",
            (0..2000)
                .map(|_| header_round_trip(&random_header(&mut rng)))
                .chain((1..6).map(|s| block_encoding_round_trip(&block_with_weak(s, 2).1))),
        ),
        property(
            "binding mutation rejection",
            (1..11u32).flat_map(|s| {
                mutations(s)
                    .into_iter()
                    .map(move |m| mutation_rejected(s, &m))
            }),
        ),
        property(
            "spv and full node agree",
            (0..10).map(|s| spv_agrees_with_full_node(s, 15)),
        ),
        property(
            "reward conservation",
            [0u64, 1, 7, 1023, 5000].into_iter().flat_map(|n| {
                [(1u64, 0u64), (2, 1), (64, 6), (1024, 10), (4096, 40)]
                    .into_iter()
                    .map(move |(r, g)| rewards_conserved(n, r, g, n * 13))
            }),
        ),
        property(
            "fork choice matches oracle on 4-block trees",
            four_block_shapes()
                .into_iter()
                .flat_map(|s| (0..3).map(move |seed| fork_choice_matches_oracle(&s, seed))),
        ),
        property("gamma 0 is bitcoin", (1..6).map(bitcoin_degeneracy)),
        Check::new(
            "weak header validation time",
            micros <= 500.0,
            format!("{micros:.2} us per header, limit 500 us"),
        ),
    ]
}

fn main() {
    let opts = PresetOptions::default();
    let mut all = Vec::new();

    all.push(timed("weak-count law", || {
        preset(weakcount_distribution(&opts))
    }));
    let start = Instant::now();
    let fig2 = preset(fig2_variance(&opts));
    let secs = start.elapsed().as_secs_f64();
    all.push(report(
        "scaling constant",
        pick(&fig2, &["scaling constant"]),
        0.0,
    ));
    all.push(report(
        "reward variance anchor and simulation grid",
        pick(&fig2, &["variance anchor", "variance simulation grid"]),
        secs,
    ));
    all.push(timed("latency table", || preset(table_latencies(&opts))));
    all.push(timed("selfish mining threshold", || {
        preset(fig3_selfish(&opts))
    }));
    all.push(timed("reclusive and spiteful payoffs", || {
        preset(fig3_reclusive_spiteful(&opts))
    }));
    all.push(timed("timestamp correction", || {
        preset(fig4_timestamps(&opts))
    }));
    all.push(timed("pool table", || preset(table_pools())));
    all.push(timed("protocol property suite", property_suite));

    let failed: Vec<&str> = all.iter().filter(|c| !c.passed()).map(|c| c.name).collect();
    println!(
        "{} of {} criteria passed",
        all.len() - failed.len(),
        all.len()
    );
    if !failed.is_empty() {
        println!("failed: {}", failed.join(", "));
        std::process::exit(1);
    }
}
