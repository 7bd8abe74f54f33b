use std::fmt::Write as _;

use super::{run_matrix, runs_csv, Check, HarnessError, PresetOutput, Table};
use crate::analytics::{
    coefficient_of_variation, cov_curve, equivalent_pool_share, log_grid, scaling_constant_int,
    to_f64, weak_count_tail, Protocol, RewardModelInputs,
};
use crate::sim::{LatencyModel, MinerConfig, RunMetrics, SimConfig, StrategySpec};

pub const PRESETS: [&str; 6] = [
    "fig2-variance",
    "table-latencies",
    "fig3-strategies",
    "fig4-timestamps",
    "table-pools",
    "weakcount-distribution",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PresetOptions {
    /// First seed; cells with several seeds use `seed, seed + 1, ...`.
    pub seed: u64,
    /// Larger horizons and grids.
    pub full: bool,
}

impl Default for PresetOptions {
    fn default() -> Self {
        PresetOptions {
            seed: 1,
            full: false,
        }
    }
}

pub fn run_preset(name: &str, opts: &PresetOptions) -> Result<PresetOutput, HarnessError> {
    match name {
        "fig2-variance" => fig2_variance(opts),
        "table-latencies" => table_latencies(opts),
        "fig3-strategies" => {
            let mut a = fig3_selfish(opts)?;
            let b = fig3_reclusive_spiteful(opts)?;
            a.preset = name.to_string();
            a.tables.extend(b.tables);
            a.checks.extend(b.checks);
            Ok(a)
        }
        "fig4-timestamps" => fig4_timestamps(opts),
        "table-pools" => table_pools(),
        "weakcount-distribution" => weakcount_distribution(opts),
        _ => Err(HarnessError::Usage(format!(
            "unknown preset {name:?}; expected one of: all, {}",
            PRESETS.join(", ")
        ))),
    }
}

pub const LATENCIES: [(&str, f64); 3] = [("low", 0.53), ("medium", 5.3), ("high", 53.0)];

/// `(ratio, gamma)` of each protocol column in the latency table.
pub const LATENCY_COLUMNS: [(u64, f64); 8] = [
    (1, 0.0),
    (2, 1.0),
    (64, 1.0),
    (64, 7.0),
    (64, 63.0),
    (1024, 1.0),
    (1024, 10.0),
    (1024, 1023.0),
];

/// Reference strong stale rate, weak stale rate and fairness, indexed by
/// latency row then column. The weak rate of the first column is undefined.
pub const LATENCY_REFERENCE: [[[f64; 8]; 3]; 3] = [
    [
        [
            0.0023, 0.0025, 0.0021, 0.0026, 0.0028, 0.0023, 0.0025, 0.0019,
        ],
        [
            0.0073, 0.0082, 0.0087, 0.0077, 0.0078, 0.0084, 0.0067, 0.0081,
        ],
        [
            0.0243, 0.0297, 0.0242, 0.0263, 0.0247, 0.0274, 0.0249, 0.0263,
        ],
    ],
    [
        [
            f64::NAN,
            0.0043,
            0.0047,
            0.0049,
            0.0046,
            0.0049,
            0.0047,
            0.0047,
        ],
        [
            f64::NAN,
            0.0142,
            0.0151,
            0.0154,
            0.0149,
            0.0145,
            0.0147,
            0.0149,
        ],
        [
            f64::NAN,
            0.0400,
            0.0459,
            0.0474,
            0.0452,
            0.0469,
            0.0455,
            0.0463,
        ],
    ],
    [
        [
            0.9966, 0.9814, 0.9749, 0.9747, 0.9838, 0.9645, 0.9809, 0.9812,
        ],
        [
            0.9276, 0.9384, 0.9570, 0.9360, 0.9364, 0.9329, 0.9400, 0.9385,
        ],
        [
            0.7951, 0.7640, 0.7978, 0.7820, 0.7757, 0.7756, 0.7766, 0.7775,
        ],
    ],
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoolReference {
    pub name: &'static str,
    pub bitcoin_share: f64,
    pub equivalent_share: f64,
    pub reduction: f64,
}

const fn pool(name: &'static str, b: f64, e: f64, r: f64) -> PoolReference {
    PoolReference {
        name,
        bitcoin_share: b,
        equivalent_share: e,
        reduction: r,
    }
}

/// Shares as fractions.
pub const POOLS: [PoolReference; 10] = [
    pool("BTC.com", 0.181, 0.00245, 74.0),
    pool("F2Pool", 0.141, 0.00172, 82.0),
    pool("AntPool", 0.117, 0.00135, 87.0),
    pool("SlushPool", 0.091, 0.00099, 92.0),
    pool("ViaBTC", 0.075, 0.00079, 95.0),
    pool("BTC.TOP", 0.071, 0.00074, 96.0),
    pool("BitClub", 0.031, 0.00030, 103.0),
    pool("DPOOL", 0.026, 0.00025, 104.0),
    pool("Bitcoin.com", 0.019, 0.00018, 106.0),
    pool("BitFury", 0.017, 0.00016, 106.0),
];

pub const WEAK_TAIL_N: u64 = 16_667;
pub const WEAK_TAIL_REFERENCE: f64 = 8.4603e-8;

fn gamma_for(ratio: u64) -> f64 {
    (ratio as f64).log2()
}

fn two_party(
    alpha: f64,
    strategy: StrategySpec,
    ratio: u64,
    gamma: f64,
    blocks: u64,
    seed: u64,
) -> SimConfig {
    let mut c = SimConfig::two_party(alpha, strategy, ratio, gamma);
    c.horizon_blocks = blocks;
    c.seed = seed;
    c
}

fn mean(xs: impl IntoIterator<Item = f64>) -> f64 {
    let (s, n) = xs
        .into_iter()
        .fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    s / n as f64
}

fn rel_err(x: f64, reference: f64) -> f64 {
    (x - reference).abs() / reference.abs()
}

fn table(file: &str, csv: String) -> Table {
    Table {
        file: file.to_string(),
        csv,
    }
}

/// Weak headers per block at ratio 1024 from a lone miner's chain, and the
/// analytic tail probability.
pub fn weakcount_distribution(opts: &PresetOptions) -> Result<PresetOutput, HarnessError> {
    let ratio = 1024u64;
    let blocks = if opts.full { 1_000_000 } else { 100_000 };
    let mut cfg = two_party(1.0, StrategySpec::Honest, ratio, 10.0, blocks, opts.seed);
    cfg.miners = vec![MinerConfig::honest(1.0)];
    cfg.name = "weakcount".into();
    cfg.record_blocks = true;
    let runs = run_matrix(std::slice::from_ref(&cfg))?;
    let m = &runs[0];
    let mean_weak = m.weak_in_main as f64 / m.main_chain_blocks as f64;
    let expected = ratio as f64 - 1.0;

    let width = 256u64;
    let bins = 32u64;
    let mut hist = vec![0u64; bins as usize + 1];
    for r in &m.records {
        hist[((r.n_weak as u64 / width).min(bins)) as usize] += 1;
    }
    let q = 1.0 - 1.0 / ratio as f64;
    let at_least = |k: u64| q.powf(k as f64);
    let mut csv = String::from("bin_lo,bin_hi,observed_fraction,expected_fraction\n");
    let n = m.records.len() as f64;
    for (i, &count) in hist.iter().enumerate() {
        let lo = i as u64 * width;
        let (hi, p) = if i as u64 == bins {
            (String::new(), at_least(lo))
        } else {
            (
                (lo + width).to_string(),
                at_least(lo) - at_least(lo + width),
            )
        };
        let _ = writeln!(csv, "{lo},{hi},{},{}", count as f64 / n, p);
    }

    let tail = weak_count_tail(ratio as f64, WEAK_TAIL_N);
    let checks = vec![
        Check::new(
            "weak-count mean",
            rel_err(mean_weak, expected) <= 0.02,
            format!(
                "{mean_weak:.2} weak headers per block over {} blocks, expected {expected} ±2%",
                m.main_chain_blocks
            ),
        ),
        Check::new(
            "weak-count tail",
            rel_err(tail, WEAK_TAIL_REFERENCE) <= 0.005,
            format!("P(n > {WEAK_TAIL_N}) = {tail:.5e}, expected {WEAK_TAIL_REFERENCE:e} ±0.5%"),
        ),
    ];
    Ok(PresetOutput {
        preset: "weakcount-distribution".into(),
        tables: vec![
            table("histogram.csv", csv),
            table("runs.csv", runs_csv(&runs)),
        ],
        checks,
    })
}

/// Strong blocks simulated for a reward-variance marker at share `alpha`.
pub fn fig2_horizon(alpha: f64, full: bool) -> u64 {
    let base = if alpha <= 0.001 {
        1_000_000
    } else if alpha <= 0.01 {
        100_000
    } else {
        30_000
    };
    if full {
        base * 4
    } else {
        base
    }
}

pub const FIG2_ALPHAS: [f64; 3] = [0.001, 0.01, 0.1];
pub const FIG2_RATIOS: [u64; 3] = [2, 64, 1024];

pub fn fig2_variance(opts: &PresetOptions) -> Result<PresetOutput, HarnessError> {
    let mut checks = Vec::new();
    let c = to_f64(&scaling_constant_int(1024, 10));
    let c2 = c * c;
    checks.push(Check::new(
        "scaling constant",
        (0.0082..=0.0084).contains(&c2),
        format!("c^2(1024, 10) = {c2:.7}, expected in [0.0082, 0.0084]"),
    ));

    let sc = coefficient_of_variation(
        &RewardModelInputs::new(0.001, 1024.0, 10.0, 1.0),
        Protocol::StrongChain,
    )?;
    let btc = coefficient_of_variation(
        &RewardModelInputs::new(0.09, 1024.0, 0.0, 1.0),
        Protocol::Bitcoin,
    )?;
    checks.push(Check::new(
        "variance anchor",
        rel_err(sc, btc) <= 0.03,
        format!(
            "CoV at 0.1% with weak headers {sc:.4} vs 9% without {btc:.4} (rel. diff {:.2}%, limit 3%)",
            100.0 * rel_err(sc, btc)
        ),
    ));

    let mut curves = String::from("alpha,ratio,gamma,cov_bitcoin,cov_strongchain\n");
    let grid = log_grid(1e-4, 0.5, 60);
    for &ratio in &FIG2_RATIOS {
        for r in cov_curve(&grid, ratio as f64, gamma_for(ratio)) {
            let _ = writeln!(
                curves,
                "{},{},{},{},{}",
                r.alpha, r.ratio, r.gamma, r.cov_bitcoin, r.cov_strongchain
            );
        }
    }

    let mut cells = Vec::new();
    for &ratio in &FIG2_RATIOS {
        for &alpha in &FIG2_ALPHAS {
            let mut c = two_party(
                alpha,
                StrategySpec::Honest,
                ratio,
                gamma_for(ratio),
                fig2_horizon(alpha, opts.full),
                opts.seed,
            );
            c.name = format!("variance-r{ratio}-a{alpha}");
            cells.push(c);
        }
    }
    let runs = run_matrix(&cells)?;
    let mut markers = String::from("alpha,ratio,gamma,blocks,cov_simulated,cov_analytic,rel_err\n");
    let mut worst: f64 = 0.0;
    let mut all_ok = true;
    for (cfg, m) in cells.iter().zip(&runs) {
        let alpha = cfg.miners[0].alpha;
        let x = RewardModelInputs::new(alpha, cfg.ratio as f64, cfg.gamma, 1.0);
        let analytic = coefficient_of_variation(&x, Protocol::StrongChain)?;
        let sim = m.miners[0].reward_cov();
        let e = rel_err(sim, analytic);
        all_ok &= e <= 0.05;
        worst = worst.max(e);
        let _ = writeln!(
            markers,
            "{alpha},{},{},{},{sim},{analytic},{e}",
            cfg.ratio, cfg.gamma, m.main_chain_blocks
        );
    }
    checks.push(Check::new(
        "variance simulation grid",
        all_ok,
        format!(
            "9 cells, worst relative error {:.2}% (limit 5%)",
            100.0 * worst
        ),
    ));
    Ok(PresetOutput {
        preset: "fig2-variance".into(),
        tables: vec![
            table("cov_curves.csv", curves),
            table("cov_markers.csv", markers),
            table("runs.csv", runs_csv(&runs)),
        ],
        checks,
    })
}

pub fn table_latencies(opts: &PresetOptions) -> Result<PresetOutput, HarnessError> {
    let seeds = 10u64;
    // Column indices simulated: Bitcoin and ratio 1024 / gamma 10 at desk
    // scale, every column with --full.
    let columns: Vec<usize> = if opts.full {
        (0..8).collect()
    } else {
        vec![0, 6]
    };
    let mut cells = Vec::new();
    let mut keys = Vec::new();
    for &col in &columns {
        let (ratio, gamma) = LATENCY_COLUMNS[col];
        for (row, &(label, mean)) in LATENCIES.iter().enumerate() {
            if !opts.full && col != 0 && label != "medium" {
                continue;
            }
            for k in 0..seeds {
                let mut c = two_party(
                    0.1,
                    StrategySpec::Honest,
                    ratio,
                    gamma,
                    20_000,
                    opts.seed + k,
                );
                c.latency = LatencyModel::weibull(mean);
                c.name = format!("latency-{label}-r{ratio}-g{gamma}");
                cells.push(c);
            }
            keys.push((col, row));
        }
    }
    let runs = run_matrix(&cells)?;
    let mut csv = String::from(
        "ratio,gamma,latency,latency_mean,strong_stale_rate,weak_stale_rate,fairness,ref_strong_stale_rate,ref_weak_stale_rate,ref_fairness\n",
    );
    let mut cell_means = Vec::new();
    for (i, &(col, row)) in keys.iter().enumerate() {
        let group: &[RunMetrics] = &runs[i * seeds as usize..(i + 1) * seeds as usize];
        let stale = mean(group.iter().map(|m| m.strong_stale_rate));
        let weak = if col == 0 {
            f64::NAN
        } else {
            mean(group.iter().map(|m| m.weak_stale_rate.unwrap_or(f64::NAN)))
        };
        let fair = mean(group.iter().map(|m| m.miners[0].fairness));
        let (ratio, gamma) = LATENCY_COLUMNS[col];
        let f = |x: f64| {
            if x.is_nan() {
                String::new()
            } else {
                format!("{x}")
            }
        };
        let _ = writeln!(
            csv,
            "{ratio},{gamma},{},{},{stale},{},{fair},{},{},{}",
            LATENCIES[row].0,
            LATENCIES[row].1,
            f(weak),
            LATENCY_REFERENCE[0][row][col],
            f(LATENCY_REFERENCE[1][row][col]),
            LATENCY_REFERENCE[2][row][col]
        );
        cell_means.push(((col, row), stale, fair));
    }
    let mut checks = Vec::new();
    for &((col, row), stale, _) in cell_means.iter().filter(|c| c.0 .0 == 0) {
        let reference = LATENCY_REFERENCE[0][row][col];
        checks.push(Check::new(
            format!("bitcoin stale rate, {} latency", LATENCIES[row].0),
            (stale - reference).abs() <= 0.003,
            format!("{stale:.4} vs {reference:.4} ±0.003 (10 seeds × 20 000 blocks)"),
        ));
    }
    if let Some(&(_, _, fair)) = cell_means.iter().find(|c| c.0 == (6, 1)) {
        let reference = LATENCY_REFERENCE[2][1][6];
        checks.push(Check::new(
            "fairness, ratio 1024 gamma 10, medium latency",
            (fair - reference).abs() <= 0.03,
            format!("{fair:.4} vs {reference:.4} ±0.03"),
        ));
    }
    Ok(PresetOutput {
        preset: "table-latencies".into(),
        tables: vec![
            table("latency_table.csv", csv),
            table("runs.csv", runs_csv(&runs)),
        ],
        checks,
    })
}

const STRATEGY_LATENCY: f64 = 0.53;
const STRATEGY_SEEDS: u64 = 10;
const STRATEGY_BLOCKS: u64 = 20_000;

struct SweepPoint {
    ratio: u64,
    gamma: f64,
    alpha: f64,
    share: f64,
    rate: f64,
}

fn sweep(
    strategy: StrategySpec,
    protocols: &[(u64, f64)],
    alphas: &[f64],
    opts: &PresetOptions,
) -> Result<(Vec<SweepPoint>, Vec<RunMetrics>), HarnessError> {
    let mut cells = Vec::new();
    for &(ratio, gamma) in protocols {
        for &alpha in alphas {
            for k in 0..STRATEGY_SEEDS {
                let mut c = two_party(
                    alpha,
                    strategy,
                    ratio,
                    gamma,
                    STRATEGY_BLOCKS,
                    opts.seed + k,
                );
                c.latency = LatencyModel::weibull(STRATEGY_LATENCY);
                c.name = format!("{}-r{ratio}-a{alpha:.2}", strategy.name());
                cells.push(c);
            }
        }
    }
    let runs = run_matrix(&cells)?;
    let mut points = Vec::new();
    for (i, group) in runs.chunks(STRATEGY_SEEDS as usize).enumerate() {
        let (ratio, gamma) = protocols[i / alphas.len()];
        points.push(SweepPoint {
            ratio,
            gamma,
            alpha: alphas[i % alphas.len()],
            share: mean(group.iter().map(|m| m.miners[0].reward_share)),
            rate: mean(group.iter().map(|m| m.miners[0].reward_rate)),
        });
    }
    Ok((points, runs))
}

fn sweep_csv(strategy: &str, points: &[SweepPoint], out: &mut String) {
    for p in points {
        let _ = writeln!(
            out,
            "{strategy},{},{},{},{},{}",
            p.ratio, p.gamma, p.alpha, p.share, p.rate
        );
    }
}

const SWEEP_HEADER: &str = "strategy,ratio,gamma,alpha,reward_share,reward_rate\n";

/// Selfish payoff over `alpha = 0.03, 0.06, ..., 0.42` with and without
/// weak headers.
pub fn fig3_selfish(opts: &PresetOptions) -> Result<PresetOutput, HarnessError> {
    let alphas: Vec<f64> = (1..=14).map(|k| k as f64 * 0.03).collect();
    let mut protocols = vec![(1u64, 0.0), (1024, 10.0)];
    if opts.full {
        protocols.extend([(2, 1.0), (64, 6.0)]);
    }
    let (points, runs) = sweep(StrategySpec::selfish(), &protocols, &alphas, opts)?;
    let mut csv = String::from(SWEEP_HEADER);
    sweep_csv("selfish", &points, &mut csv);

    let gains = |ratio: u64, limit: f64| -> Vec<f64> {
        points
            .iter()
            .filter(|p| p.ratio == ratio && p.alpha <= limit + 1e-9 && p.share > p.alpha)
            .map(|p| p.alpha)
            .collect()
    };
    let fmt = |v: &[f64]| {
        if v.is_empty() {
            "none".to_string()
        } else {
            v.iter()
                .map(|a| format!("{a:.2}"))
                .collect::<Vec<_>>()
                .join(" ")
        }
    };
    let btc = gains(1, 0.36);
    let sc = gains(1024, 0.42);
    let checks = vec![
        Check::new(
            "selfish mining pays without weak headers",
            !btc.is_empty(),
            format!("shares above alpha for alpha <= 0.36 at: {}", fmt(&btc)),
        ),
        Check::new(
            "selfish mining does not pay at ratio 1024",
            sc.is_empty(),
            format!("shares above alpha for alpha <= 0.42 at: {}", fmt(&sc)),
        ),
    ];
    Ok(PresetOutput {
        preset: "fig3-selfish".into(),
        tables: vec![
            table("selfish.csv", csv),
            table("selfish_runs.csv", runs_csv(&runs)),
        ],
        checks,
    })
}

/// Reclusive and spiteful payoffs, with an honest baseline on the same
/// seeds for the absolute comparison.
pub fn fig3_reclusive_spiteful(opts: &PresetOptions) -> Result<PresetOutput, HarnessError> {
    let alphas: Vec<f64> = if opts.full {
        (1..=9).map(|k| k as f64 * 0.05).collect()
    } else {
        vec![0.1, 0.2, 0.3, 0.4]
    };
    let mut protocols = vec![(1024u64, 10.0)];
    if opts.full {
        protocols.push((64, 6.0));
    }
    let (reclusive, r1) = sweep(StrategySpec::Reclusive, &protocols, &alphas, opts)?;
    let (spiteful, r2) = sweep(StrategySpec::spiteful(), &protocols, &alphas, opts)?;
    let (honest, r3) = sweep(StrategySpec::Honest, &protocols, &alphas, opts)?;
    let mut csv = String::from(SWEEP_HEADER);
    sweep_csv("reclusive", &reclusive, &mut csv);
    sweep_csv("spiteful", &spiteful, &mut csv);
    sweep_csv("honest", &honest, &mut csv);

    let bad_reclusive: Vec<String> = reclusive
        .iter()
        .filter(|p| p.share > p.alpha)
        .map(|p| format!("r{} a{:.2}: {:.4}", p.ratio, p.alpha, p.share))
        .collect();
    let mut spite_rel = Vec::new();
    let mut spite_abs = Vec::new();
    for (s, h) in spiteful.iter().zip(&honest) {
        if s.share < s.alpha {
            spite_rel.push(format!(
                "r{} a{:.2}: share {:.4}",
                s.ratio, s.alpha, s.share
            ));
        }
        if s.rate > h.rate {
            spite_abs.push(format!(
                "r{} a{:.2}: {:.4} > {:.4}",
                s.ratio, s.alpha, s.rate, h.rate
            ));
        }
    }
    let list = |v: &[String]| {
        if v.is_empty() {
            "none".to_string()
        } else {
            v.join("; ")
        }
    };
    let checks = vec![
        Check::new(
            "reclusive payoff at most alpha",
            bad_reclusive.is_empty(),
            format!(
                "{} points, violations: {}",
                reclusive.len(),
                list(&bad_reclusive)
            ),
        ),
        Check::new(
            "spiteful relative payoff at least alpha",
            spite_rel.is_empty(),
            format!(
                "{} points, violations: {}",
                spiteful.len(),
                list(&spite_rel)
            ),
        ),
        Check::new(
            "spiteful absolute payoff at most honest",
            spite_abs.is_empty(),
            format!(
                "{} paired points, violations: {}",
                spiteful.len(),
                list(&spite_abs)
            ),
        ),
    ];
    let mut runs = r1;
    runs.extend(r2);
    runs.extend(r3);
    Ok(PresetOutput {
        preset: "fig3-reclusive-spiteful".into(),
        tables: vec![
            table("reclusive_spiteful.csv", csv),
            table("reclusive_spiteful_runs.csv", runs_csv(&runs)),
        ],
        checks,
    })
}

pub const FIG4_ALPHAS: [f64; 3] = [0.1, 0.2, 0.3];

/// Effective versus strong-only timestamp deviation for blocks found by a
/// timestamp adversary.
pub fn fig4_timestamps(opts: &PresetOptions) -> Result<PresetOutput, HarnessError> {
    let samples = if opts.full { 100_000.0 } else { 10_000.0 };
    let strategies = [StrategySpec::TimestampSlow, StrategySpec::TimestampFast];
    let mut cells = Vec::new();
    for s in strategies {
        for &alpha in &FIG4_ALPHAS {
            let mut c = two_party(
                alpha,
                s,
                1024,
                10.0,
                (samples / alpha).ceil() as u64,
                opts.seed,
            );
            c.name = format!("{}-a{alpha}", s.name());
            cells.push(c);
        }
    }
    let runs = run_matrix(&cells)?;
    let mut csv = String::from("strategy,alpha,blocks,strong_dev,effective_dev,reduction\n");
    let mut checks = Vec::new();
    for (si, s) in strategies.iter().enumerate() {
        let (lo, hi) = match s {
            StrategySpec::TimestampSlow => (2000.0 * 0.8, 2000.0 * 1.2),
            _ => (2000.0 * 0.8, 3500.0 * 1.2),
        };
        let mut ok = true;
        let mut parts = Vec::new();
        for (ai, &alpha) in FIG4_ALPHAS.iter().enumerate() {
            let t = runs[si * FIG4_ALPHAS.len() + ai].adversarial_timestamps;
            let red = t.reduction();
            ok &= (lo..=hi).contains(&red);
            parts.push(format!("a{alpha}: {red:.0} s"));
            let _ = writeln!(
                csv,
                "{},{alpha},{},{},{},{red}",
                s.name(),
                t.blocks,
                t.strong_dev,
                t.effective_dev
            );
        }
        checks.push(Check::new(
            format!("{} timestamp correction", s.name()),
            ok,
            format!("{} (accepted {lo:.0}..{hi:.0} s)", parts.join(", ")),
        ));
    }
    Ok(PresetOutput {
        preset: "fig4-timestamps".into(),
        tables: vec![
            table("timestamps.csv", csv),
            table("runs.csv", runs_csv(&runs)),
        ],
        checks,
    })
}

/// Half a unit in the second significant figure of `x`.
fn two_sig_tolerance(x: f64) -> f64 {
    0.5 * 10f64.powf(x.abs().log10().floor() - 1.0)
}

pub fn table_pools() -> Result<PresetOutput, HarnessError> {
    let mut csv = String::from(
        "pool,bitcoin_share,equivalent_share,reduction,ref_equivalent_share,ref_reduction\n",
    );
    let mut bad = Vec::new();
    for p in &POOLS {
        let eq = equivalent_pool_share(p.bitcoin_share, 1024.0, 10.0)?;
        let red = p.bitcoin_share / eq;
        if (eq - p.equivalent_share).abs() > two_sig_tolerance(p.equivalent_share)
            || (red - p.reduction).abs() > two_sig_tolerance(p.reduction)
        {
            bad.push(format!("{} ({:.5}%, {red:.1}x)", p.name, 100.0 * eq));
        }
        let _ = writeln!(
            csv,
            "{},{},{eq},{red},{},{}",
            p.name, p.bitcoin_share, p.equivalent_share, p.reduction
        );
    }
    let first = equivalent_pool_share(POOLS[0].bitcoin_share, 1024.0, 10.0)?;
    let checks = vec![Check::new(
        "pool table",
        bad.is_empty(),
        format!(
            "10 rows to 2 significant figures (18.1% -> {:.3}%, {:.0}x); mismatches: {}",
            100.0 * first,
            POOLS[0].bitcoin_share / first,
            if bad.is_empty() {
                "none".into()
            } else {
                bad.join(", ")
            }
        ),
    )];
    Ok(PresetOutput {
        preset: "table-pools".into(),
        tables: vec![table("pool_table.csv", csv)],
        checks,
    })
}
