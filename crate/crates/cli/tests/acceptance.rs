//! End-to-end acceptance run. Prints one `criterion N: PASS|FAIL` line per
//! criterion and exits non-zero if any fails.

use std::collections::HashSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rskyline_cli::args::Command as Sub;
use rskyline_cli::{Cli, Workload};
use rskyline_core::datagen::{generate, Distribution, GenSpec};
use rskyline_core::greedy::{exhaustive_opt, exhaustive_optima, kgcs, CandidateProfile};
use rskyline_core::kmac::{basic_kmac, batch_kmac, batch_rsa, bb_kmac_observed, BbStep, SingleEngine};
use rskyline_core::skyline::oracle_reverse_skyline;
use rskyline_core::{brs, build_artree, rsl, Point, RTree};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($msg)+));
        }
    };
}

struct Instance {
    products: Vec<Point>,
    customers: Vec<Point>,
    candidates: Vec<Point>,
    clustered: Vec<Point>,
    fanout: usize,
}

const DISTS: [Distribution; 3] = [
    Distribution::Uniform,
    Distribution::AntiCorrelated,
    Distribution::Correlated,
];

fn snap(points: &mut [Point]) {
    for p in points {
        for v in &mut p.coords {
            *v = (*v / 100.0).round() * 100.0;
        }
    }
}

/// D in {2,3,4}, |P| and |C| in [20, 200], UN/AC/CO in turn, every fourth
/// instance on a coarse grid. Also five candidates packed near one centre.
fn instance(seed: u64, n_candidates: usize) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9e37_79b9) ^ 0xacce);
    let dim = rng.random_range(2..=4);
    let dist = DISTS[(seed % 3) as usize];
    let gen = |n: usize, s: u64| {
        generate(&GenSpec {
            distribution: dist,
            n,
            dim,
            seed: s,
        })
        .unwrap()
    };
    let np = rng.random_range(20..=200);
    let nc = rng.random_range(20..=200);
    let mut products = gen(np, rng.random());
    let mut customers = gen(nc, rng.random());
    let mut candidates: Vec<Point> = (0..n_candidates)
        .map(|i| Point::new(10_000 + i as u64, (0..dim).map(|_| rng.random_range(0.0..1000.0)).collect::<Vec<f64>>()))
        .collect();
    if seed % 4 == 3 {
        snap(&mut products);
        snap(&mut customers);
        snap(&mut candidates);
    }
    let r = 40.0;
    let centre: Vec<f64> = (0..dim).map(|_| rng.random_range(r..1000.0 - r)).collect();
    let clustered = (0..5)
        .map(|i| {
            let c: Vec<f64> = centre.iter().map(|c| c + rng.random_range(-r..r)).collect();
            Point::new(20_000 + i, c)
        })
        .collect();
    Instance {
        products,
        customers,
        candidates,
        clustered,
        fanout: rng.random_range(3..=8),
    }
}

/// Result of the batch check, computed alongside criterion 1.
#[derive(Default)]
struct LedgerTally {
    failures: Vec<String>,
    strict: usize,
    clustered: usize,
}

fn oracle_equivalence(tally: &mut LedgerTally) -> Outcome {
    let mut queries = 0;
    for seed in 0..200 {
        let inst = instance(seed, 5);
        let tp = RTree::bulk_load(&inst.products, inst.fanout).unwrap();
        let tc = RTree::bulk_load(&inst.customers, inst.fanout).unwrap();
        let expected: Vec<_> = inst
            .candidates
            .iter()
            .map(|q| oracle_reverse_skyline(q, &inst.products, &inst.customers))
            .collect();
        for (q, e) in inst.candidates.iter().zip(&expected) {
            ensure!(&rsl(q, &tp, &tc, None).unwrap().0 == e, "rsl differs, seed {seed}");
            ensure!(&brs(q, &tp, &tc, None).unwrap().0 == e, "brs differs, seed {seed}");
            queries += 1;
        }
        for b in [1, 2, 5] {
            for chunk in inst.candidates.chunks(b) {
                let out = batch_rsa(chunk, &tp, &tc).unwrap();
                for q in chunk {
                    let i = (q.id - 10_000) as usize;
                    ensure!(out.results[&q.id].0 == expected[i], "batch differs, seed {seed} B {b}");
                }
                check_ledger(chunk, &tp, &tc, seed, false, tally);
            }
        }
        check_ledger(&inst.clustered, &tp, &tc, seed, true, tally);
    }
    Ok(format!("{queries} queries, 3 engines"))
}

fn check_ledger(chunk: &[Point], tp: &RTree, tc: &RTree, seed: u64, clustered: bool, tally: &mut LedgerTally) {
    let mut union = HashSet::new();
    let mut sum = 0;
    for q in chunk {
        let (_, stats) = rsl(q, tp, tc, None).unwrap();
        sum += stats.total_io();
        union.extend(stats.reads.iter().copied());
    }
    let out = batch_rsa(chunk, tp, tc).unwrap();
    let reads = out.io.total();
    if out.ledger != union || reads != union.len() as u64 || reads > sum {
        tally.failures.push(format!("seed {seed} B {}", chunk.len()));
    }
    if clustered {
        tally.clustered += 1;
        if reads < sum {
            tally.strict += 1;
        }
    }
}

fn batch_law(tally: &LedgerTally) -> Outcome {
    ensure!(tally.failures.is_empty(), "ledger law broken: {:?}", tally.failures);
    ensure!(
        tally.strict * 10 >= tally.clustered * 9,
        "strict saving in {}/{} clustered batches",
        tally.strict,
        tally.clustered
    );
    Ok(format!("strict saving in {}/{} clustered batches", tally.strict, tally.clustered))
}

fn greedy_guarantee() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let ratio = 1.0 - (-1.0f64).exp();
    let mut worst = f64::INFINITY;
    for i in 0..500 {
        let n = rng.random_range(1..=12);
        let universe = rng.random_range(1..=30u64);
        let profiles: Vec<CandidateProfile> = (0..n)
            .map(|id| {
                let size = rng.random_range(0..=universe);
                CandidateProfile::new(id, (0..size).map(|_| rng.random_range(0..universe)))
            })
            .collect();
        let k = rng.random_range(1..=n.min(4) as usize);
        let g = kgcs(&profiles, k).unwrap().joint_score as f64;
        let o = exhaustive_opt(&profiles, k).unwrap().joint_score as f64;
        ensure!(g >= ratio * o - 1e-9, "instance {i}: greedy {g} optimum {o}");
        if o > 0.0 {
            worst = worst.min(g / o);
        }
    }
    Ok(format!("worst ratio {worst:.3}"))
}

fn four_candidates() -> Outcome {
    let profiles = vec![
        CandidateProfile::new(1, [2, 3]),
        CandidateProfile::new(2, [1, 2]),
        CandidateProfile::new(3, [3]),
        CandidateProfile::new(4, [1]),
    ];
    let (best, optima) = exhaustive_optima(&profiles, 2).unwrap();
    ensure!(best == 3, "best score {best}");
    ensure!(optima == vec![vec![1, 2], vec![1, 4], vec![2, 3]], "optima {optima:?}");
    Ok("score 3 by {1,2} {1,4} {2,3}".into())
}

fn branch_and_bound() -> Outcome {
    let mut discarded = 0;
    for seed in 0..200 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed + 500);
        let n_q = rng.random_range(1..=10);
        let k = rng.random_range(1..=2.min(n_q));
        let inst = instance(seed + 1000, n_q);
        let tp = RTree::bulk_load(&inst.products, inst.fanout).unwrap();
        let tc = build_artree(&inst.customers, inst.fanout).unwrap();
        let exact: Vec<u64> = inst
            .candidates
            .iter()
            .map(|q| oracle_reverse_skyline(q, &inst.products, &inst.customers).len() as u64)
            .collect();
        let mut sandwich_ok = true;
        let mut observe = |s: &BbStep| {
            sandwich_ok &= s.bounds.iter().zip(&exact).all(|(b, e)| b.lower <= *e && *e <= b.upper);
        };
        let bb = bb_kmac_observed(&inst.candidates, &tp, &tc, k, Some(&mut observe)).unwrap();
        ensure!(sandwich_ok, "bounds miss the exact score, seed {seed}");
        let basic = basic_kmac(&inst.candidates, &tp, &tc, k, SingleEngine::Rsl).unwrap();
        ensure!(
            bb.selection.joint_score == basic.selection.joint_score,
            "seed {seed}: score {} vs {}",
            bb.selection.joint_score,
            basic.selection.joint_score
        );
        let profiles: Vec<CandidateProfile> = basic
            .candidates
            .iter()
            .map(|r| CandidateProfile {
                id: r.id,
                influence: r.influence.clone(),
            })
            .collect();
        let (_, optima) = exhaustive_optima(&profiles, k).unwrap();
        for r in bb.candidates.iter().filter(|r| r.discarded) {
            discarded += 1;
            ensure!(optima.iter().all(|o| !o.contains(&r.id)), "seed {seed}: pruned {} is optimal", r.id);
        }
    }
    Ok(format!("{discarded} candidates pruned"))
}

fn workload(d: u8) -> Workload {
    let argv = [
        "rskyline", "kmac", "--products", "100000", "--customers", "100000", "--candidates", "100",
        "--dist", "un", "--seed", "1", "--d",
    ];
    let cli = <Cli as clap::Parser>::try_parse_from(argv.iter().map(|s| s.to_string()).chain([d.to_string()]))
        .unwrap();
    let Sub::Kmac(a) = cli.command else {
        unreachable!()
    };
    Workload::build(&a.workload).unwrap()
}

/// Sum over candidates of the I/O spent before 5% of the candidate's
/// answer had been emitted.
fn io_to_first_twentieth(reports: &[rskyline_core::kmac::CandidateReport]) -> u64 {
    reports
        .iter()
        .map(|r| {
            let target = (r.stats.emitted * 5).div_ceil(100);
            r.stats.io_to_emit(target).expect("target within emitted")
        })
        .sum()
}

fn directional() -> Outcome {
    let w = workload(3);
    let (tp, tc) = (&w.product_tree, &w.customer_tree);
    let basic = basic_kmac(&w.candidates, tp, tc, 10, SingleEngine::Rsl).unwrap();
    let batch = batch_kmac(&w.candidates, tp, tc, 10, 10).unwrap();
    let base_brs = basic_kmac(&w.candidates, tp, tc, 10, SingleEngine::Brs).unwrap();
    let (a_batch, a_basic) = (batch.io.total(), basic.io.total());
    let (c_rsl, c_brs) = (io_to_first_twentieth(&basic.candidates), io_to_first_twentieth(&base_brs.candidates));
    drop(w);

    let w4 = workload(4);
    let (tp, tc) = (&w4.product_tree, &w4.customer_tree);
    let rsl4 = basic_kmac(&w4.candidates, tp, tc, 10, SingleEngine::Rsl).unwrap();
    let brs4 = basic_kmac(&w4.candidates, tp, tc, 10, SingleEngine::Brs).unwrap();
    let (b_rsl, b_brs) = (rsl4.dominance_checks, brs4.dominance_checks);

    let summary = format!(
        "(a) reads batch {a_batch} basic-rsl {a_basic}; (b) checks at D=4 rsl {b_rsl} brs {b_brs}; \
         (c) reads to first 5% rsl {c_rsl} brs {c_brs}"
    );
    ensure!(a_batch < a_basic, "{summary}");
    ensure!(b_rsl.saturating_mul(2) <= b_brs, "{summary}");
    ensure!(c_rsl < c_brs, "{summary}");
    Ok(summary)
}

fn without_wall_ms(path: &Path) -> Vec<Vec<String>> {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# rskyline-kit v1"));
    let rest: String = lines.map(|l| format!("{l}\n")).collect();
    let mut reader = csv::ReaderBuilder::new().has_headers(false).from_reader(rest.as_bytes());
    let rows: Vec<Vec<String>> = reader
        .records()
        .map(|r| r.unwrap().iter().map(str::to_string).collect())
        .collect();
    let drop_col = rows[0].iter().position(|h| h == "wall_ms");
    rows.into_iter()
        .map(|mut r| {
            if let Some(i) = drop_col {
                r.remove(i);
            }
            r
        })
        .collect()
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let bin = env!("CARGO_BIN_EXE_rskyline");
    let common = [
        "--products", "3000", "--customers", "noise:10:2000", "--candidates", "co:40", "--d", "3",
        "--seed", "9",
    ];
    let runs: [(&str, Vec<&str>); 4] = [
        ("query", vec!["--engine", "brs", "--verify"]),
        ("kmac", vec!["--engine", "batch", "--k", "5", "--batch-size", "7"]),
        ("kmac", vec!["--engine", "bb", "--k", "3"]),
        ("sweep", vec!["--axis", "k", "--values", "1,4", "--engine", "basic-rsl,batch,bb"]),
    ];
    let mut files = 0;
    for (i, (cmd, extra)) in runs.iter().enumerate() {
        let mut outputs = Vec::new();
        for rep in 0..2 {
            let out = dir.path().join(format!("{i}-{rep}.csv"));
            let status = Command::new(bin)
                .arg(cmd)
                .args(common)
                .args(extra)
                .arg("--out")
                .arg(&out)
                .stderr(std::process::Stdio::null())
                .status()
                .unwrap();
            ensure!(status.success(), "{cmd} {extra:?} exited with {status}");
            outputs.push(out);
        }
        ensure!(
            without_wall_ms(&outputs[0]) == without_wall_ms(&outputs[1]),
            "{cmd} {extra:?} reports differ"
        );
        files += 1;
        let progress: Vec<_> = outputs.iter().map(|o| rskyline_cli::report::progress_path(o)).collect();
        if progress[0].exists() {
            ensure!(
                std::fs::read(&progress[0]).unwrap() == std::fs::read(&progress[1]).unwrap(),
                "{cmd} {extra:?} progress files differ"
            );
            files += 1;
        }
    }
    Ok(format!("{files} file pairs identical"))
}

fn run(budget: Option<Duration>, f: impl FnOnce() -> Outcome) -> (Duration, Outcome) {
    let start = Instant::now();
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        let msg = p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        Err(format!("panicked: {msg}"))
    });
    let took = start.elapsed();
    match (outcome, budget) {
        (Ok(_), Some(b)) if took > b => (took, Err(format!("took {took:.1?}, budget {b:?}"))),
        (o, _) => (took, o),
    }
}

fn main() -> ExitCode {
    let secs = |s| Some(Duration::from_secs(s));
    let mut tally = LedgerTally::default();
    let mut verdicts = vec![(1, "oracle equivalence", run(secs(60), || oracle_equivalence(&mut tally)))];
    let c1_time = verdicts[0].2 .0;
    verdicts.push((2, "greedy guarantee", run(secs(10), greedy_guarantee)));
    verdicts.push((3, "four-candidate optima", run(None, four_candidates)));
    verdicts.push((4, "branch and bound", run(secs(120), branch_and_bound)));
    verdicts.push((5, "batch read ledger", (c1_time, batch_law(&tally))));
    verdicts.push((6, "directional performance", run(secs(600), directional)));
    verdicts.push((7, "determinism", run(None, determinism)));
    let mut failed = false;
    for (n, name, (took, outcome)) in verdicts {
        failed |= report(n, name, took, outcome);
    }
    if failed {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}

/// Prints the verdict line; returns whether the criterion failed.
fn report(n: u32, name: &str, took: Duration, outcome: Outcome) -> bool {
    match outcome {
        Ok(detail) => {
            println!("criterion {n}: PASS  {name} ({took:.1?}) {detail}");
            false
        }
        Err(detail) => {
            println!("criterion {n}: FAIL  {name} ({took:.1?}) {detail}");
            true
        }
    }
}
