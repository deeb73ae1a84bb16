//! Randomized cross-check of the assume-guarantee engine against the
//! monolithic check, with one table row per instance.
//!
//! Instances are generated from per-index seeds derived from the base seed,
//! so the table is identical regardless of how many worker threads run
//! (capped by `COMBSIM_THREADS`).

use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use combsim::cegar::{ag_cegar, AgOptions, AgOutcome};
use combsim::model::Game;
use combsim::random::{random_game, GenConfig};
use combsim::relations::combined_simulates;

struct Row {
    idx: usize,
    sizes: (usize, usize, usize),
    mono: bool,
    ag: &'static str,
    agree: bool,
    iterations: usize,
    partition: usize,
    peak: usize,
}

fn instance(seed: u64, idx: usize, max_states: usize) -> (Game, Game, Game) {
    let mut r = ChaCha8Rng::seed_from_u64(seed ^ (idx as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let cfg = |max| GenConfig {
        max_states: max,
        n_actions: 2,
        max_succ: 2,
        n_props: 2,
    };
    let g1 = random_game(&mut r, &cfg(max_states.clamp(1, 4)));
    let g2 = random_game(&mut r, &cfg(max_states));
    let spec = if r.gen_bool(0.3) {
        g1.compose(&g2).expect("generated games share action a")
    } else {
        random_game(&mut r, &cfg(max_states))
    };
    (g1, g2, spec)
}

fn run_one(seed: u64, idx: usize, max_states: usize) -> Row {
    let (g1, g2, spec) = instance(seed, idx, max_states);
    let mono = combined_simulates(&g1.compose(&g2).expect("shared action a"), &spec);
    let (outcome, stats) =
        ag_cegar(&g1, &g2, &spec, AgOptions::default()).expect("well-formed instance");
    let agree = match outcome {
        AgOutcome::Holds => mono,
        AgOutcome::Refuted(_) => !mono,
        AgOutcome::Exhausted => false,
    };
    Row {
        idx,
        sizes: (g1.n_states(), g2.n_states(), spec.n_states()),
        mono,
        ag: outcome.verdict_str(),
        agree,
        iterations: stats.iterations,
        partition: stats.partition_size,
        peak: stats.peak_arena_nodes,
    }
}

fn worker_count(count: usize) -> usize {
    let avail = std::thread::available_parallelism().map_or(1, |n| n.get());
    let cap = std::env::var("COMBSIM_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or(avail);
    cap.min(count).max(1)
}

pub fn run(seed: u64, count: usize, max_states: usize) -> Result<ExitCode, String> {
    let mut rows: Vec<Option<Row>> = (0..count).map(|_| None).collect();
    let workers = worker_count(count);
    let next = AtomicUsize::new(0);
    let results: Vec<(usize, Row)> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|_| {
                let next = &next;
                scope.spawn(move || {
                    let mut mine = Vec::new();
                    loop {
                        let idx = next.fetch_add(1, Ordering::Relaxed);
                        if idx >= count {
                            return mine;
                        }
                        mine.push((idx, run_one(seed, idx, max_states)));
                    }
                })
            })
            .collect();
        handles.into_iter().flat_map(|h| h.join().unwrap()).collect()
    });
    for (idx, row) in results {
        rows[idx] = Some(row);
    }

    println!("{:>4} {:>4} {:>4} {:>5}  {:<7} {:<9} {:<5} {:>3} {:>4} {:>9}",
        "idx", "|g1|", "|g2|", "|spec|", "mono", "ag", "agree", "I", "|P|", "peak");
    let mut agreements = 0usize;
    for row in rows.iter().map(|r| r.as_ref().expect("all rows filled")) {
        if row.agree {
            agreements += 1;
        }
        println!(
            "{:>4} {:>4} {:>4} {:>5}  {:<7} {:<9} {:<5} {:>3} {:>4} {:>9}",
            row.idx,
            row.sizes.0,
            row.sizes.1,
            row.sizes.2,
            if row.mono { "yes" } else { "no" },
            row.ag,
            row.agree,
            row.iterations,
            row.partition,
            row.peak,
        );
    }
    println!("agreements: {agreements}/{count}");
    if agreements == count {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(3))
    }
}
