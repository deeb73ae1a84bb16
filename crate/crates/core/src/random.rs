//! Seeded random instances for differential testing and the benchmark
//! harness. All generators are deterministic functions of the RNG state.

use num::rational::BigRational;
use num::BigInt;
use rand::Rng;

use crate::logic::{PathOp, PathQuantifier, StateFormula};
use crate::model::{AlternatingGame, Game, GameBuilder, Mdp, MdpBuilder, StrictlyAlternatingMdp};
use crate::cegar::Partition;

/// Shape limits for generated instances.
#[derive(Debug, Clone, Copy)]
pub struct GenConfig {
    pub max_states: usize,
    pub n_actions: usize,
    pub max_succ: usize,
    pub n_props: usize,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            max_states: 6,
            n_actions: 2,
            max_succ: 2,
            n_props: 2,
        }
    }
}

const PROPS: [&str; 4] = ["p", "q", "r", "t"];
const ACTIONS: [&str; 4] = ["a", "b", "c", "d"];

fn labels(rng: &mut impl Rng, cfg: &GenConfig) -> Vec<String> {
    (0..cfg.n_props.min(PROPS.len()))
        .filter(|_| rng.gen_bool(0.4))
        .map(|i| PROPS[i].to_string())
        .collect()
}

/// Random game over the shared alphabet. Action `a` is available everywhere
/// so that compositions never deadlock, and state `s0` carries every action
/// so that all generated games agree on the alphabet.
pub fn random_game(rng: &mut impl Rng, cfg: &GenConfig) -> Game {
    let n = rng.gen_range(1..=cfg.max_states);
    let n_actions = cfg.n_actions.min(ACTIONS.len());
    let mut b = GameBuilder::new();
    for s in 0..n {
        b = b.state(&format!("s{s}"), labels(rng, cfg));
    }
    for s in 0..n {
        for (ai, action) in ACTIONS[..n_actions].iter().enumerate() {
            let present = ai == 0 || s == 0 || rng.gen_bool(0.6);
            if !present {
                continue;
            }
            let k = rng.gen_range(1..=cfg.max_succ.min(n));
            let mut targets: Vec<String> = (0..k)
                .map(|_| format!("s{}", rng.gen_range(0..n)))
                .collect();
            targets.sort();
            targets.dedup();
            b = b.transition(&format!("s{s}"), action, targets);
        }
    }
    b.initial("s0").build().expect("generator emits valid games")
}

/// Random MDP over the shared alphabet.
pub fn random_mdp(rng: &mut impl Rng, cfg: &GenConfig) -> Mdp {
    let n = rng.gen_range(2..=cfg.max_states.max(2));
    let n_prob = rng.gen_range(1..n.max(2));
    let n_actions = cfg.n_actions.min(ACTIONS.len());
    let mut b = MdpBuilder::new();
    let is_prob = |s: usize| s >= n - n_prob;
    for s in 0..n {
        let id = format!("s{s}");
        if is_prob(s) {
            b = b.prob_state(&id, labels(rng, cfg));
        } else {
            b = b.player1_state(&id, labels(rng, cfg));
        }
    }
    for s in 0..n {
        let id = format!("s{s}");
        if is_prob(s) {
            let k = rng.gen_range(1..=cfg.max_succ.min(n));
            let mut support: Vec<usize> = (0..k).map(|_| rng.gen_range(0..n)).collect();
            support.sort_unstable();
            support.dedup();
            let m = support.len() as i64;
            let entries: Vec<(String, BigRational)> = support
                .iter()
                .map(|&t| {
                    (
                        format!("s{t}"),
                        BigRational::new(BigInt::from(1), BigInt::from(m)),
                    )
                })
                .collect();
            b = b.dist(&id, entries);
        } else {
            for (ai, action) in ACTIONS[..n_actions].iter().enumerate() {
                if ai == 0 || s == 0 || rng.gen_bool(0.6) {
                    let t = rng.gen_range(0..n);
                    b = b.mv(&id, action, &format!("s{t}"));
                }
            }
        }
    }
    b.initial("s0").build().expect("generator emits valid MDPs")
}

/// Random strictly alternating MDP: Player-1 states move to probabilistic
/// states and back, the initial state is Player-1.
pub fn random_strictly_alternating_mdp(
    rng: &mut impl Rng,
    cfg: &GenConfig,
) -> StrictlyAlternatingMdp {
    let half = rng.gen_range(1..=(cfg.max_states / 2).max(1));
    let n_actions = cfg.n_actions.min(ACTIONS.len());
    let mut b = MdpBuilder::new();
    for s in 0..half {
        b = b.player1_state(&format!("c{s}"), labels(rng, cfg));
        b = b.prob_state(&format!("p{s}"), labels(rng, cfg));
    }
    for s in 0..half {
        for (ai, action) in ACTIONS[..n_actions].iter().enumerate() {
            if ai == 0 || s == 0 || rng.gen_bool(0.6) {
                let t = rng.gen_range(0..half);
                b = b.mv(&format!("c{s}"), action, &format!("p{t}"));
            }
        }
        let k = rng.gen_range(1..=cfg.max_succ.min(half));
        let mut support: Vec<usize> = (0..k).map(|_| rng.gen_range(0..half)).collect();
        support.sort_unstable();
        support.dedup();
        let m = support.len() as i64;
        let entries: Vec<(String, BigRational)> = support
            .iter()
            .map(|&t| {
                (
                    format!("c{t}"),
                    BigRational::new(BigInt::from(1), BigInt::from(m)),
                )
            })
            .collect();
        b = b.dist(&format!("p{s}"), entries);
    }
    let m = b.initial("c0").build().expect("generator emits valid MDPs");
    StrictlyAlternatingMdp::new(m).expect("construction alternates strictly")
}

/// Random alternating game, produced through the two-player interpretation
/// of a random MDP.
pub fn random_alternating_game(rng: &mut impl Rng, cfg: &GenConfig) -> AlternatingGame {
    random_mdp(rng, cfg).to_game()
}

/// Random label-consistent partition: label classes are randomly subdivided.
pub fn random_partition(rng: &mut impl Rng, game: &Game) -> Partition {
    let coarsest = crate::cegar::coarsest_partition(game);
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    for b in 0..coarsest.n_blocks() {
        let members = coarsest.block(b);
        let k = rng.gen_range(1..=members.len());
        let mut parts: Vec<Vec<usize>> = (0..k).map(|_| Vec::new()).collect();
        for &s in members {
            parts[rng.gen_range(0..k)].push(s);
        }
        blocks.extend(parts.into_iter().filter(|p| !p.is_empty()));
    }
    Partition::new(game, blocks).expect("label classes stay consistent")
}

/// Random formula over `atoms` with the given quantifier family and nesting
/// depth.
pub fn random_formula(
    rng: &mut impl Rng,
    atoms: &[String],
    quants: &[PathQuantifier],
    depth: usize,
) -> StateFormula {
    let leaf = |rng: &mut dyn rand::RngCore| -> StateFormula {
        if atoms.is_empty() {
            return StateFormula::True;
        }
        let a = &atoms[rng.gen_range(0..atoms.len())];
        match rng.gen_range(0..4) {
            0 => StateFormula::neg_atom(a),
            1 => StateFormula::True,
            _ => StateFormula::atom(a),
        }
    };
    if depth == 0 {
        return leaf(rng);
    }
    match rng.gen_range(0..5) {
        0 => random_formula(rng, atoms, quants, depth - 1)
            .and(random_formula(rng, atoms, quants, depth - 1)),
        1 => random_formula(rng, atoms, quants, depth - 1)
            .or(random_formula(rng, atoms, quants, depth - 1)),
        _ => {
            let q = quants[rng.gen_range(0..quants.len())];
            let op = match rng.gen_range(0..3) {
                0 => PathOp::Next(Box::new(random_formula(rng, atoms, quants, depth - 1))),
                1 => PathOp::Until(
                    Box::new(random_formula(rng, atoms, quants, depth - 1)),
                    Box::new(random_formula(rng, atoms, quants, depth - 1)),
                ),
                _ => PathOp::WeakUntil(
                    Box::new(random_formula(rng, atoms, quants, depth - 1)),
                    Box::new(random_formula(rng, atoms, quants, depth - 1)),
                ),
            };
            StateFormula::Quant(q, op)
        }
    }
}

/// Deterministic pool of small games used by exhaustive differential tests:
/// every one- and two-state shape over one action and one proposition, plus
/// seeded samples up to `extra_max_states`.
pub fn small_game_pool(extra: usize, extra_max_states: usize, seed: u64) -> Vec<Game> {
    let mut pool = Vec::new();
    // One-state games: label on or off.
    for lab in [false, true] {
        let labels: Vec<String> = if lab { vec!["p".into()] } else { vec![] };
        let g = GameBuilder::new()
            .state("s0", labels)
            .transition("s0", "a", ["s0"])
            .initial("s0")
            .build()
            .unwrap();
        pool.push(g);
    }
    // Two-state games over one action: enumerate label pattern and the
    // successor sets of both states (non-empty subsets of {s0, s1}).
    for lab0 in [false, true] {
        for lab1 in [false, true] {
            for d0 in 1..4usize {
                for d1 in 1..4usize {
                    let subset = |mask: usize| -> Vec<String> {
                        let mut v = Vec::new();
                        if mask & 1 != 0 {
                            v.push("s0".to_string());
                        }
                        if mask & 2 != 0 {
                            v.push("s1".to_string());
                        }
                        v
                    };
                    let l = |on: bool| -> Vec<String> {
                        if on {
                            vec!["p".into()]
                        } else {
                            vec![]
                        }
                    };
                    let g = GameBuilder::new()
                        .state("s0", l(lab0))
                        .state("s1", l(lab1))
                        .transition("s0", "a", subset(d0))
                        .transition("s1", "a", subset(d1))
                        .initial("s0")
                        .build()
                        .unwrap();
                    pool.push(g);
                }
            }
        }
    }
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let cfg = GenConfig {
        max_states: extra_max_states,
        n_actions: 2,
        max_succ: 2,
        n_props: 1,
    };
    for _ in 0..extra {
        pool.push(random_game(&mut rng, &cfg));
    }
    pool
}
