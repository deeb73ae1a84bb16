//! Assume-guarantee verification of combined simulation with
//! counterexample-guided partition refinement.
//!
//! The second component is abstracted twice from one label-consistent
//! partition: the simulation abstraction over-approximates both players, the
//! alternating-simulation abstraction strengthens Player 1 and weakens
//! Player 2. Both abstractions compose with the first component and feed the
//! modified gadget game; a proponent win proves the composition refines the
//! specification. An adversary win yields a counterexample DAG whose
//! bottom-up concretization either certifies the refutation or splits
//! partition blocks for the next round.

use std::collections::BTreeSet;
use std::time::Instant;

use thiserror::Error;

use crate::model::{Game, Mdp, ModelError};
use crate::relations::{
    build_modified_game, build_modified_game_skip, RelationError, Seed, SimGame,
};
use crate::solve::SolveResult;

mod cex;

pub use cex::{concretize, extract_cex, is_feasible, refine, CexDag, CexNode};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CegarError {
    #[error("partition does not cover state `{0}` exactly once")]
    NotAPartition(String),
    #[error("block {0} mixes states with different labels")]
    MixedLabels(usize),
    #[error("proponent wins; there is no counterexample")]
    NoCounterexample,
    #[error("counterexample DAG is malformed: {0}")]
    MalformedDag(String),
    #[error("no block splits under the counterexample's concretization")]
    NotRefinable,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Relation(#[from] RelationError),
}

/// Label-consistent partition of a game's states. Blocks are ordered and
/// non-empty; every state belongs to exactly one block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    blocks: Vec<Vec<usize>>,
    block_of: Vec<usize>,
}

impl Partition {
    /// Validates disjointness, coverage and the per-block label match.
    pub fn new(game: &Game, blocks: Vec<Vec<usize>>) -> Result<Self, CegarError> {
        let n = game.n_states();
        let mut block_of = vec![usize::MAX; n];
        for (b, members) in blocks.iter().enumerate() {
            for &s in members {
                if s >= n || block_of[s] != usize::MAX {
                    return Err(CegarError::NotAPartition(
                        game.state_id(s.min(n - 1)).to_string(),
                    ));
                }
                block_of[s] = b;
            }
            if members.is_empty() {
                return Err(CegarError::NotAPartition(format!("<empty block {b}>")));
            }
            let first = members[0];
            if members.iter().any(|&s| game.labels(s) != game.labels(first)) {
                return Err(CegarError::MixedLabels(b));
            }
        }
        if let Some(s) = block_of.iter().position(|&b| b == usize::MAX) {
            return Err(CegarError::NotAPartition(game.state_id(s).to_string()));
        }
        let mut blocks = blocks;
        for members in &mut blocks {
            members.sort_unstable();
        }
        Ok(Partition { blocks, block_of })
    }

    pub fn n_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn block(&self, b: usize) -> &[usize] {
        &self.blocks[b]
    }

    pub fn block_of(&self, s: usize) -> usize {
        self.block_of[s]
    }

    pub fn n_states(&self) -> usize {
        self.block_of.len()
    }

    pub fn is_singleton(&self) -> bool {
        self.blocks.iter().all(|b| b.len() == 1)
    }
}

/// Coarsest partition: one block per label class, ordered by first
/// occurrence.
pub fn coarsest_partition(game: &Game) -> Partition {
    let mut classes: Vec<(&BTreeSet<String>, Vec<usize>)> = Vec::new();
    for s in 0..game.n_states() {
        let labels = game.labels(s);
        if let Some((_, members)) = classes.iter_mut().find(|(l, _)| *l == labels) {
            members.push(s);
        } else {
            classes.push((labels, vec![s]));
        }
    }
    let blocks: Vec<Vec<usize>> = classes.into_iter().map(|(_, m)| m).collect();
    Partition::new(game, blocks).expect("label classes form a partition")
}

fn block_id(b: usize) -> String {
    format!("b{b}")
}

/// Simulation abstraction: block availability is the union of member
/// availabilities, and a block moves wherever some member moves. The quotient
/// simulates the original game.
pub fn simulation_abstraction(game: &Game, part: &Partition) -> Game {
    quotient(game, part, false)
}

/// Alternating-simulation abstraction: availability is again the union, but a
/// block moves only where every member moves. Actions not shared by all
/// members keep an empty successor set, which downstream consumers read as an
/// unanswerable challenge; dropping them instead would hide concrete
/// adversary moves from the premise game.
pub fn alternating_simulation_abstraction(game: &Game, part: &Partition) -> Game {
    quotient(game, part, true)
}

fn quotient(game: &Game, part: &Partition, must: bool) -> Game {
    let k = part.n_blocks();
    let ids: Vec<String> = (0..k).map(block_id).collect();
    let labels: Vec<BTreeSet<String>> = (0..k)
        .map(|b| game.labels(part.block(b)[0]).clone())
        .collect();
    let mut avail = Vec::with_capacity(k);
    let mut delta = Vec::with_capacity(k);
    for b in 0..k {
        let members = part.block(b);
        let mut actions: Vec<usize> = members
            .iter()
            .flat_map(|&s| game.avail(s).iter().copied())
            .collect();
        actions.sort_unstable();
        actions.dedup();
        let mut row = Vec::with_capacity(actions.len());
        for &a in &actions {
            let mut targets: Vec<usize> = Vec::new();
            if must {
                // Blocks reachable from every member under `a`.
                let mut first = true;
                for &s in members {
                    let mut mine: Vec<usize> = match game.succ_by_action(s, a) {
                        Some(ts) => ts.iter().map(|&t| part.block_of(t)).collect(),
                        None => Vec::new(),
                    };
                    mine.sort_unstable();
                    mine.dedup();
                    if first {
                        targets = mine;
                        first = false;
                    } else {
                        targets.retain(|b| mine.contains(b));
                    }
                    if targets.is_empty() {
                        break;
                    }
                }
            } else {
                for &s in members {
                    if let Some(ts) = game.succ_by_action(s, a) {
                        targets.extend(ts.iter().map(|&t| part.block_of(t)));
                    }
                }
                targets.sort_unstable();
                targets.dedup();
            }
            row.push(targets);
        }
        avail.push(actions);
        delta.push(row);
    }
    let initial = part.block_of(game.initial());
    Game::from_parts_unchecked(ids, game.action_ids().to_vec(), avail, delta, labels, initial)
}

/// `first ∥ second` over the full state product, without reachability
/// restriction. Composite index `l * second.n_states() + r` keeps the
/// decomposition arithmetic trivial; pairs with an empty action intersection
/// are kept and read as deadlocks.
pub(crate) fn compose_full(first: &Game, second: &Game) -> Game {
    let (n1, n2) = (first.n_states(), second.n_states());
    let actions = first.action_ids().to_vec();
    let other_act: Vec<usize> = actions
        .iter()
        .map(|a| second.action_index(a).expect("shared alphabet"))
        .collect();
    let mut ids = Vec::with_capacity(n1 * n2);
    let mut labels = Vec::with_capacity(n1 * n2);
    let mut avail = Vec::with_capacity(n1 * n2);
    let mut delta = Vec::with_capacity(n1 * n2);
    for l in 0..n1 {
        for r in 0..n2 {
            ids.push(format!("({},{})", first.state_id(l), second.state_id(r)));
            labels.push(first.labels(l).union(second.labels(r)).cloned().collect());
            let mut row_avail = Vec::new();
            let mut row_delta = Vec::new();
            for (slot, &a) in first.avail(l).iter().enumerate() {
                let Some(rslot) = second.avail(r).binary_search(&other_act[a]).ok() else {
                    continue;
                };
                let mut succs = Vec::new();
                for &lt in first.succ(l, slot) {
                    for &rt in second.succ(r, rslot) {
                        succs.push(lt * n2 + rt);
                    }
                }
                succs.sort_unstable();
                row_avail.push(a);
                row_delta.push(succs);
            }
            avail.push(row_avail);
            delta.push(row_delta);
        }
    }
    let initial = first.initial() * n2 + second.initial();
    Game::from_parts_unchecked(ids, actions, avail, delta, labels, initial)
}

/// One premise check of the assume-guarantee rule, keeping everything the
/// counterexample analysis needs.
pub struct PremiseCheck {
    pub game: SimGame,
    pub result: SolveResult,
    pub premise_holds: bool,
    /// Number of blocks of the partition the abstractions were built from.
    pub(crate) n_blocks: usize,
    /// State ids of the abstract composite (gadget left side).
    pub(crate) left_ids: Vec<String>,
    /// State ids of the specification (gadget right side).
    pub(crate) right_ids: Vec<String>,
    /// Action ids of the composite, in composite numbering.
    pub(crate) action_ids: Vec<String>,
    /// State ids of the abstracted component, for concretization dumps.
    pub(crate) component_ids: Vec<String>,
}

impl PremiseCheck {
    /// Splits a composite left-state index into (component state, block).
    pub fn decompose(&self, composite: u32) -> (usize, usize) {
        (
            composite as usize / self.n_blocks,
            composite as usize % self.n_blocks,
        )
    }
}

/// Builds both abstractions of `g2` under `part`, composes each with `g1`,
/// and solves the modified gadget game against `spec`. A proponent win at the
/// initial pair establishes that `g1 ∥ g2` is combined-simulated by `spec`.
pub fn check_ag_premise(
    g1: &Game,
    g2: &Game,
    part: &Partition,
    spec: &Game,
    skip_steps: bool,
) -> Result<PremiseCheck, CegarError> {
    if !crate::model::same_alphabet(g1.action_ids(), g2.action_ids()) {
        return Err(CegarError::Model(ModelError::AlphabetMismatch));
    }
    let alt_abs = alternating_simulation_abstraction(g2, part);
    let sim_abs = simulation_abstraction(g2, part);
    let alt_comp = compose_full(g1, &alt_abs);
    let sim_comp = compose_full(g1, &sim_abs);
    let game = if skip_steps {
        build_modified_game_skip(&alt_comp, &sim_comp, spec, Seed::Reachable)?
    } else {
        build_modified_game(&alt_comp, &sim_comp, spec, Seed::Reachable)?
    };
    let result = game.solve();
    let premise_holds = result.proponent_wins(game.initial);
    let left_ids = (0..alt_comp.n_states())
        .map(|s| alt_comp.state_id(s).to_string())
        .collect();
    let right_ids = (0..spec.n_states())
        .map(|s| spec.state_id(s).to_string())
        .collect();
    Ok(PremiseCheck {
        game,
        result,
        premise_holds,
        n_blocks: part.n_blocks(),
        left_ids,
        right_ids,
        action_ids: alt_comp.action_ids().to_vec(),
        component_ids: (0..g2.n_states())
            .map(|s| g2.state_id(s).to_string())
            .collect(),
    })
}

/// Outcome of the assume-guarantee loop.
#[derive(Debug)]
pub enum AgOutcome {
    /// The composition refines the specification.
    Holds,
    /// Refuted, with the feasible abstract counterexample.
    Refuted(CexDag),
    /// The iteration budget ran out before an answer was reached.
    Exhausted,
}

impl AgOutcome {
    pub fn verdict_str(&self) -> &'static str {
        match self {
            AgOutcome::Holds => "holds",
            AgOutcome::Refuted(_) => "refuted",
            AgOutcome::Exhausted => "exhausted",
        }
    }
}

/// Per-run statistics of the assume-guarantee loop.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunStats {
    /// Premise checks performed.
    pub iterations: usize,
    /// Block count of the final partition.
    pub partition_size: usize,
    /// Largest gadget arena solved in any iteration.
    pub peak_arena_nodes: usize,
    /// Spurious counterexamples refined away.
    pub refinements: usize,
    /// Refinements that needed the structural fallback splitter.
    pub fallback_splits: usize,
    pub wall: std::time::Duration,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct AgOptions {
    pub max_iters: Option<usize>,
    /// Split spurious blocks by the per-action step signature in addition to
    /// the concretization signature.
    pub improved_refine: bool,
    /// Elide forced alternating-gadget steps in the premise game.
    pub skip_steps: bool,
}

/// Assume-guarantee CEGAR: starting from the coarsest partition of `g2`,
/// checks the premise, refutes on feasible counterexamples, refines on
/// spurious ones, and stops when the premise holds. Terminates because every
/// refinement adds at least one block.
///
/// If the concretization signature refines nothing (possible when the
/// abstract adversary exploits an unanswerable challenge whose concretization
/// collapses to the empty set), a deterministic one-step behavioural splitter
/// keeps the loop progressing.
pub fn ag_cegar(
    g1: &Game,
    g2: &Game,
    spec: &Game,
    opts: AgOptions,
) -> Result<(AgOutcome, RunStats), CegarError> {
    let start = Instant::now();
    let mut part = coarsest_partition(g2);
    let mut stats = RunStats {
        iterations: 0,
        partition_size: part.n_blocks(),
        peak_arena_nodes: 0,
        refinements: 0,
        fallback_splits: 0,
        wall: std::time::Duration::ZERO,
    };
    loop {
        if let Some(limit) = opts.max_iters {
            if stats.iterations >= limit {
                stats.wall = start.elapsed();
                return Ok((AgOutcome::Exhausted, stats));
            }
        }
        stats.iterations += 1;
        stats.partition_size = part.n_blocks();
        let check = check_ag_premise(g1, g2, &part, spec, opts.skip_steps)?;
        stats.peak_arena_nodes = stats.peak_arena_nodes.max(check.game.n_nodes());
        if check.premise_holds {
            stats.wall = start.elapsed();
            return Ok((AgOutcome::Holds, stats));
        }
        let mut dag = extract_cex(&check)?;
        concretize(&mut dag, g1, g2, &part)?;
        if is_feasible(&dag, g2) {
            stats.wall = start.elapsed();
            return Ok((AgOutcome::Refuted(dag), stats));
        }
        stats.refinements += 1;
        part = match refine(&part, &dag, g2, opts.improved_refine) {
            Ok(p) => p,
            Err(CegarError::NotRefinable) => {
                stats.fallback_splits += 1;
                fallback_split(g2, &part)?
            }
            Err(e) => return Err(e),
        };
    }
}

/// Deterministic splitter of last resort: separates states inside one block
/// by their one-step behaviour (availability and target blocks per action),
/// and failing that cuts the lowest-index state out of the first non-singleton
/// block. Guarantees strict progress towards the singleton partition, where
/// the premise game coincides with the monolithic one.
type StepSignature = Vec<(usize, Vec<usize>)>;

fn fallback_split(g2: &Game, part: &Partition) -> Result<Partition, CegarError> {
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    let mut split = false;
    for b in 0..part.n_blocks() {
        let members = part.block(b);
        if split || members.len() == 1 {
            blocks.push(members.to_vec());
            continue;
        }
        let mut groups: Vec<(StepSignature, Vec<usize>)> = Vec::new();
        for &s in members {
            let sig: StepSignature = g2
                .moves(s)
                .map(|(a, ts)| {
                    let mut bs: Vec<usize> = ts.iter().map(|&t| part.block_of(t)).collect();
                    bs.sort_unstable();
                    bs.dedup();
                    (a, bs)
                })
                .collect();
            if let Some((_, g)) = groups.iter_mut().find(|(k, _)| *k == sig) {
                g.push(s);
            } else {
                groups.push((sig, vec![s]));
            }
        }
        if groups.len() > 1 {
            split = true;
            blocks.extend(groups.into_iter().map(|(_, g)| g));
        } else {
            blocks.push(members.to_vec());
        }
    }
    if !split {
        // Behaviourally uniform blocks: cut one state loose.
        blocks.clear();
        for b in 0..part.n_blocks() {
            let members = part.block(b);
            if !split && members.len() > 1 {
                split = true;
                blocks.push(vec![members[0]]);
                blocks.push(members[1..].to_vec());
            } else {
                blocks.push(members.to_vec());
            }
        }
    }
    debug_assert!(split, "fallback_split requires a non-singleton partition");
    Partition::new(g2, blocks)
}

/// Interprets three MDPs as games and runs the assume-guarantee loop on
/// them; verdicts are qualitative only.
pub fn ag_cegar_mdp(
    m1: &Mdp,
    m2: &Mdp,
    spec: &Mdp,
    opts: AgOptions,
) -> Result<(AgOutcome, RunStats), CegarError> {
    let g1 = m1.to_game().into_game();
    let g2 = m2.to_game().into_game();
    let s = spec.to_game().into_game();
    ag_cegar(&g1, &g2, &s, opts)
}
