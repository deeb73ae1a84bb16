//! Counterexample DAGs: extraction, concretization, feasibility, refinement.
//!
//! An adversary win in the premise game is a memoryless strategy; restricted
//! to the nodes it reaches it forms a DAG whose edges strictly decrease the
//! attractor rank. Concretization walks the DAG bottom-up and assigns every
//! node the subset of its block on which the abstract strategy is concretely
//! realizable. A counterexample whose root concretization contains the
//! initial state is genuine; otherwise the concretization sets split blocks.

use std::collections::HashMap;

use super::{CegarError, Partition, PremiseCheck};
use crate::model::Game;
use crate::relations::SimNode;

/// Node of a counterexample DAG. Components mirror the gadget node:
/// `left` indexes the abstract composite (component state paired with a
/// block), `right` the specification game.
#[derive(Debug, Clone)]
pub struct CexNode {
    pub kind: SimNode,
    pub rank: u32,
    /// DAG indices: the strategy's choice for adversary nodes, every option
    /// for proponent nodes, empty for leaves.
    pub succs: Vec<usize>,
    pub leaf: bool,
    /// Subset of the second component's states, filled by [`concretize`].
    pub conc: Option<Vec<usize>>,
}

/// Counterexample to a premise check, with enough naming context to render
/// it without the originating games.
#[derive(Debug, Clone)]
pub struct CexDag {
    pub nodes: Vec<CexNode>,
    pub root: usize,
    pub(crate) n_blocks: usize,
    pub left_ids: Vec<String>,
    pub right_ids: Vec<String>,
    pub action_ids: Vec<String>,
    /// Ids of the abstracted component's states; concretization sets index
    /// into this list.
    pub component_ids: Vec<String>,
}

impl CexDag {
    /// Splits a composite left index into (component state, block).
    pub fn decompose(&self, composite: u32) -> (usize, usize) {
        (
            composite as usize / self.n_blocks,
            composite as usize % self.n_blocks,
        )
    }

    pub fn block_component(&self, kind: &SimNode) -> usize {
        self.decompose(left_of(kind)).1
    }
}

fn left_of(kind: &SimNode) -> u32 {
    match *kind {
        SimNode::Pair { l, .. }
        | SimNode::SimChallenge { l, .. }
        | SimNode::SimResponse { l, .. }
        | SimNode::AltChallenge { l, .. }
        | SimNode::AltResponse { l, .. }
        | SimNode::AltTarget { l, .. }
        | SimNode::AltMatch { l, .. } => l,
    }
}

/// Restricts the adversary's winning strategy to its reachable DAG.
pub fn extract_cex(check: &PremiseCheck) -> Result<CexDag, CegarError> {
    if check.premise_holds {
        return Err(CegarError::NoCounterexample);
    }
    let game = &check.game;
    let res = &check.result;
    let arena = &game.instance.arena;

    let mut index: HashMap<u32, usize> = HashMap::new();
    let mut nodes: Vec<CexNode> = Vec::new();
    let mut order: Vec<u32> = Vec::new();
    let mut queue = std::collections::VecDeque::new();
    index.insert(game.initial, 0);
    order.push(game.initial);
    nodes.push(placeholder());
    queue.push_back(game.initial);

    while let Some(g) = queue.pop_front() {
        debug_assert!(res.adversary_win[g as usize]);
        let dag_ix = index[&g];
        let kind = game.nodes[g as usize];
        let leaf = game.instance.bad[g as usize];
        let mut succs = Vec::new();
        if !leaf {
            let gadget_succs: Vec<u32> = if kind.adversary_controlled() {
                let slot = arena.slots(g).next().expect("adversary node has a move");
                vec![res.adversary_strategy[slot as usize]
                    .expect("winning adversary node has a strategy entry")]
            } else {
                arena
                    .slots(g)
                    .map(|slot| arena.successors(slot)[0])
                    .collect()
            };
            for t in gadget_succs {
                debug_assert!(res.rank[t as usize] < res.rank[g as usize]);
                let next = *index.entry(t).or_insert_with(|| {
                    order.push(t);
                    nodes.push(placeholder());
                    queue.push_back(t);
                    nodes.len() - 1
                });
                succs.push(next);
            }
        }
        nodes[dag_ix] = CexNode {
            kind,
            rank: res.rank[g as usize],
            succs,
            leaf,
            conc: None,
        };
    }

    Ok(CexDag {
        nodes,
        root: 0,
        n_blocks: check.n_blocks,
        left_ids: check.left_ids.clone(),
        right_ids: check.right_ids.clone(),
        action_ids: check.action_ids.clone(),
        component_ids: check.component_ids.clone(),
    })
}

static EMPTY: Vec<usize> = Vec::new();

fn placeholder() -> CexNode {
    CexNode {
        kind: SimNode::Pair { l: 0, r: 0 },
        rank: 0,
        succs: Vec::new(),
        leaf: false,
        conc: None,
    }
}

/// Computes the concretization bottom-up. `g1` supplies the availability of
/// the component state, `g2` the concrete moves of the abstracted component.
pub fn concretize(
    dag: &mut CexDag,
    g1: &Game,
    g2: &Game,
    part: &Partition,
) -> Result<(), CegarError> {
    if part.n_blocks() != dag.n_blocks {
        return Err(CegarError::MalformedDag(
            "partition does not match the counterexample".into(),
        ));
    }
    // Composite actions carry the first component's numbering; map to g2.
    let g2_action: Vec<Option<usize>> = dag
        .action_ids
        .iter()
        .map(|a| g2.action_index(a))
        .collect();

    let mut by_rank: Vec<usize> = (0..dag.nodes.len()).collect();
    by_rank.sort_by_key(|&i| dag.nodes[i].rank);

    for ix in by_rank {
        let node = dag.nodes[ix].clone();
        let (s1, block) = dag.decompose(left_of(&node.kind));
        let members = part.block(block);
        let conc_of = |dag: &CexDag, j: usize| -> Result<Vec<usize>, CegarError> {
            dag.nodes[j]
                .conc
                .clone()
                .ok_or_else(|| CegarError::MalformedDag("successor concretized late".into()))
        };
        let conc: Vec<usize> = match node.kind {
            SimNode::Pair { .. } => {
                if node.leaf {
                    members.to_vec()
                } else {
                    let &succ = node
                        .succs
                        .first()
                        .ok_or_else(|| CegarError::MalformedDag("pair without successor".into()))?;
                    conc_of(dag, succ)?
                }
            }
            SimNode::SimChallenge { .. } => {
                let &succ = node.succs.first().ok_or_else(|| {
                    CegarError::MalformedDag("challenge without successor".into())
                })?;
                let target = conc_of(dag, succ)?;
                // The abstract challenge committed to a successor of the
                // first component as well; a concrete witness action must
                // reproduce that move, not just hit the concretization.
                let (t1, _) = dag.decompose(left_of(&dag.nodes[succ].kind));
                members
                    .iter()
                    .copied()
                    .filter(|&s| {
                        g1.avail(s1).iter().any(|&a1| {
                            let moves_first = g1
                                .succ_by_action(s1, a1)
                                .is_some_and(|ts| ts.contains(&t1));
                            let Some(a2) = g2_action[a1] else { return false };
                            moves_first
                                && g2.succ_by_action(s, a2).is_some_and(|ts| {
                                    ts.iter().any(|t| target.contains(t))
                                })
                        })
                    })
                    .collect()
            }
            SimNode::SimResponse { .. } => {
                intersect_concs(dag, &node.succs, members, conc_of)?
            }
            SimNode::AltChallenge { .. } => {
                let &succ = node.succs.first().ok_or_else(|| {
                    CegarError::MalformedDag("challenge without successor".into())
                })?;
                let SimNode::AltResponse { act, .. } = dag.nodes[succ].kind else {
                    return Err(CegarError::MalformedDag(
                        "alternating challenge must pick an action".into(),
                    ));
                };
                let target = conc_of(dag, succ)?;
                let a2 = g2_action[act as usize];
                members
                    .iter()
                    .copied()
                    .filter(|&s| {
                        a2.is_some_and(|a| g2.has_action(s, a)) && target.contains(&s)
                    })
                    .collect()
            }
            SimNode::AltResponse { act, .. } => {
                // Successors are targets, or pairs when the forced tail of
                // the gadget was elided; pairs go through the match formula.
                let mut acc: Vec<usize> = members.to_vec();
                for &j in &node.succs {
                    let part_set = match dag.nodes[j].kind {
                        SimNode::Pair { .. } => {
                            let target = conc_of(dag, j)?;
                            match_formula(g2, members, g2_action[act as usize], &target)
                        }
                        _ => conc_of(dag, j)?,
                    };
                    acc.retain(|s| part_set.contains(s));
                }
                acc
            }
            SimNode::AltTarget { .. } => {
                let &succ = node.succs.first().ok_or_else(|| {
                    CegarError::MalformedDag("target without successor".into())
                })?;
                conc_of(dag, succ)?
            }
            SimNode::AltMatch { act, .. } => {
                // Group the proponent's options by the successor of the
                // first component: the concrete proponent may pair any
                // first-component move with any second-component move, so
                // the second component must be covered under each of them.
                let mut unions: HashMap<usize, Vec<usize>> = HashMap::new();
                for &j in &node.succs {
                    let (t1, _) = dag.decompose(left_of(&dag.nodes[j].kind));
                    unions.entry(t1).or_default().extend(conc_of(dag, j)?);
                }
                let firsts: Vec<&Vec<usize>> = g1
                    .succ_by_action(s1, act as usize)
                    .unwrap_or(&[])
                    .iter()
                    .map(|t1| unions.get(t1).map_or(&EMPTY, |v| v))
                    .collect();
                members
                    .iter()
                    .copied()
                    .filter(|&s| match g2_action[act as usize]
                        .and_then(|a| g2.succ_by_action(s, a))
                    {
                        None => true,
                        Some(ts) => firsts
                            .iter()
                            .all(|u| ts.iter().all(|t| u.contains(t))),
                    })
                    .collect()
            }
        };
        dag.nodes[ix].conc = Some(conc);
    }
    Ok(())
}

/// States of the block that either lack the action or steer all of its
/// successors into `target`.
fn match_formula(g2: &Game, members: &[usize], action: Option<usize>, target: &[usize]) -> Vec<usize> {
    members
        .iter()
        .copied()
        .filter(|&s| match action.and_then(|a| g2.succ_by_action(s, a)) {
            None => true,
            Some(ts) => ts.iter().all(|t| target.contains(t)),
        })
        .collect()
}

fn intersect_concs(
    dag: &CexDag,
    succs: &[usize],
    members: &[usize],
    conc_of: impl Fn(&CexDag, usize) -> Result<Vec<usize>, CegarError>,
) -> Result<Vec<usize>, CegarError> {
    let mut acc: Vec<usize> = members.to_vec();
    for &j in succs {
        let c = conc_of(dag, j)?;
        acc.retain(|s| c.contains(s));
    }
    Ok(acc)
}

/// A concretized counterexample is genuine iff the initial state of the
/// abstracted component survives at the root.
pub fn is_feasible(dag: &CexDag, g2: &Game) -> bool {
    dag.nodes[dag.root]
        .conc
        .as_ref()
        .is_some_and(|c| c.contains(&g2.initial()))
}

/// Splits every block by the membership signature over the concretization
/// sets of the DAG nodes carrying it; `improved` additionally separates
/// complement states by their one-step behaviour towards the relevant
/// concretization targets, so that reshaped variants of the same spurious
/// strategy cannot reappear.
pub fn refine(
    part: &Partition,
    dag: &CexDag,
    g2: &Game,
    improved: bool,
) -> Result<Partition, CegarError> {
    // Per-state signature bits, grouped by block.
    let mut signatures: HashMap<usize, Vec<bool>> = HashMap::new();
    for s in 0..part.n_states() {
        signatures.insert(s, Vec::new());
    }
    let g2_action: Vec<Option<usize>> = dag
        .action_ids
        .iter()
        .map(|a| g2.action_index(a))
        .collect();

    for node in &dag.nodes {
        let Some(conc) = &node.conc else {
            return Err(CegarError::MalformedDag("refine needs concretization".into()));
        };
        let block = dag.block_component(&node.kind);
        let members = part.block(block);
        for &s in members {
            signatures.get_mut(&s).unwrap().push(conc.contains(&s));
        }
        if improved {
            let action = match node.kind {
                SimNode::AltChallenge { .. } => node
                    .succs
                    .first()
                    .and_then(|&j| match dag.nodes[j].kind {
                        SimNode::AltResponse { act, .. } => Some(act),
                        _ => None,
                    }),
                SimNode::AltMatch { act, .. } => Some(act),
                _ => None,
            };
            if let Some(act) = action {
                let a2 = g2_action[act as usize];
                for &s in members {
                    let sig = signatures.get_mut(&s).unwrap();
                    sig.push(a2.is_some_and(|a| g2.has_action(s, a)));
                }
            }
            if let SimNode::SimChallenge { .. } = node.kind {
                if let Some(&succ) = node.succs.first() {
                    if let Some(target) = &dag.nodes[succ].conc {
                        for &s in members {
                            // Per-action step bits towards the successor's
                            // concretization.
                            let bits: Vec<bool> = (0..g2.n_actions())
                                .map(|a| {
                                    g2.succ_by_action(s, a).is_some_and(|ts| {
                                        ts.iter().any(|t| target.contains(t))
                                    })
                                })
                                .collect();
                            signatures.get_mut(&s).unwrap().extend(bits);
                        }
                    }
                }
            }
        }
    }

    let mut blocks: Vec<Vec<usize>> = Vec::new();
    for b in 0..part.n_blocks() {
        let members = part.block(b);
        let mut groups: Vec<(&Vec<bool>, Vec<usize>)> = Vec::new();
        for &s in members {
            let sig = &signatures[&s];
            if let Some((_, g)) = groups.iter_mut().find(|(k, _)| *k == sig) {
                g.push(s);
            } else {
                groups.push((sig, vec![s]));
            }
        }
        blocks.extend(groups.into_iter().map(|(_, g)| g));
    }
    if blocks.len() == part.n_blocks() {
        return Err(CegarError::NotRefinable);
    }
    Partition::new(g2, blocks)
}
