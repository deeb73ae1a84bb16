//! Distinguishing-formula synthesis for alternating games.
//!
//! When a pair of states is outside the largest combined simulation, the
//! adversary has a memoryless winning strategy in the gadget game; walking it
//! by decreasing rank yields a formula that holds on the left state and fails
//! on the right one. The construction is defined for alternating games only,
//! where every pair on the winning path is owned by a single player.

use std::collections::HashMap;

use super::*;
use crate::model::{AlternatingGame, Owner};
use crate::relations::{build_combined_game, Seed, SimGame, SimNode};
use crate::solve::SolveResult;

/// Synthesizes a formula satisfied by `left_state` but not by `right_state`.
///
/// Fails with [`LogicError::NotDistinguishable`] when the pair lies in the
/// largest combined simulation.
pub fn distinguishing_formula(
    left: &AlternatingGame,
    right: &AlternatingGame,
    left_state: &str,
    right_state: &str,
) -> Result<StateFormula, LogicError> {
    let lg = left.game();
    let rg = right.game();
    let l = lg
        .state_index(left_state)
        .ok_or_else(|| LogicError::UnknownState(left_state.to_string()))?;
    let r = rg
        .state_index(right_state)
        .ok_or_else(|| LogicError::UnknownState(right_state.to_string()))?;

    let sg = build_combined_game(lg, rg, Seed::AllPairs);
    let res = sg.solve();
    let root = sg.pair_node(l, r).expect("all pairs seeded");
    if res.proponent_wins(root) {
        return Err(LogicError::NotDistinguishable(
            left_state.to_string(),
            right_state.to_string(),
        ));
    }

    let mut builder = FormulaBuilder {
        left,
        right: rg,
        sg: &sg,
        res: &res,
        memo: HashMap::new(),
    };
    let formula = builder.pair_formula(root);

    debug_assert!({
        let sat_l = eval_atl(lg, &formula).unwrap();
        let sat_r = eval_atl(rg, &formula).unwrap();
        sat_l[l] && !sat_r[r]
    });
    Ok(formula)
}

struct FormulaBuilder<'a> {
    left: &'a AlternatingGame,
    right: &'a Game,
    sg: &'a SimGame,
    res: &'a SolveResult,
    memo: HashMap<u32, StateFormula>,
}

impl<'a> FormulaBuilder<'a> {
    /// Single successor chosen by the adversary at an adversary node.
    fn chosen(&self, node: u32) -> u32 {
        let slot = self.sg.instance.arena.slots(node).next().expect("gadget node");
        self.res.adversary_strategy[slot as usize].expect("winning node has a choice")
    }

    fn proponent_options(&self, node: u32) -> impl Iterator<Item = u32> + '_ {
        self.sg
            .instance
            .arena
            .slots(node)
            .map(move |slot| self.sg.instance.arena.successors(slot)[0])
    }

    fn pair_formula(&mut self, node: u32) -> StateFormula {
        if let Some(f) = self.memo.get(&node) {
            return f.clone();
        }
        let SimNode::Pair { l, r } = self.sg.nodes[node as usize] else {
            unreachable!("formulas are built at pair nodes");
        };
        let (l, r) = (l as usize, r as usize);
        debug_assert!(self.res.adversary_win[node as usize]);

        let lg = self.left.game();
        let formula = if self.sg.instance.bad[node as usize] {
            // Label mismatch: one literal settles it.
            if let Some(q) = lg.labels(l).difference(self.right.labels(r)).next() {
                StateFormula::atom(q)
            } else {
                let q = self
                    .right
                    .labels(r)
                    .difference(lg.labels(l))
                    .next()
                    .expect("mismatched labels differ somewhere");
                StateFormula::neg_atom(q)
            }
        } else {
            let branch = self.chosen(node);
            match self.sg.nodes[branch as usize] {
                SimNode::AltChallenge { .. } => self.alt_formula(branch, l),
                SimNode::SimChallenge { .. } => self.sim_formula(branch, l),
                _ => unreachable!("pair nodes branch into gadget heads"),
            }
        };
        self.memo.insert(node, formula.clone());
        formula
    }

    /// Alternating branch. The adversary commits to a left action; the
    /// recursion collects one sub-formula per proponent option.
    fn alt_formula(&mut self, challenge: u32, l: usize) -> StateFormula {
        let response = self.chosen(challenge);
        match self.left.owner(l) {
            Owner::Player1 => {
                // Deterministic moves on both sides: each right reply lands in
                // one pair; all replies must be covered at once.
                let mut parts = Vec::new();
                for target in self.proponent_options(response).collect::<Vec<_>>() {
                    let matched = self.chosen(target);
                    let pair = self
                        .proponent_options(matched)
                        .next()
                        .expect("player-1 states have a unique successor");
                    parts.push(self.pair_formula(pair));
                }
                StateFormula::quant_next(PathQuantifier::Player1, conjoin(parts))
            }
            Owner::Player2 => {
                // Forced actions; the adversary picks the right successor and
                // the proponent scatters over the left ones.
                let target = self
                    .proponent_options(response)
                    .next()
                    .expect("player-2 states have a unique action");
                let matched = self.chosen(target);
                let mut parts = Vec::new();
                for pair in self.proponent_options(matched).collect::<Vec<_>>() {
                    parts.push(self.pair_formula(pair));
                }
                StateFormula::quant_next(PathQuantifier::Player1, disjoin(parts))
            }
        }
    }

    /// Simulation branch. The adversary commits to a left successor; the
    /// proponent may answer with any right successor, so the sub-formulas of
    /// all answers are conjoined.
    fn sim_formula(&mut self, challenge: u32, l: usize) -> StateFormula {
        let response = self.chosen(challenge);
        let mut parts = Vec::new();
        for pair in self.proponent_options(response).collect::<Vec<_>>() {
            parts.push(self.pair_formula(pair));
        }
        let q = match self.left.owner(l) {
            Owner::Player1 => PathQuantifier::Player1,
            Owner::Player2 => PathQuantifier::Both,
        };
        StateFormula::quant_next(q, conjoin(parts))
    }
}

fn dedup(parts: Vec<StateFormula>) -> Vec<StateFormula> {
    let mut out: Vec<StateFormula> = Vec::new();
    for p in parts {
        if !out.contains(&p) {
            out.push(p);
        }
    }
    out
}

fn conjoin(parts: Vec<StateFormula>) -> StateFormula {
    let mut parts = dedup(parts);
    let first = parts.remove(0);
    parts.into_iter().fold(first, |acc, p| acc.and(p))
}

fn disjoin(parts: Vec<StateFormula>) -> StateFormula {
    let mut parts = dedup(parts);
    let first = parts.remove(0);
    parts.into_iter().fold(first, |acc, p| acc.or(p))
}
