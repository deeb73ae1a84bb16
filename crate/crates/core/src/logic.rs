//! Formula AST and model checking for the game and MDP logics.
//!
//! Formulas are in positive normal form: negation occurs only on atoms, and
//! every temporal operator sits directly under a path quantifier. Evaluation
//! is bottom-up; quantified operators reduce to predecessor operators and
//! fixpoints over state sets, so sub-results substitute for atoms without any
//! syntactic rewriting.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::model::{Game, Mdp, Role};
use crate::solve::{pre_exists_exists, pre_exists_forall};

mod distinguish;
mod qctl;

pub use distinguish::distinguishing_formula;
pub use qctl::{almost_until, apre, eval_qctl, f_apre_check};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LogicError {
    #[error("path quantifier {0} cannot be evaluated on this model kind")]
    WrongQuantifierFamily(PathQuantifier),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("states `{0}` and `{1}` are combined-similar; nothing distinguishes them")]
    NotDistinguishable(String, String),
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("{0}")]
    NotAlternating(String),
}

/// Path quantifiers of the game logic (`Player1`, `Player2`, `Both`,
/// `NoPlayers`) and of the qualitative MDP logic (`Almost`, `Positive`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PathQuantifier {
    /// Player 1 alone enforces the path formula.
    Player1,
    /// Player 2 alone enforces it.
    Player2,
    /// Both players cooperate.
    Both,
    /// The path formula holds on every play.
    NoPlayers,
    /// Probability one under some strategy.
    Almost,
    /// Positive probability under some strategy.
    Positive,
}

impl std::fmt::Display for PathQuantifier {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            PathQuantifier::Player1 => "<<1>>",
            PathQuantifier::Player2 => "<<2>>",
            PathQuantifier::Both => "<<1,2>>",
            PathQuantifier::NoPlayers => "<<0>>",
            PathQuantifier::Almost => "<Almost>",
            PathQuantifier::Positive => "<Positive>",
        };
        f.write_str(s)
    }
}

/// Temporal layer: exactly one operator per quantifier.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum PathOp {
    Next(Box<StateFormula>),
    Until(Box<StateFormula>, Box<StateFormula>),
    WeakUntil(Box<StateFormula>, Box<StateFormula>),
}

/// State formula in positive normal form. `True`/`False` are primitive so
/// that safety objectives (`f W false`) need no designated atom.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum StateFormula {
    True,
    False,
    Atom(String),
    NegAtom(String),
    And(Box<StateFormula>, Box<StateFormula>),
    Or(Box<StateFormula>, Box<StateFormula>),
    Quant(PathQuantifier, PathOp),
}

impl StateFormula {
    pub fn atom(name: &str) -> Self {
        StateFormula::Atom(name.to_string())
    }

    pub fn neg_atom(name: &str) -> Self {
        StateFormula::NegAtom(name.to_string())
    }

    pub fn and(self, other: StateFormula) -> Self {
        StateFormula::And(Box::new(self), Box::new(other))
    }

    pub fn or(self, other: StateFormula) -> Self {
        StateFormula::Or(Box::new(self), Box::new(other))
    }

    pub fn quant_next(q: PathQuantifier, inner: StateFormula) -> Self {
        StateFormula::Quant(q, PathOp::Next(Box::new(inner)))
    }

    pub fn quant_until(q: PathQuantifier, lhs: StateFormula, rhs: StateFormula) -> Self {
        StateFormula::Quant(q, PathOp::Until(Box::new(lhs), Box::new(rhs)))
    }

    pub fn quant_weak_until(q: PathQuantifier, lhs: StateFormula, rhs: StateFormula) -> Self {
        StateFormula::Quant(q, PathOp::WeakUntil(Box::new(lhs), Box::new(rhs)))
    }

    /// `G f` sugar.
    pub fn quant_always(q: PathQuantifier, inner: StateFormula) -> Self {
        Self::quant_weak_until(q, inner, StateFormula::False)
    }

    /// Atoms occurring in the formula.
    pub fn atoms(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms(&self, out: &mut BTreeSet<String>) {
        match self {
            StateFormula::True | StateFormula::False => {}
            StateFormula::Atom(q) | StateFormula::NegAtom(q) => {
                out.insert(q.clone());
            }
            StateFormula::And(a, b) | StateFormula::Or(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
            StateFormula::Quant(_, op) => match op {
                PathOp::Next(f) => f.collect_atoms(out),
                PathOp::Until(a, b) | PathOp::WeakUntil(a, b) => {
                    a.collect_atoms(out);
                    b.collect_atoms(out);
                }
            },
        }
    }
}

pub(crate) fn set_and(a: &[bool], b: &[bool]) -> Vec<bool> {
    a.iter().zip(b).map(|(&x, &y)| x && y).collect()
}

pub(crate) fn set_or(a: &[bool], b: &[bool]) -> Vec<bool> {
    a.iter().zip(b).map(|(&x, &y)| x || y).collect()
}

/// One-step operator matching a game quantifier.
pub(crate) fn game_pre(game: &Game, q: PathQuantifier, x: &[bool]) -> Vec<bool> {
    match q {
        PathQuantifier::Player1 => pre_exists_forall(game, x),
        PathQuantifier::Both => pre_exists_exists(game, x),
        PathQuantifier::Player2 => (0..game.n_states())
            .map(|s| game.moves(s).all(|(_, ts)| ts.iter().any(|&t| x[t])))
            .collect(),
        PathQuantifier::NoPlayers => (0..game.n_states())
            .map(|s| game.moves(s).all(|(_, ts)| ts.iter().all(|&t| x[t])))
            .collect(),
        _ => unreachable!("probabilistic quantifier on a game"),
    }
}

/// Least fixpoint of `X = rhs ∪ (lhs ∩ Pre(X))`.
pub(crate) fn game_until(game: &Game, q: PathQuantifier, lhs: &[bool], rhs: &[bool]) -> Vec<bool> {
    let mut x = vec![false; game.n_states()];
    loop {
        let pre = game_pre(game, q, &x);
        let next: Vec<bool> = (0..game.n_states())
            .map(|s| rhs[s] || (lhs[s] && pre[s]))
            .collect();
        if next == x {
            return x;
        }
        x = next;
    }
}

/// Greatest fixpoint of `X = rhs ∪ (lhs ∩ Pre(X))`.
pub(crate) fn game_weak_until(
    game: &Game,
    q: PathQuantifier,
    lhs: &[bool],
    rhs: &[bool],
) -> Vec<bool> {
    let mut x = vec![true; game.n_states()];
    loop {
        let pre = game_pre(game, q, &x);
        let next: Vec<bool> = (0..game.n_states())
            .map(|s| rhs[s] || (lhs[s] && pre[s]))
            .collect();
        if next == x {
            return x;
        }
        x = next;
    }
}

/// Evaluates a game-logic formula, returning the satisfying state set.
///
/// Atoms that label no state denote the empty set. Probabilistic quantifiers
/// are rejected.
pub fn eval_atl(game: &Game, formula: &StateFormula) -> Result<Vec<bool>, LogicError> {
    match formula {
        StateFormula::True => Ok(vec![true; game.n_states()]),
        StateFormula::False => Ok(vec![false; game.n_states()]),
        StateFormula::Atom(q) => Ok((0..game.n_states()).map(|s| game.has_prop(s, q)).collect()),
        StateFormula::NegAtom(q) => {
            Ok((0..game.n_states()).map(|s| !game.has_prop(s, q)).collect())
        }
        StateFormula::And(a, b) => Ok(set_and(&eval_atl(game, a)?, &eval_atl(game, b)?)),
        StateFormula::Or(a, b) => Ok(set_or(&eval_atl(game, a)?, &eval_atl(game, b)?)),
        StateFormula::Quant(q, op) => {
            if matches!(q, PathQuantifier::Almost | PathQuantifier::Positive) {
                return Err(LogicError::WrongQuantifierFamily(*q));
            }
            match op {
                PathOp::Next(f) => Ok(game_pre(game, *q, &eval_atl(game, f)?)),
                PathOp::Until(a, b) => {
                    let lhs = eval_atl(game, a)?;
                    let rhs = eval_atl(game, b)?;
                    Ok(game_until(game, *q, &lhs, &rhs))
                }
                PathOp::WeakUntil(a, b) => {
                    let lhs = eval_atl(game, a)?;
                    let rhs = eval_atl(game, b)?;
                    Ok(game_weak_until(game, *q, &lhs, &rhs))
                }
            }
        }
    }
}

pub(crate) fn mdp_atom_set(mdp: &Mdp, q: &str) -> Vec<bool> {
    (0..mdp.n_states())
        .map(|s| mdp.labels(s).contains(q))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::GameBuilder;

    fn two_state_game() -> Game {
        GameBuilder::new()
            .state("s0", Vec::<String>::new())
            .state("s1", ["p"])
            .transition("s0", "a", ["s0", "s1"])
            .transition("s1", "a", ["s1"])
            .initial("s0")
            .build()
            .unwrap()
    }

    #[test]
    fn always_true_holds_everywhere() {
        let g = two_state_game();
        let f = StateFormula::quant_always(PathQuantifier::Player1, StateFormula::True);
        assert_eq!(eval_atl(&g, &f).unwrap(), vec![true, true]);
    }

    #[test]
    fn cooperative_until_is_reachability() {
        let g = two_state_game();
        let f = StateFormula::quant_until(
            PathQuantifier::Both,
            StateFormula::True,
            StateFormula::atom("p"),
        );
        assert_eq!(eval_atl(&g, &f).unwrap(), vec![true, true]);
        // p is not reachable from s1 backwards: restrict lhs to falsify.
        let f = StateFormula::quant_until(
            PathQuantifier::Both,
            StateFormula::False,
            StateFormula::atom("q"),
        );
        assert_eq!(eval_atl(&g, &f).unwrap(), vec![false, false]);
    }

    #[test]
    fn unlabelled_atom_is_the_empty_set() {
        let g = two_state_game();
        let f = StateFormula::atom("nowhere");
        assert_eq!(eval_atl(&g, &f).unwrap(), vec![false, false]);
        let f = StateFormula::neg_atom("nowhere");
        assert_eq!(eval_atl(&g, &f).unwrap(), vec![true, true]);
    }

    #[test]
    fn probabilistic_quantifier_is_rejected_on_games() {
        let g = two_state_game();
        let f = StateFormula::quant_next(PathQuantifier::Almost, StateFormula::True);
        assert!(matches!(
            eval_atl(&g, &f),
            Err(LogicError::WrongQuantifierFamily(_))
        ));
    }

    #[test]
    fn player1_next_uses_forall_successors() {
        let g = GameBuilder::new()
            .state("s", Vec::<String>::new())
            .state("t", ["p"])
            .state("u", Vec::<String>::new())
            .transition("s", "a", ["t"])
            .transition("s", "b", ["t", "u"])
            .transition("t", "a", ["t"])
            .transition("u", "a", ["u"])
            .initial("s")
            .build()
            .unwrap();
        let f = StateFormula::quant_next(PathQuantifier::Player1, StateFormula::atom("p"));
        assert_eq!(eval_atl(&g, &f).unwrap(), vec![true, true, false]);
        let f = StateFormula::quant_next(PathQuantifier::Player2, StateFormula::atom("p"));
        // Player 2 must find a p-successor for every action of s.
        assert_eq!(eval_atl(&g, &f).unwrap(), vec![true, true, false]);
        let f = StateFormula::quant_next(PathQuantifier::NoPlayers, StateFormula::atom("p"));
        // s fails through its b-move to u.
        assert_eq!(eval_atl(&g, &f).unwrap(), vec![false, true, false]);
    }
}
