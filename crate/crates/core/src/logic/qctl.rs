//! Qualitative MDP logic, evaluated on the two-player interpretation.
//!
//! `<Almost>` next and weak-until translate to Player-1 operators on the
//! interpretation, `<Positive>` next and until to cooperative operators.
//! Positive weak-until decomposes into a reachability disjunction, and
//! almost-sure until is the nested fixpoint over the [`apre`] predecessor.

use super::*;
use crate::model::Mdp;

/// Predecessor operator of the almost-sure-until fixpoint: Player-1 states
/// with an action into `x`, plus probabilistic states whose support stays in
/// `y` and meets `x`. Requires `x ⊆ y`.
pub fn apre(mdp: &Mdp, y: &[bool], x: &[bool]) -> Result<Vec<bool>, LogicError> {
    if x.iter().zip(y).any(|(&xi, &yi)| xi && !yi) {
        return Err(LogicError::PreconditionViolated(
            "apre requires x to be a subset of y".into(),
        ));
    }
    Ok((0..mdp.n_states())
        .map(|s| match mdp.role(s) {
            Role::Player1 => (0..mdp.avail(s).len()).any(|slot| x[mdp.next1(s, slot)]),
            Role::Prob => {
                mdp.support(s).all(|t| y[t]) && mdp.support(s).any(|t| x[t])
            }
        })
        .collect())
}

/// States satisfying almost-sure `lhs U rhs`, by the greatest-least fixpoint
/// iteration: the outer set starts at all states; each round recomputes the
/// least fixpoint of `X = rhs ∪ (lhs ∩ apre(Y, X))` and feeds it back.
pub fn almost_until(mdp: &Mdp, lhs: &[bool], rhs: &[bool]) -> Vec<bool> {
    let n = mdp.n_states();
    let mut y = vec![true; n];
    loop {
        let mut x = vec![false; n];
        loop {
            let pre = apre(mdp, &y, &x).expect("inner iterate stays inside the outer set");
            let next: Vec<bool> = (0..n).map(|s| rhs[s] || (lhs[s] && pre[s])).collect();
            if next == x {
                break;
            }
            x = next;
        }
        if x == y {
            return y;
        }
        y = x;
    }
}

/// Two-route check of the one-step operator: evaluates the conjunction of
/// Player-1 next over `psi1` and cooperative next over `psi2` on the
/// two-player interpretation. Must coincide with [`apre`]. Requires
/// `psi2 ⊆ psi1`.
pub fn f_apre_check(mdp: &Mdp, psi1: &[bool], psi2: &[bool]) -> Result<Vec<bool>, LogicError> {
    if psi2.iter().zip(psi1).any(|(&b, &a)| b && !a) {
        return Err(LogicError::PreconditionViolated(
            "f_apre_check requires psi2 to be a subset of psi1".into(),
        ));
    }
    let hat = mdp.to_game();
    let g = hat.game();
    Ok(set_and(
        &pre_exists_forall(g, psi1),
        &pre_exists_exists(g, psi2),
    ))
}

/// Evaluates a qualitative formula on an MDP. Only the probabilistic
/// quantifiers are allowed; game quantifiers are rejected.
pub fn eval_qctl(mdp: &Mdp, formula: &StateFormula) -> Result<Vec<bool>, LogicError> {
    let hat = mdp.to_game();
    eval_qctl_on(mdp, hat.game(), formula)
}

fn eval_qctl_on(mdp: &Mdp, hat: &Game, formula: &StateFormula) -> Result<Vec<bool>, LogicError> {
    match formula {
        StateFormula::True => Ok(vec![true; mdp.n_states()]),
        StateFormula::False => Ok(vec![false; mdp.n_states()]),
        StateFormula::Atom(q) => Ok(mdp_atom_set(mdp, q)),
        StateFormula::NegAtom(q) => Ok(mdp_atom_set(mdp, q).iter().map(|&b| !b).collect()),
        StateFormula::And(a, b) => Ok(set_and(
            &eval_qctl_on(mdp, hat, a)?,
            &eval_qctl_on(mdp, hat, b)?,
        )),
        StateFormula::Or(a, b) => Ok(set_or(
            &eval_qctl_on(mdp, hat, a)?,
            &eval_qctl_on(mdp, hat, b)?,
        )),
        StateFormula::Quant(q, op) => {
            let almost = match q {
                PathQuantifier::Almost => true,
                PathQuantifier::Positive => false,
                other => return Err(LogicError::WrongQuantifierFamily(*other)),
            };
            match op {
                PathOp::Next(f) => {
                    let x = eval_qctl_on(mdp, hat, f)?;
                    let pq = if almost {
                        PathQuantifier::Player1
                    } else {
                        PathQuantifier::Both
                    };
                    Ok(game_pre(hat, pq, &x))
                }
                PathOp::Until(a, b) => {
                    let lhs = eval_qctl_on(mdp, hat, a)?;
                    let rhs = eval_qctl_on(mdp, hat, b)?;
                    if almost {
                        Ok(almost_until(mdp, &lhs, &rhs))
                    } else {
                        Ok(game_until(hat, PathQuantifier::Both, &lhs, &rhs))
                    }
                }
                PathOp::WeakUntil(a, b) => {
                    let lhs = eval_qctl_on(mdp, hat, a)?;
                    let rhs = eval_qctl_on(mdp, hat, b)?;
                    if almost {
                        Ok(game_weak_until(hat, PathQuantifier::Player1, &lhs, &rhs))
                    } else {
                        // Positive weak-until: either the until part has a
                        // positive-probability witness, or some reachable
                        // state sustains the left side almost surely.
                        let until = game_until(hat, PathQuantifier::Both, &lhs, &rhs);
                        let safety =
                            game_weak_until(hat, PathQuantifier::Player1, &lhs, &vec![false; mdp.n_states()]);
                        let via_safety = game_until(hat, PathQuantifier::Both, &lhs, &safety);
                        Ok(set_or(&until, &via_safety))
                    }
                }
            }
        }
    }
}
