//! Shared oracles for the differential test suites.
//!
//! Everything here recomputes results of the production code through an
//! independent route: naive set iteration for the attractor, memoryless
//! strategy enumeration plus explicit graph analysis for the logics, and
//! library SCC decomposition for the Markov chain arguments. Oracles are
//! deliberately slow and only meant for small instances.

#![allow(dead_code)]

use combsim::logic::{PathOp, PathQuantifier, StateFormula};
use combsim::model::{Game, Mdp, Role};
use combsim::solve::SafetyInstance;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Renders a game in a compact textual form for failure dumps.
pub fn dump_game(g: &Game, name: &str) -> String {
    use std::fmt::Write;
    let mut out = String::new();
    let _ = writeln!(out, "--- {name} (init {})", g.state_id(g.initial()));
    for s in 0..g.n_states() {
        let labels: Vec<&String> = g.labels(s).iter().collect();
        let _ = writeln!(out, "  state {} {:?}", g.state_id(s), labels);
        for (a, ts) in g.moves(s) {
            let ids: Vec<&str> = ts.iter().map(|&t| g.state_id(t)).collect();
            let _ = writeln!(out, "    {} -> {:?}", g.action_id(a), ids);
        }
    }
    out
}

/// Naive adversary attractor: iterate the definition over the full node set
/// until nothing changes.
pub fn oracle_attractor(inst: &SafetyInstance) -> Vec<bool> {
    let arena = &inst.arena;
    let n = arena.n_nodes();
    let mut attr = inst.bad.clone();
    for i in 0..n as u32 {
        if arena.n_actions(i) == 0 {
            attr[i as usize] = true;
        }
    }
    loop {
        let mut changed = false;
        for i in 0..n as u32 {
            if attr[i as usize] || arena.n_actions(i) == 0 {
                continue;
            }
            let all_hit = arena
                .slots(i)
                .all(|slot| arena.successors(slot).iter().any(|&t| attr[t as usize]));
            if all_hit {
                attr[i as usize] = true;
                changed = true;
            }
        }
        if !changed {
            return attr;
        }
    }
}

// ---------------------------------------------------------------------------
// Game logic oracle: memoryless strategy enumeration + path analysis.
// ---------------------------------------------------------------------------

/// All memoryless Player-1 strategies, as slot choices per state.
fn all_sigmas(g: &Game) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for s in 0..g.n_states() {
        let k = g.avail(s).len();
        let mut next = Vec::new();
        for partial in &out {
            for slot in 0..k {
                let mut p = partial.clone();
                p.push(slot);
                next.push(p);
            }
        }
        out = next;
    }
    out
}

/// All memoryless Player-2 strategies: per state and slot, a successor pick
/// (index into the successor list).
fn all_thetas(g: &Game) -> Vec<Vec<Vec<usize>>> {
    let mut out: Vec<Vec<Vec<usize>>> = vec![Vec::new()];
    for s in 0..g.n_states() {
        let per_slot: Vec<usize> = (0..g.avail(s).len()).map(|k| g.succ(s, k).len()).collect();
        let mut rows: Vec<Vec<usize>> = vec![Vec::new()];
        for &choices in &per_slot {
            let mut next = Vec::new();
            for partial in &rows {
                for c in 0..choices {
                    let mut p = partial.clone();
                    p.push(c);
                    next.push(p);
                }
            }
            rows = next;
        }
        let mut next = Vec::new();
        for partial in &out {
            for row in &rows {
                let mut p = partial.clone();
                p.push(row.clone());
                next.push(p);
            }
        }
        out = next;
    }
    out
}

fn full_graph(g: &Game) -> Vec<Vec<usize>> {
    (0..g.n_states())
        .map(|s| {
            let mut v: Vec<usize> = g.moves(s).flat_map(|(_, ts)| ts.iter().copied()).collect();
            v.sort_unstable();
            v.dedup();
            v
        })
        .collect()
}

fn sigma_graph(g: &Game, sigma: &[usize]) -> Vec<Vec<usize>> {
    (0..g.n_states()).map(|s| g.succ(s, sigma[s]).to_vec()).collect()
}

fn theta_graph(g: &Game, theta: &[Vec<usize>]) -> Vec<Vec<usize>> {
    (0..g.n_states())
        .map(|s| {
            let mut v: Vec<usize> = (0..g.avail(s).len())
                .map(|k| g.succ(s, k)[theta[s][k]])
                .collect();
            v.sort_unstable();
            v.dedup();
            v
        })
        .collect()
}

/// Does the restricted subgraph contain a cycle? `keep` selects the nodes.
fn has_cycle(adj: &[Vec<usize>], keep: &[bool]) -> bool {
    let n = adj.len();
    let mut color = vec![0u8; n]; // 0 unseen, 1 active, 2 done
    fn dfs(v: usize, adj: &[Vec<usize>], keep: &[bool], color: &mut [u8]) -> bool {
        color[v] = 1;
        for &w in &adj[v] {
            if !keep[w] {
                continue;
            }
            if color[w] == 1 {
                return true;
            }
            if color[w] == 0 && dfs(w, adj, keep, color) {
                return true;
            }
        }
        color[v] = 2;
        false
    }
    (0..n).any(|v| keep[v] && color[v] == 0 && dfs(v, adj, keep, &mut color))
}

fn reachable_within(adj: &[Vec<usize>], start: usize, keep: &[bool]) -> Vec<bool> {
    let mut seen = vec![false; adj.len()];
    if !keep[start] {
        return seen;
    }
    let mut stack = vec![start];
    seen[start] = true;
    while let Some(v) = stack.pop() {
        for &w in &adj[v] {
            if keep[w] && !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    seen
}

/// "Every play from `s` satisfies lhs U rhs (or W rhs)" on the nondeterministic
/// graph `adj`, where all branching is resolved adversarially.
fn all_plays_satisfy(adj: &[Vec<usize>], s: usize, lhs: &[bool], rhs: &[bool], weak: bool) -> bool {
    if rhs[s] {
        return true;
    }
    if !lhs[s] {
        return false;
    }
    let not_rhs: Vec<bool> = rhs.iter().map(|&b| !b).collect();
    let reach = reachable_within(adj, s, &not_rhs);
    for v in 0..adj.len() {
        if reach[v] && !lhs[v] {
            return false;
        }
    }
    if !weak {
        // A pending cycle means some resolution never reaches rhs.
        if has_cycle(adj, &reach) {
            return false;
        }
    }
    true
}

/// "Some play from `s` satisfies lhs U rhs (or W rhs)" where all branching is
/// resolved cooperatively.
fn some_play_satisfies(adj: &[Vec<usize>], s: usize, lhs: &[bool], rhs: &[bool], weak: bool) -> bool {
    if rhs[s] {
        return true;
    }
    if !lhs[s] {
        return false;
    }
    let lhs_not_rhs: Vec<bool> = lhs
        .iter()
        .zip(rhs)
        .map(|(&l, &r)| l && !r)
        .collect();
    let reach = reachable_within(adj, s, &lhs_not_rhs);
    // Until: step from the reachable lhs-region into rhs.
    for v in 0..adj.len() {
        if reach[v] && adj[v].iter().any(|&w| rhs[w]) {
            return true;
        }
    }
    if weak {
        // Always-lhs: find a lasso inside the region.
        if has_cycle(adj, &reach) {
            return true;
        }
    }
    false
}

/// Strategy-enumeration evaluator for the game logic. Memoryless strategies
/// suffice for these single-objective queries.
pub fn oracle_eval_atl(g: &Game, f: &StateFormula) -> Vec<bool> {
    let n = g.n_states();
    match f {
        StateFormula::True => vec![true; n],
        StateFormula::False => vec![false; n],
        StateFormula::Atom(q) => (0..n).map(|s| g.has_prop(s, q)).collect(),
        StateFormula::NegAtom(q) => (0..n).map(|s| !g.has_prop(s, q)).collect(),
        StateFormula::And(a, b) => {
            let (x, y) = (oracle_eval_atl(g, a), oracle_eval_atl(g, b));
            (0..n).map(|s| x[s] && y[s]).collect()
        }
        StateFormula::Or(a, b) => {
            let (x, y) = (oracle_eval_atl(g, a), oracle_eval_atl(g, b));
            (0..n).map(|s| x[s] || y[s]).collect()
        }
        StateFormula::Quant(q, op) => {
            let (lhs, rhs, weak) = match op {
                PathOp::Next(inner) => {
                    let x = oracle_eval_atl(g, inner);
                    return (0..n)
                        .map(|s| match q {
                            PathQuantifier::Player1 => {
                                g.moves(s).any(|(_, ts)| ts.iter().all(|&t| x[t]))
                            }
                            PathQuantifier::Player2 => {
                                g.moves(s).all(|(_, ts)| ts.iter().any(|&t| x[t]))
                            }
                            PathQuantifier::Both => {
                                g.moves(s).any(|(_, ts)| ts.iter().any(|&t| x[t]))
                            }
                            PathQuantifier::NoPlayers => {
                                g.moves(s).all(|(_, ts)| ts.iter().all(|&t| x[t]))
                            }
                            _ => panic!("probabilistic quantifier on a game"),
                        })
                        .collect();
                }
                PathOp::Until(a, b) => (oracle_eval_atl(g, a), oracle_eval_atl(g, b), false),
                PathOp::WeakUntil(a, b) => (oracle_eval_atl(g, a), oracle_eval_atl(g, b), true),
            };
            match q {
                PathQuantifier::Player1 => {
                    let sigmas = all_sigmas(g);
                    (0..n)
                        .map(|s| {
                            sigmas.iter().any(|sig| {
                                all_plays_satisfy(&sigma_graph(g, sig), s, &lhs, &rhs, weak)
                            })
                        })
                        .collect()
                }
                PathQuantifier::Player2 => {
                    let thetas = all_thetas(g);
                    (0..n)
                        .map(|s| {
                            thetas.iter().any(|th| {
                                all_plays_satisfy(&theta_graph(g, th), s, &lhs, &rhs, weak)
                            })
                        })
                        .collect()
                }
                PathQuantifier::Both => {
                    let adj = full_graph(g);
                    (0..n)
                        .map(|s| some_play_satisfies(&adj, s, &lhs, &rhs, weak))
                        .collect()
                }
                PathQuantifier::NoPlayers => {
                    let adj = full_graph(g);
                    (0..n)
                        .map(|s| all_plays_satisfy(&adj, s, &lhs, &rhs, weak))
                        .collect()
                }
                _ => panic!("probabilistic quantifier on a game"),
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Qualitative MDP oracles.
// ---------------------------------------------------------------------------

/// All memoryless MDP strategies (slot choice per Player-1 state).
fn all_mdp_sigmas(m: &Mdp) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for s in 0..m.n_states() {
        let k = match m.role(s) {
            Role::Player1 => m.avail(s).len(),
            Role::Prob => 1,
        };
        let mut next = Vec::new();
        for partial in &out {
            for slot in 0..k {
                let mut p = partial.clone();
                p.push(slot);
                next.push(p);
            }
        }
        out = next;
    }
    out
}

/// Markov chain induced by a memoryless strategy.
fn chain(m: &Mdp, sigma: &[usize]) -> Vec<Vec<usize>> {
    (0..m.n_states())
        .map(|s| match m.role(s) {
            Role::Player1 => vec![m.next1(s, sigma[s])],
            Role::Prob => m.support(s).collect(),
        })
        .collect()
}

/// Bottom SCCs of a chain, as a membership mask per node: nodes that belong
/// to an SCC without outgoing edges.
fn in_bscc(adj: &[Vec<usize>]) -> Vec<bool> {
    let n = adj.len();
    let comp = scc_ids(adj);
    let n_comp = comp.iter().map(|&c| c + 1).max().unwrap_or(0);
    let mut bottom = vec![true; n_comp];
    for v in 0..n {
        for &w in &adj[v] {
            if comp[v] != comp[w] {
                bottom[comp[v]] = false;
            }
        }
    }
    (0..n).map(|v| bottom[comp[v]]).collect()
}

/// `Pr_s(lhs U rhs) = 1` in the chain: no escape to a ¬lhs∧¬rhs state
/// through ¬rhs states, and no ¬rhs-trap (a bottom SCC of the ¬rhs
/// restriction none of whose members can step into rhs) reachable through
/// ¬rhs states.
fn chain_almost_until(adj: &[Vec<usize>], s: usize, lhs: &[bool], rhs: &[bool]) -> bool {
    if rhs[s] {
        return true;
    }
    if !lhs[s] {
        return false;
    }
    let not_rhs: Vec<bool> = rhs.iter().map(|&b| !b).collect();
    let reach = reachable_within(adj, s, &not_rhs);
    for v in 0..adj.len() {
        if reach[v] && !lhs[v] {
            return false;
        }
    }
    // Components of the chain restricted to the reachable ¬rhs region.
    let restricted: Vec<Vec<usize>> = adj
        .iter()
        .enumerate()
        .map(|(v, ws)| {
            if reach[v] {
                ws.iter().copied().filter(|&w| reach[w]).collect()
            } else {
                Vec::new()
            }
        })
        .collect();
    let comp = scc_ids(&restricted);
    let n_comp = comp.iter().map(|&c| c + 1).max().unwrap_or(0);
    let mut bottom = vec![true; n_comp];
    let mut has_exit = vec![false; n_comp];
    let mut inhabited = vec![false; n_comp];
    for v in 0..adj.len() {
        if !reach[v] {
            continue;
        }
        inhabited[comp[v]] = true;
        for &w in &restricted[v] {
            if comp[w] != comp[v] {
                bottom[comp[v]] = false;
            }
        }
        if adj[v].iter().any(|&w| rhs[w]) {
            has_exit[comp[v]] = true;
        }
    }
    (0..n_comp).all(|c| !inhabited[c] || !bottom[c] || has_exit[c])
}

/// Strongly connected component ids via Tarjan (library implementation).
fn scc_ids(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let mut g = petgraph::graph::DiGraph::<(), ()>::new();
    for _ in 0..n {
        g.add_node(());
    }
    for (v, ws) in adj.iter().enumerate() {
        for &w in ws {
            g.add_edge(
                petgraph::graph::NodeIndex::new(v),
                petgraph::graph::NodeIndex::new(w),
                (),
            );
        }
    }
    let sccs = petgraph::algo::tarjan_scc(&g);
    let mut comp = vec![0usize; n];
    for (i, scc) in sccs.iter().enumerate() {
        for node in scc {
            comp[node.index()] = i;
        }
    }
    comp
}

/// `Pr_s(□ lhs) > 0` in the chain: an lhs-path into a bottom SCC made of
/// lhs states.
fn chain_positive_always(adj: &[Vec<usize>], s: usize, lhs: &[bool]) -> bool {
    if !lhs[s] {
        return false;
    }
    let reach = reachable_within(adj, s, lhs);
    let bscc = in_bscc(adj);
    for v in 0..adj.len() {
        if reach[v] && bscc[v] {
            // The whole bottom SCC must consist of lhs states.
            let comp_reach = reachable_within(adj, v, &vec![true; adj.len()]);
            let ok = (0..adj.len()).all(|w| !(comp_reach[w] && bscc[w]) || lhs[w]);
            if ok {
                return true;
            }
        }
    }
    false
}

/// `Pr_s(lhs W rhs) = 1`: no positive-probability escape to ¬lhs∧¬rhs
/// through ¬rhs states.
fn chain_almost_weak(adj: &[Vec<usize>], s: usize, lhs: &[bool], rhs: &[bool]) -> bool {
    if rhs[s] {
        return true;
    }
    if !lhs[s] {
        return false;
    }
    let not_rhs: Vec<bool> = rhs.iter().map(|&b| !b).collect();
    let reach = reachable_within(adj, s, &not_rhs);
    (0..adj.len()).all(|v| !reach[v] || lhs[v])
}

/// Almost-sure next: all relevant one-step successors satisfy the target.
pub fn oracle_almost_next(m: &Mdp, x: &[bool]) -> Vec<bool> {
    (0..m.n_states())
        .map(|s| match m.role(s) {
            Role::Player1 => (0..m.avail(s).len()).any(|k| x[m.next1(s, k)]),
            Role::Prob => m.support(s).all(|t| x[t]),
        })
        .collect()
}

/// Positive next: some one-step successor satisfies the target.
pub fn oracle_positive_next(m: &Mdp, x: &[bool]) -> Vec<bool> {
    (0..m.n_states())
        .map(|s| match m.role(s) {
            Role::Player1 => (0..m.avail(s).len()).any(|k| x[m.next1(s, k)]),
            Role::Prob => m.support(s).any(|t| x[t]),
        })
        .collect()
}

pub fn oracle_almost_until(m: &Mdp, lhs: &[bool], rhs: &[bool]) -> Vec<bool> {
    let sigmas = all_mdp_sigmas(m);
    (0..m.n_states())
        .map(|s| {
            sigmas
                .iter()
                .any(|sig| chain_almost_until(&chain(m, sig), s, lhs, rhs))
        })
        .collect()
}

pub fn oracle_almost_weak_until(m: &Mdp, lhs: &[bool], rhs: &[bool]) -> Vec<bool> {
    let sigmas = all_mdp_sigmas(m);
    (0..m.n_states())
        .map(|s| {
            sigmas
                .iter()
                .any(|sig| chain_almost_weak(&chain(m, sig), s, lhs, rhs))
        })
        .collect()
}

/// Positive until: a finite lhs-path to rhs exists under any resolution.
pub fn oracle_positive_until(m: &Mdp, lhs: &[bool], rhs: &[bool]) -> Vec<bool> {
    let adj: Vec<Vec<usize>> = (0..m.n_states())
        .map(|s| match m.role(s) {
            Role::Player1 => (0..m.avail(s).len()).map(|k| m.next1(s, k)).collect(),
            Role::Prob => m.support(s).collect(),
        })
        .collect();
    (0..m.n_states())
        .map(|s| some_play_satisfies(&adj, s, lhs, rhs, false))
        .collect()
}

pub fn oracle_positive_always(m: &Mdp, lhs: &[bool]) -> Vec<bool> {
    let sigmas = all_mdp_sigmas(m);
    (0..m.n_states())
        .map(|s| {
            sigmas
                .iter()
                .any(|sig| chain_positive_always(&chain(m, sig), s, lhs))
        })
        .collect()
}

pub fn oracle_positive_weak_until(m: &Mdp, lhs: &[bool], rhs: &[bool]) -> Vec<bool> {
    let until = oracle_positive_until(m, lhs, rhs);
    let always = oracle_positive_always(m, lhs);
    until.iter().zip(&always).map(|(&a, &b)| a || b).collect()
}

// ---------------------------------------------------------------------------
// Misc helpers.
// ---------------------------------------------------------------------------

pub fn random_subset(rng: &mut impl rand::Rng, n: usize, density: f64) -> Vec<bool> {
    (0..n).map(|_| rng.gen_bool(density)).collect()
}

pub fn set_subset(a: &[bool], b: &[bool]) -> bool {
    a.iter().zip(b).all(|(&x, &y)| !x || y)
}

pub fn intersect(a: &[bool], b: &[bool]) -> Vec<bool> {
    a.iter().zip(b).map(|(&x, &y)| x && y).collect()
}
