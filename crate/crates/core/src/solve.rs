//! Attractor-based solver for two-player safety/reachability games.
//!
//! Arenas follow the move structure of [`crate::model::Game`]: the proponent
//! picks one of a node's actions, the adversary picks a successor from that
//! action's successor set. The adversary tries to reach `bad`; the proponent
//! tries to avoid it forever. A node where the player to move has no choice
//! left is lost by that player: a node with no actions counts as bad, an
//! action with no successors is a safe haven for the proponent.

use crate::model::Game;

/// Game arena in compressed sparse row form.
///
/// `act_start[i]..act_start[i+1]` are the action slots of node `i`;
/// `succ_start[k]..succ_start[k+1]` index the successors of slot `k`.
#[derive(Debug, Clone, Default)]
pub struct Arena {
    act_start: Vec<u32>,
    succ_start: Vec<u32>,
    succs: Vec<u32>,
}

impl Arena {
    pub fn builder() -> ArenaBuilder {
        ArenaBuilder {
            arena: Arena {
                act_start: vec![0],
                succ_start: vec![0],
                succs: Vec::new(),
            },
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.act_start.len() - 1
    }

    pub fn n_edges(&self) -> usize {
        self.succs.len()
    }

    /// Global slot indices of the actions of `node`.
    pub fn slots(&self, node: u32) -> std::ops::Range<u32> {
        self.act_start[node as usize]..self.act_start[node as usize + 1]
    }

    pub fn n_actions(&self, node: u32) -> usize {
        (self.act_start[node as usize + 1] - self.act_start[node as usize]) as usize
    }

    pub fn successors(&self, slot: u32) -> &[u32] {
        &self.succs[self.succ_start[slot as usize] as usize..self.succ_start[slot as usize + 1] as usize]
    }

    /// Builds an arena mirroring a game's move structure node-for-node.
    pub fn from_game(game: &Game) -> Arena {
        let mut b = Arena::builder();
        for s in 0..game.n_states() {
            let node = b.add_node();
            debug_assert_eq!(node as usize, s);
            for (_, succs) in game.moves(s) {
                b.add_action(succs.iter().map(|&t| t as u32));
            }
        }
        b.finish()
    }
}

/// Append-only arena construction; nodes must be fully expanded in id order.
#[derive(Debug)]
pub struct ArenaBuilder {
    arena: Arena,
}

impl ArenaBuilder {
    /// Opens the next node and returns its id. All subsequent `add_action`
    /// calls attach to this node until the next `add_node`.
    pub fn add_node(&mut self) -> u32 {
        let id = self.arena.act_start.len() as u32 - 1;
        self.arena.act_start.push(*self.arena.act_start.last().unwrap());
        id
    }

    pub fn add_action(&mut self, successors: impl IntoIterator<Item = u32>) {
        *self.arena.act_start.last_mut().unwrap() += 1;
        self.arena.succs.extend(successors);
        self.arena.succ_start.push(self.arena.succs.len() as u32);
    }

    pub fn finish(self) -> Arena {
        debug_assert_eq!(
            *self.arena.act_start.last().unwrap() as usize,
            self.arena.succ_start.len() - 1
        );
        self.arena
    }
}

/// A safety game: the adversary wins by reaching `bad`.
#[derive(Debug, Clone)]
pub struct SafetyInstance {
    pub arena: Arena,
    pub bad: Vec<bool>,
}

/// Winning regions with memoryless strategies for both players.
///
/// `rank[s]` is the attractor round at which `s` became adversary-winning;
/// following `adversary_strategy` from an adversary-winning node strictly
/// decreases the rank until a bad node is reached. `proponent_strategy`
/// picks, for each proponent-winning node, an action whose successors all
/// stay proponent-winning.
#[derive(Debug, Clone)]
pub struct SolveResult {
    pub adversary_win: Vec<bool>,
    pub rank: Vec<u32>,
    /// Chosen action slot (global index) per proponent-winning node.
    pub proponent_strategy: Vec<Option<u32>>,
    /// Chosen successor per action slot, for adversary-winning non-bad nodes.
    pub adversary_strategy: Vec<Option<u32>>,
}

impl SolveResult {
    pub fn proponent_wins(&self, node: u32) -> bool {
        !self.adversary_win[node as usize]
    }
}

/// Computes the adversary's attractor of `bad` with the counter-based
/// linear-time scheme and extracts both strategies.
///
/// Tie-breaking is deterministic: the adversary picks, per action slot, the
/// successor with the smallest (rank, node id); the proponent picks the first
/// action all of whose successors stay outside the attractor.
pub fn solve_safety(inst: &SafetyInstance) -> SolveResult {
    let arena = &inst.arena;
    let n = arena.n_nodes();
    assert_eq!(inst.bad.len(), n);

    // Reverse edges in CSR form: for each target node, the slots that can
    // reach it.
    let n_slots = arena.succ_start.len() - 1;
    let mut rev_count = vec![0u32; n + 1];
    for &t in &arena.succs {
        rev_count[t as usize + 1] += 1;
    }
    for i in 0..n {
        rev_count[i + 1] += rev_count[i];
    }
    let mut rev_slot = vec![0u32; arena.succs.len()];
    let mut fill = rev_count.clone();
    for slot in 0..n_slots {
        for &t in arena.successors(slot as u32) {
            rev_slot[fill[t as usize] as usize] = slot as u32;
            fill[t as usize] += 1;
        }
    }
    // Owner of each slot.
    let mut slot_owner = vec![0u32; n_slots];
    for node in 0..n as u32 {
        for slot in arena.slots(node) {
            slot_owner[slot as usize] = node;
        }
    }

    let mut in_attr = vec![false; n];
    let mut rank = vec![u32::MAX; n];
    let mut slot_hit = vec![false; n_slots];
    // Number of actions that still have no successor inside the attractor.
    let mut remaining: Vec<u32> = (0..n as u32)
        .map(|i| arena.n_actions(i) as u32)
        .collect();

    let mut frontier: Vec<u32> = Vec::new();
    for i in 0..n {
        // A node with no actions is lost by the proponent outright.
        if inst.bad[i] || remaining[i] == 0 {
            in_attr[i] = true;
            rank[i] = 0;
            frontier.push(i as u32);
        }
    }

    let mut round = 0u32;
    let mut next = Vec::new();
    while !frontier.is_empty() {
        round += 1;
        next.clear();
        for &t in &frontier {
            let lo = rev_count[t as usize] as usize;
            let hi = rev_count[t as usize + 1] as usize;
            for &slot in &rev_slot[lo..hi] {
                if slot_hit[slot as usize] {
                    continue;
                }
                slot_hit[slot as usize] = true;
                let owner = slot_owner[slot as usize] as usize;
                if in_attr[owner] {
                    continue;
                }
                remaining[owner] -= 1;
                if remaining[owner] == 0 {
                    in_attr[owner] = true;
                    rank[owner] = round;
                    next.push(owner as u32);
                }
            }
        }
        std::mem::swap(&mut frontier, &mut next);
    }

    let mut proponent_strategy = vec![None; n];
    let mut adversary_strategy = vec![None; n_slots];
    for node in 0..n as u32 {
        if in_attr[node as usize] {
            if inst.bad[node as usize] {
                continue;
            }
            for slot in arena.slots(node) {
                let mut best: Option<(u32, u32)> = None;
                for &t in arena.successors(slot) {
                    if in_attr[t as usize] {
                        let key = (rank[t as usize], t);
                        if best.is_none_or(|b| key < b) {
                            best = Some(key);
                        }
                    }
                }
                adversary_strategy[slot as usize] =
                    Some(best.expect("attractor member has a witness per action").1);
            }
        } else {
            for slot in arena.slots(node) {
                if arena
                    .successors(slot)
                    .iter()
                    .all(|&t| !in_attr[t as usize])
                {
                    proponent_strategy[node as usize] = Some(slot);
                    break;
                }
            }
            debug_assert!(proponent_strategy[node as usize].is_some());
        }
    }

    SolveResult {
        adversary_win: in_attr,
        rank,
        proponent_strategy,
        adversary_strategy,
    }
}

/// States with an action all of whose successors lie in `x`.
pub fn pre_exists_forall(game: &Game, x: &[bool]) -> Vec<bool> {
    (0..game.n_states())
        .map(|s| game.moves(s).any(|(_, succs)| succs.iter().all(|&t| x[t])))
        .collect()
}

/// States with an action that has some successor in `x`.
pub fn pre_exists_exists(game: &Game, x: &[bool]) -> Vec<bool> {
    (0..game.n_states())
        .map(|s| game.moves(s).any(|(_, succs)| succs.iter().any(|&t| x[t])))
        .collect()
}
