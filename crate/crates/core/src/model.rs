//! Game graphs and Markov decision processes.
//!
//! A [`Game`] is a finite two-player graph: in every state Player 1 picks an
//! available action and Player 2 picks a successor from the action's
//! successor set. An [`Mdp`] splits states into Player-1 states (deterministic
//! per action) and probabilistic states (exact rational distributions). The
//! qualitative machinery downstream only ever consumes distribution supports,
//! so an MDP embeds into an alternating game by handing the probabilistic
//! choice to Player 2 ([`Mdp::to_game`]).

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use num::rational::BigRational;
use num::{One, Zero};
use thiserror::Error;

/// Action id introduced by the two-player interpretation of an MDP.
/// Rejected in user-supplied models.
pub const BOT_ACTION: &str = "⊥";

/// Proposition that marks Player-1 states of alternating games.
pub const TURN_PROP: &str = "turn";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
    #[error("duplicate transition for state `{0}` and action `{1}`")]
    DuplicateTransition(String, String),
    #[error("reference to undeclared id `{0}`")]
    DanglingReference(String),
    #[error("state `{0}` has no available action")]
    EmptyAvail(String),
    #[error("empty successor set for state `{0}` and action `{1}`")]
    EmptyDelta(String, String),
    #[error("action id `{0}` is reserved")]
    ReservedAction(String),
    #[error("proposition `{0}` is reserved for the two-player interpretation")]
    ReservedProposition(String),
    #[error("distribution of `{0}` sums to {1}, expected 1")]
    BadDistributionSum(String, String),
    #[error("distribution entry `{0}` -> `{1}` must have positive probability")]
    NonPositiveProbability(String, String),
    #[error("no initial state declared")]
    MissingInitial,
    #[error("state `{0}` violates strict alternation: {1}")]
    NotStrictlyAlternating(String, String),
    #[error("state `{0}` is not alternating: {1}")]
    NotAlternating(String, String),
    #[error("games use different action alphabets")]
    AlphabetMismatch,
    #[error("empty action intersection at reachable composite state ({0},{1})")]
    EmptyAvailInComposite(String, String),
}

/// Finite two-player game graph.
///
/// States and actions are identified by strings; dense indices are assigned
/// in the order states and actions are first declared, so identical inputs
/// produce identical internal numbering.
///
/// Games built through [`GameBuilder`] satisfy: every state has at least one
/// available action and every available action at least one successor.
/// Abstraction quotients constructed internally may relax the second
/// condition (an abstract action can have an empty successor set); all
/// consumers in this crate treat a player who cannot move as losing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Game {
    ids: Vec<String>,
    index: HashMap<String, usize>,
    actions: Vec<String>,
    action_index: HashMap<String, usize>,
    avail: Vec<Vec<usize>>,
    delta: Vec<Vec<Vec<usize>>>,
    labels: Vec<BTreeSet<String>>,
    initial: usize,
}

impl Game {
    pub fn n_states(&self) -> usize {
        self.ids.len()
    }

    pub fn n_actions(&self) -> usize {
        self.actions.len()
    }

    pub fn state_id(&self, s: usize) -> &str {
        &self.ids[s]
    }

    pub fn state_index(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn action_id(&self, a: usize) -> &str {
        &self.actions[a]
    }

    pub fn action_index(&self, id: &str) -> Option<usize> {
        self.action_index.get(id).copied()
    }

    pub fn action_ids(&self) -> &[String] {
        &self.actions
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    /// Available actions of `s`, sorted by action index.
    pub fn avail(&self, s: usize) -> &[usize] {
        &self.avail[s]
    }

    /// Successor set of the `slot`-th available action of `s`.
    pub fn succ(&self, s: usize, slot: usize) -> &[usize] {
        &self.delta[s][slot]
    }

    /// Successor set of `s` under action `a`, if `a` is available.
    pub fn succ_by_action(&self, s: usize, a: usize) -> Option<&[usize]> {
        let slot = self.avail[s].binary_search(&a).ok()?;
        Some(&self.delta[s][slot])
    }

    pub fn has_action(&self, s: usize, a: usize) -> bool {
        self.avail[s].binary_search(&a).is_ok()
    }

    /// Iterates `(action, successors)` pairs of `s`.
    pub fn moves(&self, s: usize) -> impl Iterator<Item = (usize, &[usize])> {
        self.avail[s]
            .iter()
            .zip(self.delta[s].iter())
            .map(|(a, t)| (*a, t.as_slice()))
    }

    pub fn labels(&self, s: usize) -> &BTreeSet<String> {
        &self.labels[s]
    }

    pub fn labels_eq(&self, s: usize, other: &Game, t: usize) -> bool {
        self.labels[s] == other.labels[t]
    }

    /// All propositions that occur on some state.
    pub fn propositions(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for l in &self.labels {
            out.extend(l.iter().cloned());
        }
        out
    }

    pub fn has_prop(&self, s: usize, prop: &str) -> bool {
        self.labels[s].contains(prop)
    }

    /// Total number of `(state, action, successor)` edges.
    pub fn n_edges(&self) -> usize {
        self.delta.iter().flatten().map(|v| v.len()).sum()
    }

    /// True if some available action has an empty successor set. Only
    /// abstraction quotients can be partial; user-validated games never are.
    pub fn is_partial(&self) -> bool {
        self.delta.iter().flatten().any(|v| v.is_empty())
    }

    pub(crate) fn from_parts_unchecked(
        ids: Vec<String>,
        actions: Vec<String>,
        avail: Vec<Vec<usize>>,
        delta: Vec<Vec<Vec<usize>>>,
        labels: Vec<BTreeSet<String>>,
        initial: usize,
    ) -> Game {
        let index = ids
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect();
        let action_index = actions
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect();
        Game {
            ids,
            index,
            actions,
            action_index,
            avail,
            delta,
            labels,
            initial,
        }
    }

    /// Parallel composition restricted to the pairs reachable from the
    /// composite initial state. Fails on the first reachable pair whose
    /// action sets do not intersect.
    pub fn compose(&self, other: &Game) -> Result<Game, ModelError> {
        if !same_alphabet(&self.actions, &other.actions) {
            return Err(ModelError::AlphabetMismatch);
        }
        let actions = self.actions.clone();
        let other_act: Vec<usize> = actions
            .iter()
            .map(|a| other.action_index(a).expect("alphabet checked"))
            .collect();

        let mut ids = Vec::new();
        let mut labels = Vec::new();
        let mut pair_of = Vec::new();
        let mut seen: HashMap<(usize, usize), usize> = HashMap::new();
        let mut queue = VecDeque::new();
        let root = (self.initial, other.initial);
        seen.insert(root, 0);
        pair_of.push(root);
        ids.push(pair_id(self.state_id(root.0), other.state_id(root.1)));
        labels.push(self.labels[root.0].union(&other.labels[root.1]).cloned().collect());
        queue.push_back(0usize);

        let mut avail = Vec::new();
        let mut delta = Vec::new();
        while let Some(ix) = queue.pop_front() {
            let (l, r) = pair_of[ix];
            let mut row_avail = Vec::new();
            let mut row_delta = Vec::new();
            for (slot_a, &a) in self.avail[l].iter().enumerate() {
                let ra = other_act[a];
                let Some(rslot) = other.avail[r].binary_search(&ra).ok() else {
                    continue;
                };
                let mut succs = Vec::new();
                for &lt in &self.delta[l][slot_a] {
                    for &rt in &other.delta[r][rslot] {
                        let key = (lt, rt);
                        let next = *seen.entry(key).or_insert_with(|| {
                            let id = pair_of.len();
                            pair_of.push(key);
                            ids.push(pair_id(self.state_id(lt), other.state_id(rt)));
                            labels.push(
                                self.labels[lt].union(&other.labels[rt]).cloned().collect(),
                            );
                            queue.push_back(id);
                            id
                        });
                        succs.push(next);
                    }
                }
                succs.sort_unstable();
                succs.dedup();
                row_avail.push(a);
                row_delta.push(succs);
            }
            if row_avail.is_empty() {
                return Err(ModelError::EmptyAvailInComposite(
                    self.state_id(l).to_string(),
                    other.state_id(r).to_string(),
                ));
            }
            debug_assert_eq!(avail.len(), ix);
            avail.push(row_avail);
            delta.push(row_delta);
        }

        Ok(Game::from_parts_unchecked(ids, actions, avail, delta, labels, 0))
    }
}

fn pair_id(l: &str, r: &str) -> String {
    format!("({l},{r})")
}

pub(crate) fn same_alphabet(a: &[String], b: &[String]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let sa: BTreeSet<&str> = a.iter().map(|s| s.as_str()).collect();
    let sb: BTreeSet<&str> = b.iter().map(|s| s.as_str()).collect();
    sa == sb
}

/// Incremental description of a game; `build` validates every structural
/// invariant and reports the first violation.
#[derive(Debug, Default, Clone)]
pub struct GameBuilder {
    states: Vec<(String, BTreeSet<String>)>,
    transitions: Vec<(String, String, Vec<String>)>,
    initial: Option<String>,
}

impl GameBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn state<I, S>(mut self, id: &str, labels: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.states.push((
            id.to_string(),
            labels.into_iter().map(Into::into).collect(),
        ));
        self
    }

    pub fn transition<I, S>(mut self, from: &str, action: &str, to: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.transitions.push((
            from.to_string(),
            action.to_string(),
            to.into_iter().map(Into::into).collect(),
        ));
        self
    }

    pub fn initial(mut self, id: &str) -> Self {
        self.initial = Some(id.to_string());
        self
    }

    pub fn build(self) -> Result<Game, ModelError> {
        let mut index = HashMap::new();
        let mut ids = Vec::new();
        let mut labels = Vec::new();
        for (id, props) in self.states {
            if index.insert(id.clone(), ids.len()).is_some() {
                return Err(ModelError::DuplicateId(id));
            }
            ids.push(id);
            labels.push(props);
        }
        let n = ids.len();

        let mut actions: Vec<String> = Vec::new();
        let mut action_index: HashMap<String, usize> = HashMap::new();
        let mut rows: Vec<BTreeMap<usize, Vec<usize>>> = vec![BTreeMap::new(); n];
        for (from, action, to) in &self.transitions {
            if action == BOT_ACTION {
                return Err(ModelError::ReservedAction(action.clone()));
            }
            let s = *index
                .get(from)
                .ok_or_else(|| ModelError::DanglingReference(from.clone()))?;
            let a = *action_index.entry(action.clone()).or_insert_with(|| {
                actions.push(action.clone());
                actions.len() - 1
            });
            if to.is_empty() {
                return Err(ModelError::EmptyDelta(from.clone(), action.clone()));
            }
            let mut succs = Vec::new();
            for t in to {
                let ti = *index
                    .get(t)
                    .ok_or_else(|| ModelError::DanglingReference(t.clone()))?;
                succs.push(ti);
            }
            succs.sort_unstable();
            succs.dedup();
            if rows[s].insert(a, succs).is_some() {
                return Err(ModelError::DuplicateTransition(from.clone(), action.clone()));
            }
        }

        let mut avail = Vec::with_capacity(n);
        let mut delta = Vec::with_capacity(n);
        for (s, row) in rows.into_iter().enumerate() {
            if row.is_empty() {
                return Err(ModelError::EmptyAvail(ids[s].clone()));
            }
            let (acts, succs): (Vec<usize>, Vec<Vec<usize>>) = row.into_iter().unzip();
            avail.push(acts);
            delta.push(succs);
        }

        let initial_id = self.initial.ok_or(ModelError::MissingInitial)?;
        let initial = *index
            .get(&initial_id)
            .ok_or(ModelError::DanglingReference(initial_id))?;

        Ok(Game::from_parts_unchecked(ids, actions, avail, delta, labels, initial))
    }
}

/// Which player controls a state of an alternating game.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Owner {
    Player1,
    Player2,
}

/// A game in which every state is controlled by a single player: Player-2
/// states offer one action, Player-1 states have a unique successor per
/// action. The `turn` proposition marks exactly the Player-1 states.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlternatingGame {
    game: Game,
    owners: Vec<Owner>,
}

impl AlternatingGame {
    /// Classifies states by the `turn` proposition and checks the structural
    /// requirements for each class.
    pub fn new(game: Game) -> Result<Self, ModelError> {
        let mut owners = Vec::with_capacity(game.n_states());
        for s in 0..game.n_states() {
            if game.has_prop(s, TURN_PROP) {
                for (_, succs) in game.moves(s) {
                    if succs.len() != 1 {
                        return Err(ModelError::NotAlternating(
                            game.state_id(s).to_string(),
                            "a `turn` state must have a unique successor per action".into(),
                        ));
                    }
                }
                owners.push(Owner::Player1);
            } else {
                if game.avail(s).len() != 1 {
                    return Err(ModelError::NotAlternating(
                        game.state_id(s).to_string(),
                        "a state without `turn` must have exactly one action".into(),
                    ));
                }
                owners.push(Owner::Player2);
            }
        }
        Ok(AlternatingGame { game, owners })
    }

    pub fn game(&self) -> &Game {
        &self.game
    }

    pub fn owner(&self, s: usize) -> Owner {
        self.owners[s]
    }

    pub fn into_game(self) -> Game {
        self.game
    }
}

/// State class of an MDP.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Player1,
    Prob,
}

/// Finite MDP with exact rational transition probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct Mdp {
    ids: Vec<String>,
    index: HashMap<String, usize>,
    actions: Vec<String>,
    action_index: HashMap<String, usize>,
    roles: Vec<Role>,
    avail: Vec<Vec<usize>>,
    delta1: Vec<Vec<usize>>,
    dist: Vec<Vec<(usize, BigRational)>>,
    labels: Vec<BTreeSet<String>>,
    initial: usize,
}

impl Mdp {
    pub fn n_states(&self) -> usize {
        self.ids.len()
    }

    pub fn state_id(&self, s: usize) -> &str {
        &self.ids[s]
    }

    pub fn state_index(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn action_id(&self, a: usize) -> &str {
        &self.actions[a]
    }

    pub fn action_ids(&self) -> &[String] {
        &self.actions
    }

    pub fn role(&self, s: usize) -> Role {
        self.roles[s]
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn labels(&self, s: usize) -> &BTreeSet<String> {
        &self.labels[s]
    }

    /// Available actions of a Player-1 state (empty for probabilistic states).
    pub fn avail(&self, s: usize) -> &[usize] {
        &self.avail[s]
    }

    /// Unique successor of the `slot`-th action of a Player-1 state.
    pub fn next1(&self, s: usize, slot: usize) -> usize {
        self.delta1[s][slot]
    }

    /// Distribution of a probabilistic state, sorted by target index.
    pub fn dist(&self, s: usize) -> &[(usize, BigRational)] {
        &self.dist[s]
    }

    /// Support of a probabilistic state's distribution.
    pub fn support(&self, s: usize) -> impl Iterator<Item = usize> + '_ {
        self.dist[s].iter().map(|(t, _)| *t)
    }

    pub fn propositions(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for l in &self.labels {
            out.extend(l.iter().cloned());
        }
        out
    }

    /// Two-player interpretation: probabilistic choice becomes a Player-2
    /// choice over the support, the fresh action [`BOT_ACTION`] is the single
    /// action of probabilistic states, and Player-1 states gain the
    /// [`TURN_PROP`] label.
    pub fn to_game(&self) -> AlternatingGame {
        let mut actions = self.actions.clone();
        actions.push(BOT_ACTION.to_string());
        let bot = actions.len() - 1;
        let mut avail = Vec::with_capacity(self.n_states());
        let mut delta = Vec::with_capacity(self.n_states());
        let mut labels = Vec::with_capacity(self.n_states());
        let mut owners = Vec::with_capacity(self.n_states());
        for s in 0..self.n_states() {
            match self.roles[s] {
                Role::Player1 => {
                    avail.push(self.avail[s].clone());
                    delta.push(self.delta1[s].iter().map(|&t| vec![t]).collect());
                    let mut l = self.labels[s].clone();
                    l.insert(TURN_PROP.to_string());
                    labels.push(l);
                    owners.push(Owner::Player1);
                }
                Role::Prob => {
                    avail.push(vec![bot]);
                    delta.push(vec![self.support(s).collect()]);
                    labels.push(self.labels[s].clone());
                    owners.push(Owner::Player2);
                }
            }
        }
        let game = Game::from_parts_unchecked(
            self.ids.clone(),
            actions,
            avail,
            delta,
            labels,
            self.initial,
        );
        AlternatingGame { game, owners }
    }
}

/// MDP whose initial state is a Player-1 state and whose transitions strictly
/// alternate between Player-1 and probabilistic states.
#[derive(Debug, Clone, PartialEq)]
pub struct StrictlyAlternatingMdp(Mdp);

impl StrictlyAlternatingMdp {
    pub fn new(mdp: Mdp) -> Result<Self, ModelError> {
        if mdp.roles[mdp.initial] != Role::Player1 {
            return Err(ModelError::NotStrictlyAlternating(
                mdp.state_id(mdp.initial).to_string(),
                "initial state must be a Player-1 state".into(),
            ));
        }
        for s in 0..mdp.n_states() {
            match mdp.roles[s] {
                Role::Player1 => {
                    for &t in &mdp.delta1[s] {
                        if mdp.roles[t] != Role::Prob {
                            return Err(ModelError::NotStrictlyAlternating(
                                mdp.state_id(s).to_string(),
                                format!(
                                    "successor `{}` of a Player-1 state must be probabilistic",
                                    mdp.state_id(t)
                                ),
                            ));
                        }
                    }
                }
                Role::Prob => {
                    for (t, _) in &mdp.dist[s] {
                        if mdp.roles[*t] != Role::Player1 {
                            return Err(ModelError::NotStrictlyAlternating(
                                mdp.state_id(s).to_string(),
                                format!(
                                    "support state `{}` of a probabilistic state must be Player-1",
                                    mdp.state_id(*t)
                                ),
                            ));
                        }
                    }
                }
            }
        }
        Ok(StrictlyAlternatingMdp(mdp))
    }

    pub fn mdp(&self) -> &Mdp {
        &self.0
    }

    /// Parallel composition: Player-1 pairs synchronize on shared actions,
    /// probabilistic pairs move by the product distribution. Restricted to
    /// reachable pairs.
    pub fn compose(&self, other: &StrictlyAlternatingMdp) -> Result<Mdp, ModelError> {
        let (m, n) = (&self.0, &other.0);
        if !same_alphabet(&m.actions, &n.actions) {
            return Err(ModelError::AlphabetMismatch);
        }
        let actions = m.actions.clone();
        let other_act: Vec<usize> = actions
            .iter()
            .map(|a| n.action_index[a])
            .collect();

        let mut ids = Vec::new();
        let mut labels = Vec::new();
        let mut roles = Vec::new();
        let mut pair_of: Vec<(usize, usize)> = Vec::new();
        let mut seen: HashMap<(usize, usize), usize> = HashMap::new();
        let mut queue = VecDeque::new();

        let intern =
            |l: usize,
             r: usize,
             seen: &mut HashMap<(usize, usize), usize>,
             ids: &mut Vec<String>,
             labels: &mut Vec<BTreeSet<String>>,
             roles: &mut Vec<Role>,
             pair_of: &mut Vec<(usize, usize)>,
             queue: &mut VecDeque<usize>| {
                *seen.entry((l, r)).or_insert_with(|| {
                    let id = pair_of.len();
                    pair_of.push((l, r));
                    ids.push(pair_id(m.state_id(l), n.state_id(r)));
                    labels.push(m.labels[l].union(&n.labels[r]).cloned().collect());
                    roles.push(m.roles[l]);
                    queue.push_back(id);
                    id
                })
            };

        intern(
            m.initial, n.initial, &mut seen, &mut ids, &mut labels, &mut roles, &mut pair_of,
            &mut queue,
        );

        let mut avail = Vec::new();
        let mut delta1 = Vec::new();
        let mut dist = Vec::new();
        while let Some(ix) = queue.pop_front() {
            let (l, r) = pair_of[ix];
            let mut row_avail = Vec::new();
            let mut row_delta = Vec::new();
            let mut row_dist: Vec<(usize, BigRational)> = Vec::new();
            match m.roles[l] {
                Role::Player1 => {
                    for (slot_a, &a) in m.avail[l].iter().enumerate() {
                        let ra = other_act[a];
                        let Some(rslot) = n.avail[r].binary_search(&ra).ok() else {
                            continue;
                        };
                        let lt = m.delta1[l][slot_a];
                        let rt = n.delta1[r][rslot];
                        let next = intern(
                            lt, rt, &mut seen, &mut ids, &mut labels, &mut roles, &mut pair_of,
                            &mut queue,
                        );
                        row_avail.push(a);
                        row_delta.push(next);
                    }
                    if row_avail.is_empty() {
                        return Err(ModelError::EmptyAvailInComposite(
                            m.state_id(l).to_string(),
                            n.state_id(r).to_string(),
                        ));
                    }
                }
                Role::Prob => {
                    for (lt, lp) in &m.dist[l] {
                        for (rt, rp) in &n.dist[r] {
                            let next = intern(
                                *lt, *rt, &mut seen, &mut ids, &mut labels, &mut roles,
                                &mut pair_of, &mut queue,
                            );
                            row_dist.push((next, lp * rp));
                        }
                    }
                    row_dist.sort_by_key(|(t, _)| *t);
                    debug_assert!(row_dist
                        .iter()
                        .fold(BigRational::zero(), |acc, (_, p)| acc + p)
                        .is_one());
                }
            }
            debug_assert_eq!(avail.len(), ix);
            avail.push(row_avail);
            delta1.push(row_delta);
            dist.push(row_dist);
        }

        let index = ids
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect();
        let action_index = actions
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect();
        Ok(Mdp {
            ids,
            index,
            actions,
            action_index,
            roles,
            avail,
            delta1,
            dist,
            labels,
            initial: 0,
        })
    }
}

/// Incremental description of an MDP; `build` validates roles, availability,
/// and that every distribution sums to exactly one.
#[derive(Debug, Default, Clone)]
pub struct MdpBuilder {
    states: Vec<(String, Role, BTreeSet<String>)>,
    moves: Vec<(String, String, String)>,
    dists: Vec<(String, Vec<(String, BigRational)>)>,
    initial: Option<String>,
}

impl MdpBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn player1_state<I, S>(mut self, id: &str, labels: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.states.push((
            id.to_string(),
            Role::Player1,
            labels.into_iter().map(Into::into).collect(),
        ));
        self
    }

    pub fn prob_state<I, S>(mut self, id: &str, labels: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.states.push((
            id.to_string(),
            Role::Prob,
            labels.into_iter().map(Into::into).collect(),
        ));
        self
    }

    pub fn mv(mut self, from: &str, action: &str, to: &str) -> Self {
        self.moves
            .push((from.to_string(), action.to_string(), to.to_string()));
        self
    }

    pub fn dist<I, S>(mut self, from: &str, entries: I) -> Self
    where
        I: IntoIterator<Item = (S, BigRational)>,
        S: Into<String>,
    {
        self.dists.push((
            from.to_string(),
            entries.into_iter().map(|(t, p)| (t.into(), p)).collect(),
        ));
        self
    }

    pub fn initial(mut self, id: &str) -> Self {
        self.initial = Some(id.to_string());
        self
    }

    pub fn build(self) -> Result<Mdp, ModelError> {
        let mut index = HashMap::new();
        let mut ids = Vec::new();
        let mut roles = Vec::new();
        let mut labels = Vec::new();
        for (id, role, props) in self.states {
            if props.contains(TURN_PROP) {
                return Err(ModelError::ReservedProposition(TURN_PROP.to_string()));
            }
            if index.insert(id.clone(), ids.len()).is_some() {
                return Err(ModelError::DuplicateId(id));
            }
            ids.push(id);
            roles.push(role);
            labels.push(props);
        }
        let n = ids.len();

        let mut actions: Vec<String> = Vec::new();
        let mut action_index: HashMap<String, usize> = HashMap::new();
        let mut rows: Vec<BTreeMap<usize, usize>> = vec![BTreeMap::new(); n];
        for (from, action, to) in &self.moves {
            if action == BOT_ACTION {
                return Err(ModelError::ReservedAction(action.clone()));
            }
            let s = *index
                .get(from)
                .ok_or_else(|| ModelError::DanglingReference(from.clone()))?;
            if roles[s] != Role::Player1 {
                return Err(ModelError::NotStrictlyAlternating(
                    from.clone(),
                    "probabilistic states take distributions, not actions".into(),
                ));
            }
            let a = *action_index.entry(action.clone()).or_insert_with(|| {
                actions.push(action.clone());
                actions.len() - 1
            });
            let t = *index
                .get(to)
                .ok_or_else(|| ModelError::DanglingReference(to.clone()))?;
            if rows[s].insert(a, t).is_some() {
                return Err(ModelError::DuplicateTransition(from.clone(), action.clone()));
            }
        }

        let mut dist: Vec<Vec<(usize, BigRational)>> = vec![Vec::new(); n];
        for (from, entries) in &self.dists {
            let s = *index
                .get(from)
                .ok_or_else(|| ModelError::DanglingReference(from.clone()))?;
            if roles[s] != Role::Prob {
                return Err(ModelError::NotStrictlyAlternating(
                    from.clone(),
                    "only probabilistic states take distributions".into(),
                ));
            }
            if !dist[s].is_empty() {
                return Err(ModelError::DuplicateTransition(from.clone(), "<dist>".into()));
            }
            let mut row: BTreeMap<usize, BigRational> = BTreeMap::new();
            for (t, p) in entries {
                let ti = *index
                    .get(t)
                    .ok_or_else(|| ModelError::DanglingReference(t.clone()))?;
                if *p <= BigRational::zero() {
                    return Err(ModelError::NonPositiveProbability(from.clone(), t.clone()));
                }
                if row.insert(ti, p.clone()).is_some() {
                    return Err(ModelError::DuplicateTransition(from.clone(), t.clone()));
                }
            }
            let sum = row.values().fold(BigRational::zero(), |acc, p| acc + p);
            if !sum.is_one() {
                return Err(ModelError::BadDistributionSum(from.clone(), sum.to_string()));
            }
            dist[s] = row.into_iter().collect();
        }

        let mut avail = Vec::with_capacity(n);
        let mut delta1 = Vec::with_capacity(n);
        for (s, row) in rows.into_iter().enumerate() {
            match roles[s] {
                Role::Player1 => {
                    if row.is_empty() {
                        return Err(ModelError::EmptyAvail(ids[s].clone()));
                    }
                }
                Role::Prob => {
                    if dist[s].is_empty() {
                        return Err(ModelError::EmptyDelta(ids[s].clone(), "<dist>".into()));
                    }
                }
            }
            let (acts, succs): (Vec<usize>, Vec<usize>) = row.into_iter().unzip();
            avail.push(acts);
            delta1.push(succs);
        }

        let initial_id = self.initial.ok_or(ModelError::MissingInitial)?;
        let initial = *index
            .get(&initial_id)
            .ok_or(ModelError::DanglingReference(initial_id))?;

        Ok(Mdp {
            ids,
            index,
            actions,
            action_index,
            roles,
            avail,
            delta1,
            dist,
            labels,
            initial,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::BigInt;

    fn ratio(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    /// Example MDP used across the test suite: three Player-1 states, two
    /// probabilistic states, actions a and b.
    pub(crate) fn example_mdp() -> Mdp {
        MdpBuilder::new()
            .player1_state("s0", Vec::<String>::new())
            .prob_state("s1", Vec::<String>::new())
            .player1_state("s2", ["p"])
            .player1_state("s3", ["p"])
            .prob_state("s4", Vec::<String>::new())
            .mv("s0", "a", "s1")
            .mv("s0", "b", "s4")
            .mv("s2", "a", "s4")
            .mv("s2", "b", "s4")
            .mv("s3", "b", "s4")
            .dist("s1", [("s2", ratio(1, 2)), ("s3", ratio(1, 2))])
            .dist("s4", [("s3", ratio(1, 1))])
            .initial("s0")
            .build()
            .unwrap()
    }

    #[test]
    fn minimal_game_is_valid() {
        let g = GameBuilder::new()
            .state("s0", ["p"])
            .transition("s0", "a", ["s0"])
            .initial("s0")
            .build()
            .unwrap();
        assert_eq!(g.n_states(), 1);
        assert_eq!(g.avail(0), &[0]);
        assert_eq!(g.succ(0, 0), &[0]);
    }

    #[test]
    fn state_without_actions_is_rejected() {
        let err = GameBuilder::new()
            .state("s0", ["p"])
            .state("s1", Vec::<String>::new())
            .transition("s0", "a", ["s1"])
            .initial("s0")
            .build()
            .unwrap_err();
        assert_eq!(err, ModelError::EmptyAvail("s1".into()));
    }

    #[test]
    fn empty_successor_list_is_rejected() {
        let err = GameBuilder::new()
            .state("s0", ["p"])
            .transition("s0", "a", Vec::<String>::new())
            .initial("s0")
            .build()
            .unwrap_err();
        assert_eq!(err, ModelError::EmptyDelta("s0".into(), "a".into()));
    }

    #[test]
    fn dangling_target_is_rejected() {
        let err = GameBuilder::new()
            .state("s0", ["p"])
            .transition("s0", "a", ["x"])
            .initial("s0")
            .build()
            .unwrap_err();
        assert_eq!(err, ModelError::DanglingReference("x".into()));
    }

    #[test]
    fn reserved_action_is_rejected() {
        let err = GameBuilder::new()
            .state("s0", ["p"])
            .transition("s0", BOT_ACTION, ["s0"])
            .initial("s0")
            .build()
            .unwrap_err();
        assert!(matches!(err, ModelError::ReservedAction(_)));
    }

    #[test]
    fn self_composition_of_self_loop() {
        let g = GameBuilder::new()
            .state("s0", ["p"])
            .transition("s0", "a", ["s0"])
            .initial("s0")
            .build()
            .unwrap();
        let c = g.compose(&g).unwrap();
        assert_eq!(c.n_states(), 1);
        assert_eq!(c.state_id(0), "(s0,s0)");
        assert_eq!(c.succ(0, 0), &[0]);
    }

    #[test]
    fn composite_avail_is_intersection() {
        // Same alphabet is required, so declare all three actions on both sides
        // via an unreachable helper state.
        let g = GameBuilder::new()
            .state("s", Vec::<String>::new())
            .state("u", Vec::<String>::new())
            .transition("s", "a", ["s"])
            .transition("s", "b", ["s"])
            .transition("u", "c", ["u"])
            .initial("s")
            .build()
            .unwrap();
        let h = GameBuilder::new()
            .state("t", Vec::<String>::new())
            .state("u", Vec::<String>::new())
            .transition("t", "b", ["t"])
            .transition("t", "c", ["t"])
            .transition("u", "a", ["u"])
            .initial("t")
            .build()
            .unwrap();
        let c = g.compose(&h).unwrap();
        let avail: Vec<&str> = c.avail(0).iter().map(|&a| c.action_id(a)).collect();
        assert_eq!(avail, vec!["b"]);
        let _ = h;
    }

    #[test]
    fn full_product_size() {
        let mut gb = GameBuilder::new();
        for i in 0..3 {
            gb = gb.state(&format!("s{i}"), Vec::<String>::new());
        }
        for i in 0..3 {
            gb = gb.transition(&format!("s{i}"), "a", ["s0", "s1", "s2"]);
        }
        let g = gb.initial("s0").build().unwrap();
        let mut hb = GameBuilder::new();
        for i in 0..4 {
            hb = hb.state(&format!("t{i}"), Vec::<String>::new());
        }
        for i in 0..4 {
            hb = hb.transition(&format!("t{i}"), "a", ["t0", "t1", "t2", "t3"]);
        }
        let h = hb.initial("t0").build().unwrap();
        let c = g.compose(&h).unwrap();
        assert_eq!(c.n_states(), 12);
    }

    #[test]
    fn empty_composite_avail_is_reported() {
        let g = GameBuilder::new()
            .state("s", Vec::<String>::new())
            .state("u", Vec::<String>::new())
            .transition("s", "a", ["s"])
            .transition("u", "b", ["u"])
            .initial("s")
            .build()
            .unwrap();
        let h = GameBuilder::new()
            .state("t", Vec::<String>::new())
            .state("u", Vec::<String>::new())
            .transition("t", "b", ["t"])
            .transition("u", "a", ["u"])
            .initial("t")
            .build()
            .unwrap();
        let err = g.compose(&h).unwrap_err();
        assert_eq!(err, ModelError::EmptyAvailInComposite("s".into(), "t".into()));
    }

    #[test]
    fn product_distribution_with_point_mass() {
        let m = MdpBuilder::new()
            .player1_state("i", Vec::<String>::new())
            .prob_state("p", Vec::<String>::new())
            .mv("i", "a", "p")
            .dist("p", [("i", ratio(1, 2)), ("i2", ratio(1, 2))])
            .player1_state("i2", Vec::<String>::new())
            .mv("i2", "a", "p")
            .initial("i")
            .build()
            .unwrap();
        let n = MdpBuilder::new()
            .player1_state("j", Vec::<String>::new())
            .prob_state("q", Vec::<String>::new())
            .mv("j", "a", "q")
            .dist("q", [("j", ratio(1, 1))])
            .initial("j")
            .build()
            .unwrap();
        let m = StrictlyAlternatingMdp::new(m).unwrap();
        let n = StrictlyAlternatingMdp::new(n).unwrap();
        let c = m.compose(&n).unwrap();
        let p = c.state_index("(p,q)").unwrap();
        let d = c.dist(p);
        assert_eq!(d.len(), 2);
        assert!(d.iter().all(|(_, w)| *w == ratio(1, 2)));
    }

    #[test]
    fn product_distribution_weights() {
        let m = MdpBuilder::new()
            .player1_state("i", Vec::<String>::new())
            .prob_state("p", Vec::<String>::new())
            .player1_state("u", Vec::<String>::new())
            .player1_state("v", Vec::<String>::new())
            .mv("i", "a", "p")
            .mv("u", "a", "p")
            .mv("v", "a", "p")
            .dist("p", [("u", ratio(1, 2)), ("v", ratio(1, 2))])
            .initial("i")
            .build()
            .unwrap();
        let n = MdpBuilder::new()
            .player1_state("j", Vec::<String>::new())
            .prob_state("q", Vec::<String>::new())
            .player1_state("x", Vec::<String>::new())
            .player1_state("y", Vec::<String>::new())
            .mv("j", "a", "q")
            .mv("x", "a", "q")
            .mv("y", "a", "q")
            .dist("q", [("x", ratio(1, 3)), ("y", ratio(2, 3))])
            .initial("j")
            .build()
            .unwrap();
        let m = StrictlyAlternatingMdp::new(m).unwrap();
        let n = StrictlyAlternatingMdp::new(n).unwrap();
        let c = m.compose(&n).unwrap();
        let p = c.state_index("(p,q)").unwrap();
        let sum = c
            .dist(p)
            .iter()
            .fold(BigRational::zero(), |acc, (_, w)| acc + w);
        assert!(sum.is_one());
        let weights: Vec<BigRational> = c.dist(p).iter().map(|(_, w)| w.clone()).collect();
        assert!(weights.contains(&ratio(1, 6)));
        assert!(weights.contains(&ratio(1, 3)));
    }

    #[test]
    fn probabilistic_initial_is_not_strictly_alternating() {
        let m = MdpBuilder::new()
            .prob_state("p", Vec::<String>::new())
            .player1_state("i", Vec::<String>::new())
            .mv("i", "a", "p")
            .dist("p", [("i", ratio(1, 1))])
            .initial("p")
            .build()
            .unwrap();
        assert!(matches!(
            StrictlyAlternatingMdp::new(m),
            Err(ModelError::NotStrictlyAlternating(_, _))
        ));
    }

    #[test]
    fn example_mdp_interpretation() {
        let m = example_mdp();
        let g = m.to_game();
        let s1 = g.game().state_index("s1").unwrap();
        let bot = g.game().action_index(BOT_ACTION).unwrap();
        let succs: Vec<&str> = g
            .game()
            .succ_by_action(s1, bot)
            .unwrap()
            .iter()
            .map(|&t| g.game().state_id(t))
            .collect();
        assert_eq!(succs, vec!["s2", "s3"]);
        let s4 = g.game().state_index("s4").unwrap();
        let succs: Vec<&str> = g
            .game()
            .succ_by_action(s4, bot)
            .unwrap()
            .iter()
            .map(|&t| g.game().state_id(t))
            .collect();
        assert_eq!(succs, vec!["s3"]);
        let s0 = g.game().state_index("s0").unwrap();
        assert!(g.game().has_prop(s0, TURN_PROP));
        assert!(!g.game().has_prop(s1, TURN_PROP));
        assert_eq!(g.owner(s0), Owner::Player1);
        assert_eq!(g.owner(s1), Owner::Player2);
    }

    #[test]
    fn turn_label_is_reserved_in_mdp_input() {
        let err = MdpBuilder::new()
            .player1_state("s", [TURN_PROP])
            .mv("s", "a", "s")
            .initial("s")
            .build()
            .unwrap_err();
        assert!(matches!(err, ModelError::ReservedProposition(_)));
    }
}
