//! JSON model format.
//!
//! One schema covers games and MDPs. Serialization is canonical: states
//! sorted by id, transitions by (from, action), labels and distribution keys
//! sorted; parsing canonicalizes, so parse ∘ serialize ∘ parse is the
//! identity and serializing a canonical file reproduces it byte for byte.
//!
//! ```json
//! { "kind": "game",
//!   "states": [ { "id": "s0", "labels": ["p"] } ],
//!   "transitions": [ { "from": "s0", "action": "a", "to": ["s0"] } ],
//!   "initial": "s0" }
//! ```
//!
//! MDP states carry `"role": "player1" | "prob"`; player-1 transitions use a
//! single `"to"` id, probabilistic states a `"dist"` map of rationals
//! (`"1/2"`).

use std::collections::BTreeMap;
use std::str::FromStr;

use num::rational::BigRational;
use num::BigInt;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use combsim::model::{Game, GameBuilder, Mdp, MdpBuilder, ModelError, Role};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("schema error in `{field}`: {message}")]
    Schema { field: String, message: String },
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub kind: String,
    pub states: Vec<StateEntry>,
    pub transitions: Vec<TransitionEntry>,
    pub initial: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateEntry {
    pub id: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub labels: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub role: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransitionEntry {
    pub from: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub to: Option<ToField>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dist: Option<BTreeMap<String, String>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ToField {
    One(String),
    Many(Vec<String>),
}

/// A parsed model of either kind.
#[derive(Debug, Clone)]
pub enum Model {
    Game(Game),
    Mdp(Mdp),
}

impl Model {
    /// View as a game, interpreting MDPs through their two-player reading.
    pub fn as_game(&self) -> Game {
        match self {
            Model::Game(g) => g.clone(),
            Model::Mdp(m) => m.to_game().into_game(),
        }
    }
}

fn schema_err(field: &str, message: impl Into<String>) -> FormatError {
    FormatError::Schema {
        field: field.to_string(),
        message: message.into(),
    }
}

pub fn parse_model(text: &str) -> Result<Model, FormatError> {
    let file: ModelFile = serde_json::from_str(text).map_err(|e| {
        if e.is_syntax() || e.is_eof() {
            FormatError::Syntax {
                line: e.line(),
                column: e.column(),
                message: e.to_string(),
            }
        } else {
            schema_err("<document>", e.to_string())
        }
    })?;
    model_from_file(file)
}

pub fn model_from_file(mut file: ModelFile) -> Result<Model, FormatError> {
    file.states.sort_by(|a, b| a.id.cmp(&b.id));
    for s in &mut file.states {
        s.labels.sort();
        s.labels.dedup();
    }
    file.transitions
        .sort_by(|a, b| (&a.from, &a.action).cmp(&(&b.from, &b.action)));
    match file.kind.as_str() {
        "game" => game_from_file(&file).map(Model::Game),
        "mdp" => mdp_from_file(&file).map(Model::Mdp),
        other => Err(schema_err("kind", format!("unknown model kind `{other}`"))),
    }
}

fn game_from_file(file: &ModelFile) -> Result<Game, FormatError> {
    let mut b = GameBuilder::new();
    for s in &file.states {
        if s.role.is_some() {
            return Err(schema_err("states.role", "games do not declare roles"));
        }
        b = b.state(&s.id, s.labels.iter().cloned());
    }
    for t in &file.transitions {
        let action = t
            .action
            .as_ref()
            .ok_or_else(|| schema_err("transitions.action", "game transitions need an action"))?;
        if t.dist.is_some() {
            return Err(schema_err("transitions.dist", "games have no distributions"));
        }
        let to = match &t.to {
            Some(ToField::Many(v)) => v.clone(),
            Some(ToField::One(v)) => vec![v.clone()],
            None => {
                return Err(schema_err("transitions.to", "game transitions need targets"));
            }
        };
        let mut to = to;
        to.sort();
        to.dedup();
        b = b.transition(&t.from, action, to);
    }
    Ok(b.initial(&file.initial).build()?)
}

fn parse_rational(s: &str) -> Option<BigRational> {
    let (n, d) = s.split_once('/')?;
    let n = BigInt::from_str(n.trim()).ok()?;
    let d = BigInt::from_str(d.trim()).ok()?;
    if d == BigInt::from(0) {
        return None;
    }
    Some(BigRational::new(n, d))
}

fn mdp_from_file(file: &ModelFile) -> Result<Mdp, FormatError> {
    let mut b = MdpBuilder::new();
    for s in &file.states {
        match s.role.as_deref() {
            Some("player1") => b = b.player1_state(&s.id, s.labels.iter().cloned()),
            Some("prob") => b = b.prob_state(&s.id, s.labels.iter().cloned()),
            Some(other) => {
                return Err(schema_err("states.role", format!("unknown role `{other}`")));
            }
            None => {
                return Err(schema_err("states.role", "mdp states need a role"));
            }
        }
    }
    for t in &file.transitions {
        match (&t.action, &t.to, &t.dist) {
            (Some(action), Some(ToField::One(to)), None) => {
                b = b.mv(&t.from, action, to);
            }
            (Some(_), Some(ToField::Many(_)), None) => {
                return Err(schema_err(
                    "transitions.to",
                    "mdp player-1 transitions take a single target",
                ));
            }
            (None, None, Some(dist)) => {
                let mut entries = Vec::new();
                for (target, value) in dist {
                    let p = parse_rational(value).ok_or_else(|| {
                        schema_err("transitions.dist", format!("bad rational `{value}`"))
                    })?;
                    entries.push((target.clone(), p));
                }
                b = b.dist(&t.from, entries);
            }
            _ => {
                return Err(schema_err(
                    "transitions",
                    "expected either {from, action, to} or {from, dist}",
                ));
            }
        }
    }
    Ok(b.initial(&file.initial).build()?)
}

pub fn game_to_file(g: &Game) -> ModelFile {
    let mut states: Vec<StateEntry> = (0..g.n_states())
        .map(|s| StateEntry {
            id: g.state_id(s).to_string(),
            labels: g.labels(s).iter().cloned().collect(),
            role: None,
        })
        .collect();
    states.sort_by(|a, b| a.id.cmp(&b.id));
    let mut transitions = Vec::new();
    for s in 0..g.n_states() {
        for (a, ts) in g.moves(s) {
            let mut to: Vec<String> = ts.iter().map(|&t| g.state_id(t).to_string()).collect();
            to.sort();
            transitions.push(TransitionEntry {
                from: g.state_id(s).to_string(),
                action: Some(g.action_id(a).to_string()),
                to: Some(ToField::Many(to)),
                dist: None,
            });
        }
    }
    transitions.sort_by(|a, b| (&a.from, &a.action).cmp(&(&b.from, &b.action)));
    ModelFile {
        kind: "game".into(),
        states,
        transitions,
        initial: g.state_id(g.initial()).to_string(),
    }
}

pub fn mdp_to_file(m: &Mdp) -> ModelFile {
    let mut states: Vec<StateEntry> = (0..m.n_states())
        .map(|s| StateEntry {
            id: m.state_id(s).to_string(),
            labels: m.labels(s).iter().cloned().collect(),
            role: Some(match m.role(s) {
                Role::Player1 => "player1".into(),
                Role::Prob => "prob".into(),
            }),
        })
        .collect();
    states.sort_by(|a, b| a.id.cmp(&b.id));
    let mut transitions = Vec::new();
    for s in 0..m.n_states() {
        match m.role(s) {
            Role::Player1 => {
                for (slot, &a) in m.avail(s).iter().enumerate() {
                    transitions.push(TransitionEntry {
                        from: m.state_id(s).to_string(),
                        action: Some(m.action_id(a).to_string()),
                        to: Some(ToField::One(m.state_id(m.next1(s, slot)).to_string())),
                        dist: None,
                    });
                }
            }
            Role::Prob => {
                let dist: BTreeMap<String, String> = m
                    .dist(s)
                    .iter()
                    .map(|(t, p)| {
                        (
                            m.state_id(*t).to_string(),
                            format!("{}/{}", p.numer(), p.denom()),
                        )
                    })
                    .collect();
                transitions.push(TransitionEntry {
                    from: m.state_id(s).to_string(),
                    action: None,
                    to: None,
                    dist: Some(dist),
                });
            }
        }
    }
    transitions.sort_by(|a, b| (&a.from, &a.action).cmp(&(&b.from, &b.action)));
    ModelFile {
        kind: "mdp".into(),
        states,
        transitions,
        initial: m.state_id(m.initial()).to_string(),
    }
}

pub fn to_canonical_json(file: &ModelFile) -> String {
    let mut out = serde_json::to_string_pretty(file).expect("model files serialize");
    out.push('\n');
    out
}

pub fn serialize_model(model: &Model) -> String {
    match model {
        Model::Game(g) => to_canonical_json(&game_to_file(g)),
        Model::Mdp(m) => to_canonical_json(&mdp_to_file(m)),
    }
}
