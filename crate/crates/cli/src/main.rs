//! Command-line front end: refinement checks, model checking, counterexample
//! dumps, and a differential benchmark harness.
//!
//! Exit codes: 0 the checked property holds (or the command succeeded),
//! 1 the property is refuted, 2 usage or input errors, 3 internal errors.

mod bench;

use combsim_cli::{format, formula};

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use combsim::cegar::{ag_cegar, AgOptions, AgOutcome, CegarError, CexDag, RunStats};
use combsim::logic::{distinguishing_formula, eval_atl, eval_qctl, LogicError};
use combsim::model::AlternatingGame;
use combsim::relations::{
    max_alternating_simulation, max_combined_simulation, max_combined_simulation_skip,
    RelationMatrix, SimNode,
};
use format::Model;

#[derive(Parser)]
#[command(name = "combsim", version, about = "Simulation, alternating-simulation and combined-simulation checking for games and MDPs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum RelationKind {
    Sim,
    Alt,
    Combined,
}

#[derive(Subcommand)]
enum Command {
    /// Decide a refinement relation between two models.
    Check {
        #[arg(long)]
        left: PathBuf,
        #[arg(long)]
        right: PathBuf,
        #[arg(long, value_enum)]
        relation: RelationKind,
        /// Print every related state pair.
        #[arg(long)]
        dump_relation: bool,
        /// Use the reduced gadget for alternating inputs.
        #[arg(long)]
        skip_step_opt: bool,
    },
    /// Monolithic combined-simulation check of a two-component composition.
    Mono {
        #[arg(long)]
        c1: PathBuf,
        #[arg(long)]
        c2: PathBuf,
        #[arg(long)]
        spec: PathBuf,
    },
    /// Assume-guarantee check with counterexample-guided refinement.
    Ag {
        #[arg(long)]
        c1: PathBuf,
        #[arg(long)]
        c2: PathBuf,
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        max_iters: Option<usize>,
        /// Write the final counterexample DAG to this path when refuted.
        #[arg(long)]
        emit_cex: Option<PathBuf>,
        /// Split complements by step behaviour during refinement.
        #[arg(long)]
        improved_refine: bool,
        /// Elide forced alternating-gadget steps in the premise game.
        #[arg(long)]
        skip_step_opt: bool,
    },
    /// Evaluate a formula and print the satisfying states.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        formula: String,
    },
    /// Synthesize a formula telling two states apart.
    Distinguish {
        #[arg(long)]
        left: PathBuf,
        #[arg(long)]
        right: PathBuf,
        /// Comma-separated pair of state ids.
        #[arg(long)]
        pair: String,
    },
    /// Cross-check the assume-guarantee engine against the monolithic one on
    /// random instances.
    Bench {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        count: usize,
        #[arg(long, default_value_t = 6)]
        max_states: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn load(path: &Path) -> Result<Model, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    format::parse_model(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn load_alternating(path: &Path) -> Result<AlternatingGame, String> {
    let model = load(path)?;
    match model {
        Model::Mdp(m) => Ok(m.to_game()),
        Model::Game(g) => {
            AlternatingGame::new(g).map_err(|e| format!("{}: {e}", path.display()))
        }
    }
}

fn run(cmd: Command) -> Result<ExitCode, String> {
    match cmd {
        Command::Check {
            left,
            right,
            relation,
            dump_relation,
            skip_step_opt,
        } => {
            let lg;
            let rg;
            let rel = match (relation, skip_step_opt) {
                (RelationKind::Combined, true) => {
                    let l = load_alternating(&left)?;
                    let r = load_alternating(&right)?;
                    lg = l.game().clone();
                    rg = r.game().clone();
                    max_combined_simulation_skip(&l, &r)
                }
                _ => {
                    lg = load(&left)?.as_game();
                    rg = load(&right)?.as_game();
                    match relation {
                        RelationKind::Sim => combsim::relations::max_simulation(&lg, &rg),
                        RelationKind::Alt => max_alternating_simulation(&lg, &rg),
                        RelationKind::Combined => max_combined_simulation(&lg, &rg),
                    }
                }
            };
            let related = rel.contains(lg.initial(), rg.initial());
            println!("{}", if related { "yes" } else { "no" });
            if dump_relation {
                println!("{}", relation_json(&rel, &lg, &rg));
            }
            Ok(exit_bool(related))
        }
        Command::Mono { c1, c2, spec } => {
            let g1 = load(&c1)?.as_game();
            let g2 = load(&c2)?.as_game();
            let spec = load(&spec)?.as_game();
            let composite = g1.compose(&g2).map_err(|e| e.to_string())?;
            let yes = combsim::relations::combined_simulates(&composite, &spec);
            println!("{}", if yes { "yes" } else { "no" });
            Ok(exit_bool(yes))
        }
        Command::Ag {
            c1,
            c2,
            spec,
            max_iters,
            emit_cex,
            improved_refine,
            skip_step_opt,
        } => {
            let g1 = load(&c1)?.as_game();
            let g2 = load(&c2)?.as_game();
            let spec = load(&spec)?.as_game();
            let opts = AgOptions {
                max_iters,
                improved_refine,
                skip_steps: skip_step_opt,
            };
            let (outcome, stats) = match ag_cegar(&g1, &g2, &spec, opts) {
                Ok(r) => r,
                // Input-shaped problems are usage errors; anything else is a
                // broken internal invariant.
                Err(e @ (CegarError::Model(_) | CegarError::Relation(_))) => {
                    return Err(e.to_string());
                }
                Err(e) => {
                    eprintln!("internal error: {e}");
                    return Ok(ExitCode::from(3));
                }
            };
            println!("{}", stats_json(&outcome, &stats));
            if let (AgOutcome::Refuted(dag), Some(path)) = (&outcome, &emit_cex) {
                std::fs::write(path, cex_json(dag))
                    .map_err(|e| format!("cannot write {}: {e}", path.display()))?;
            }
            Ok(match outcome {
                AgOutcome::Holds => ExitCode::SUCCESS,
                AgOutcome::Refuted(_) => ExitCode::from(1),
                AgOutcome::Exhausted => ExitCode::from(2),
            })
        }
        Command::Eval { model, formula } => {
            let model = load(&model)?;
            let f = formula::parse_formula(&formula).map_err(|e| e.to_string())?;
            let (sat, ids): (Vec<bool>, Vec<String>) = match &model {
                Model::Game(g) => (
                    eval_atl(g, &f).map_err(|e| e.to_string())?,
                    (0..g.n_states()).map(|s| g.state_id(s).to_string()).collect(),
                ),
                Model::Mdp(m) => (
                    eval_qctl(m, &f).map_err(|e| e.to_string())?,
                    (0..m.n_states()).map(|s| m.state_id(s).to_string()).collect(),
                ),
            };
            let mut satisfying: Vec<&String> =
                ids.iter().zip(&sat).filter(|(_, &b)| b).map(|(id, _)| id).collect();
            satisfying.sort();
            println!(
                "{}",
                serde_json::to_string(&satisfying).expect("state lists serialize")
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Distinguish { left, right, pair } => {
            let l = load_alternating(&left)?;
            let r = load_alternating(&right)?;
            let (ls, rs) = pair
                .split_once(',')
                .ok_or_else(|| "pair must be `state,state`".to_string())?;
            match distinguishing_formula(&l, &r, ls.trim(), rs.trim()) {
                Ok(f) => {
                    println!("{}", formula::print_formula(&f));
                    Ok(ExitCode::SUCCESS)
                }
                Err(LogicError::NotDistinguishable(_, _)) => {
                    println!("not distinguishable");
                    Ok(ExitCode::from(1))
                }
                Err(e) => Err(e.to_string()),
            }
        }
        Command::Bench {
            seed,
            count,
            max_states,
        } => bench::run(seed, count, max_states),
    }
}

fn exit_bool(yes: bool) -> ExitCode {
    if yes {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn relation_json(rel: &RelationMatrix, lg: &combsim::model::Game, rg: &combsim::model::Game) -> String {
    let pairs: Vec<(String, String)> = rel
        .iter_pairs()
        .map(|(l, r)| (lg.state_id(l).to_string(), rg.state_id(r).to_string()))
        .collect();
    serde_json::to_string(&serde_json::json!({ "relation": pairs }))
        .expect("relations serialize")
}

#[derive(Serialize)]
struct StatsLine<'a> {
    verdict: &'a str,
    iterations: usize,
    partition_size: usize,
    peak_arena_nodes: usize,
    refinements: usize,
    fallback_splits: usize,
    time_ms: u128,
}

fn stats_json(outcome: &AgOutcome, stats: &RunStats) -> String {
    serde_json::to_string(&StatsLine {
        verdict: outcome.verdict_str(),
        iterations: stats.iterations,
        partition_size: stats.partition_size,
        peak_arena_nodes: stats.peak_arena_nodes,
        refinements: stats.refinements,
        fallback_splits: stats.fallback_splits,
        time_ms: stats.wall.as_millis(),
    })
    .expect("stats serialize")
}

#[derive(Serialize)]
struct CexNodeLine {
    id: usize,
    kind: &'static str,
    left: String,
    right: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    action: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    reply: Option<String>,
    rank: u32,
    leaf: bool,
    successors: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    conc: Option<Vec<String>>,
}

/// Canonical counterexample dump: node list with components, ranks, the
/// strategy's successors, and concretization sets.
fn cex_json(dag: &CexDag) -> String {
    let mut nodes = Vec::new();
    for (id, node) in dag.nodes.iter().enumerate() {
        let (kind, l, r, action, reply) = match node.kind {
            SimNode::Pair { l, r } => ("pair", l, r, None, None),
            SimNode::SimChallenge { l, r } => ("sim-challenge", l, r, None, None),
            SimNode::SimResponse { l, r } => ("sim-response", l, r, None, None),
            SimNode::AltChallenge { l, r } => ("alt-challenge", l, r, None, None),
            SimNode::AltResponse { l, r, act } => ("alt-response", l, r, Some(act), None),
            SimNode::AltTarget { l, r, act, reply } => {
                ("alt-target", l, r, Some(act), Some(reply))
            }
            SimNode::AltMatch { l, r, act, reply } => {
                ("alt-match", l, r, Some(act), Some(reply))
            }
        };
        nodes.push(CexNodeLine {
            id,
            kind,
            left: dag.left_ids[l as usize].clone(),
            right: dag.right_ids[r as usize].clone(),
            action: action.map(|a| dag.action_ids[a as usize].clone()),
            reply: reply.map(|a| dag.action_ids[a as usize].clone()),
            rank: node.rank,
            leaf: node.leaf,
            successors: node.succs.clone(),
            conc: node
                .conc
                .as_ref()
                .map(|c| c.iter().map(|&s| dag.component_ids[s].clone()).collect()),
        });
    }
    let mut out = serde_json::to_string_pretty(&serde_json::json!({
        "root": dag.root,
        "nodes": nodes,
    }))
    .expect("counterexamples serialize");
    out.push('\n');
    out
}
