//! Qualitative refinement checking for two-player games and MDPs.
//!
//! The crate decides simulation, alternating simulation and their
//! conjunction, the combined simulation preorder, between finite two-player
//! games. Combined simulation characterizes the qualitative logics: a game
//! formula built from the Player-1 and cooperative quantifiers transfers
//! along the preorder, and qualitative MDP properties reduce to it through
//! the two-player interpretation of an MDP. On top of the monolithic check
//! sits an assume-guarantee rule with counterexample-guided partition
//! refinement that proves refinement of a composition without ever building
//! it.
//!
//! Modules:
//! - [`model`]: games, MDPs, validation, parallel composition.
//! - [`solve`]: attractor-based safety game solving with strategies.
//! - [`relations`]: the gadget games and both preorder algorithms.
//! - [`logic`]: formula AST, game and MDP model checking, distinguishing
//!   formulas.
//! - [`cegar`]: partitions, abstractions, and the assume-guarantee loop.
//! - [`random`]: seeded instance generators for testing and benchmarks.

pub mod cegar;
pub mod logic;
pub mod model;
pub mod random;
pub mod relations;
pub mod solve;
