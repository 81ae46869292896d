//! Curriculum engine for a two-floor crafting gridworld.
//!
//! Levels are small DSL programs that override pieces of a fixed target task
//! (starting floor, inventory, extra placements, mobs, mechanics multipliers,
//! goal and pre-completed achievement sets). An archive keeps every generated
//! level as a node in a lineage graph, scores nodes by learnability, replays
//! them with a rank/staleness mixture and selects parents for the next round
//! of generation. A tabular goal-conditioned Q-learner consumes the resulting
//! stream of episodes; a pipeline ties trainer and generator together with a
//! single-slot asynchronous ticket.

pub mod archive;
pub mod config;
pub mod dsl;
pub mod generator;
pub mod gridworld;
pub mod pipeline;
pub mod registry;
pub mod rngstream;
pub mod scalar;
pub mod trainer;

/// Concrete scalar used throughout the engine. The scoring math in
/// [`archive::score`] is generic over [`scalar::Scalar`]; everything else is
/// written against this alias.
pub type Real = f64;
