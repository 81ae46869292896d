//! The level DSL: programs that override pieces of the target task.
//!
//! A program is parsed from `.lvl` text, validated against the achievement
//! registry and map bounds, serialized back to canonical text, and compiled
//! (together with an episode seed) into a concrete [`crate::gridworld::WorldState`].

mod ast;
mod compile;
mod parser;
mod serialize;
mod validate;

pub use ast::{LevelProgram, MechanicsParams, MobSpec, PlacementSpec, Region, MECHANICS_FIELDS};
pub use compile::{compile, reset, CompileError};
pub use parser::{parse, DslError};
pub use serialize::serialize;
pub use validate::validate;
