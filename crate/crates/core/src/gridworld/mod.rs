//! Two-floor crafting gridworld with a hierarchical achievement chain.
//!
//! Floor 0 is the overworld: a forest band to the west, a rock band (stone,
//! coal, iron) to the east, a small lake, a ladder down in the southeast and
//! zombies. Floor 1 is the mines: sparser resources, guards, no way back up.
//! Mining happens by walking into a block (or facing it and interacting),
//! crafting needs an adjacent table/furnace, and the ladder only works once
//! enough monsters on the current floor have been killed.

pub(crate) mod basemap;
mod reward;
mod state;
mod step;

pub use reward::{native_reward_of, wrapped_reward};
pub use state::{encode_observation, Facing, Mob, Observation, Species, StepOutcome, WorldState};

pub const MAP_SIZE: usize = 12;
pub const NUM_FLOORS: usize = 2;

/// Player spawn on floor 0.
pub const PLAYER_START: (u8, u8) = (6, 6);
/// Where the floor-0 ladder sits and where a descent lands on floor 1.
pub const LADDER_POS: (u8, u8) = (9, 9);
pub const LANDING_POS: (u8, u8) = (9, 9);

pub const MAX_HEALTH: i16 = 9;
pub const DEFAULT_MAX_TIMESTEPS: u32 = 400;

// Combat.
pub const ZOMBIE_HP: i16 = 3;
pub const GUARD_HP: i16 = 6;
pub const COW_HP: i16 = 2;
pub const ZOMBIE_DMG: f64 = 1.0;
pub const GUARD_DMG: f64 = 2.0;
pub const FIST_DMG: i16 = 1;
pub const SWORD_DMG: i16 = 3;
pub const MOB_ATTACK_COOLDOWN: u8 = 5;
pub const CHASE_TRIGGER_DIST: u16 = 6;

// Spawning (per step, scaled by the mechanics multipliers, capped per kind).
pub const MELEE_SPAWN_PROB: f64 = 0.02;
pub const PASSIVE_SPAWN_PROB: f64 = 0.005;
pub const MOB_CAP_PER_KIND: usize = 3;
pub const SPAWN_MIN_DIST: u16 = 5;

// Needs drain and recovery.
pub const HUNGER_PER_HEALTH: f64 = 100.0;
pub const REGEN_INTERVAL: u32 = 50;
pub const REGEN_CALM_STEPS: u32 = 30;

pub fn manhattan(a: (u8, u8), b: (u8, u8)) -> u16 {
    let dr = (i16::from(a.0) - i16::from(b.0)).unsigned_abs();
    let dc = (i16::from(a.1) - i16::from(b.1)).unsigned_abs();
    dr + dc
}

/// Player spawn cell for a starting floor.
pub fn start_cell(floor: u8) -> (u8, u8) {
    if floor == 0 {
        PLAYER_START
    } else {
        LANDING_POS
    }
}
