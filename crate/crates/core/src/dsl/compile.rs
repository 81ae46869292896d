//! Compile a validated program into a concrete world.
//!
//! Compilation is a pure function of (program, seed): the base floors are
//! drawn first, then each placement statement consumes its own derived RNG
//! stream, so adding or removing one statement never disturbs the others.

use rand::seq::SliceRandom;
use thiserror::Error;

use crate::dsl::ast::{LevelProgram, Region};
use crate::gridworld::{
    basemap, manhattan, start_cell, Mob, Species, WorldState, DEFAULT_MAX_TIMESTEPS, MAP_SIZE,
    MAX_HEALTH, REGEN_CALM_STEPS,
};
use crate::rngstream::{derive, stream};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CompileError {
    #[error("placement {index} ({what}) needs {needed} cells, annulus has {available} feasible")]
    Infeasible {
        index: usize,
        what: String,
        needed: u16,
        available: usize,
    },
    #[error("placement {index} targets the player start ({row},{col})")]
    PlayerStart { index: usize, row: u8, col: u8 },
}

/// Build the initial world for a program. Same (p, seed) twice gives a
/// bit-identical state.
pub fn compile(p: &LevelProgram, seed: u64) -> Result<WorldState, CompileError> {
    let maps = [
        basemap::floor0(&mut stream(seed, "base", &[0])),
        basemap::floor1(&mut stream(seed, "base", &[1])),
    ];
    let mut state = WorldState {
        maps,
        player_floor: p.floor,
        player_row: start_cell(p.floor).0,
        player_col: start_cell(p.floor).1,
        facing: crate::gridworld::Facing::Down,
        inventory: [0; crate::registry::Item::COUNT],
        health: MAX_HEALTH,
        mobs: Vec::new(),
        achievements: p.completed,
        initial_achievements: p.completed,
        mechanics: p.mechanics.clone(),
        monsters_killed: [0; crate::gridworld::NUM_FLOORS],
        timestep: 0,
        max_timesteps: DEFAULT_MAX_TIMESTEPS,
        rng: stream(seed, "episode", &[]),
        hunger: 0.0,
        last_damage_step: -i64::from(REGEN_CALM_STEPS),
    };
    state.mobs = basemap::initial_mobs(&state.maps, &mut stream(seed, "mobs", &[]));

    let origin = start_cell(p.floor);
    for (i, spec) in p.placements.iter().enumerate() {
        match spec.region {
            Region::At { row, col } => {
                if p.floor == state.player_floor && (row, col) == origin {
                    return Err(CompileError::PlayerStart { index: i, row, col });
                }
                state.set_block(p.floor, row, col, spec.block);
            }
            Region::Near { min, max, n } => {
                let mut feasible: Vec<(u8, u8)> = cells()
                    .filter(|&cell| {
                        let d = manhattan(cell, origin);
                        d >= min
                            && d <= max
                            && spec.on_blocks.contains(&state.block_at(p.floor, cell.0, cell.1))
                    })
                    .collect();
                if feasible.len() < usize::from(n) {
                    return Err(CompileError::Infeasible {
                        index: i,
                        what: format!("block {}", spec.block.name()),
                        needed: n,
                        available: feasible.len(),
                    });
                }
                feasible.shuffle(&mut stream(seed, "place", &[i as u64]));
                for &(r, c) in feasible.iter().take(usize::from(n)) {
                    state.set_block(p.floor, r, c, spec.block);
                }
            }
        }
    }

    for (i, spec) in p.mob_placements.iter().enumerate() {
        let species = Species::for_floor(spec.kind, p.floor);
        let mut feasible: Vec<(u8, u8)> = cells()
            .filter(|&cell| {
                let d = manhattan(cell, origin);
                d >= spec.min
                    && d <= spec.max
                    && state.block_at(p.floor, cell.0, cell.1).walkable()
                    && state.mob_at(p.floor, cell.0, cell.1).is_none()
            })
            .collect();
        if feasible.len() < usize::from(spec.count) {
            return Err(CompileError::Infeasible {
                index: i,
                what: format!("mob {species:?}"),
                needed: spec.count,
                available: feasible.len(),
            });
        }
        feasible.shuffle(&mut stream(seed, "mob", &[i as u64]));
        for &(row, col) in feasible.iter().take(usize::from(spec.count)) {
            state.mobs.push(Mob {
                species,
                floor: p.floor,
                row,
                col,
                hp: species.max_hp(),
                cooldown: 0,
            });
        }
    }

    for (&item, &count) in &p.inventory_overrides {
        state.inventory[item.index()] = count;
    }
    Ok(state)
}

/// Start an episode: a fresh world drawn from the program's initial state
/// distribution, plus the first observation (conditioned on the program's
/// own goal).
pub fn reset(
    p: &LevelProgram,
    episode_seed: u64,
) -> Result<(WorldState, crate::gridworld::Observation), CompileError> {
    let state = compile(p, derive(episode_seed, "reset", &[]))?;
    let obs = crate::gridworld::encode_observation(&state, p.goal);
    Ok((state, obs))
}

fn cells() -> impl Iterator<Item = (u8, u8)> {
    (0..MAP_SIZE as u8).flat_map(|r| (0..MAP_SIZE as u8).map(move |c| (r, c)))
}
