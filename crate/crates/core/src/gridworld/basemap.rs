//! Seeded base layout. The structure is fixed (bands, lake, ladder); the
//! exact cells inside each band are drawn per episode, so layouts vary while
//! a blind cell-keyed policy still has stable regions to learn.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::gridworld::state::{Mob, Species};
use crate::gridworld::{LADDER_POS, MAP_SIZE};
use crate::registry::Block;

pub type FloorMap = [Block; MAP_SIZE * MAP_SIZE];

fn idx(row: u8, col: u8) -> usize {
    usize::from(row) * MAP_SIZE + usize::from(col)
}

fn band_cells(rows: std::ops::RangeInclusive<u8>, cols: std::ops::RangeInclusive<u8>) -> Vec<(u8, u8)> {
    let mut cells = Vec::new();
    for r in rows {
        for c in cols.clone() {
            cells.push((r, c));
        }
    }
    cells
}

fn draw<R: Rng>(rng: &mut R, pool: &mut Vec<(u8, u8)>, k: usize) -> Vec<(u8, u8)> {
    pool.shuffle(rng);
    pool.drain(..k.min(pool.len())).collect()
}

fn blank_floor() -> FloorMap {
    let mut map = [Block::Grass; MAP_SIZE * MAP_SIZE];
    for i in 0..MAP_SIZE {
        map[idx(0, i as u8)] = Block::Wall;
        map[idx((MAP_SIZE - 1) as u8, i as u8)] = Block::Wall;
        map[idx(i as u8, 0)] = Block::Wall;
        map[idx(i as u8, (MAP_SIZE - 1) as u8)] = Block::Wall;
    }
    map
}

/// Overworld: lake NW, forest band west, rock band east, ladder SE.
pub fn floor0(rng: &mut ChaCha8Rng) -> FloorMap {
    let mut map = blank_floor();
    for (r, c) in [(1, 1), (1, 2), (2, 1), (2, 2)] {
        map[idx(r, c)] = Block::Water;
    }
    let mut forest = band_cells(3..=8, 1..=4);
    for (r, c) in draw(rng, &mut forest, 6) {
        map[idx(r, c)] = Block::Tree;
    }
    let mut rocks = band_cells(3..=8, 7..=10);
    let picked = draw(rng, &mut rocks, 9);
    for (i, (r, c)) in picked.iter().enumerate() {
        let block = match i {
            0..=4 => Block::Stone,
            5 | 6 => Block::Coal,
            _ => Block::Iron,
        };
        map[idx(*r, *c)] = block;
    }
    map[idx(LADDER_POS.0, LADDER_POS.1)] = Block::Ladder;
    map
}

/// Mines: a few stalagmite trees, a richer rock band, no ladder out.
pub fn floor1(rng: &mut ChaCha8Rng) -> FloorMap {
    let mut map = blank_floor();
    let mut growth = band_cells(3..=8, 1..=4);
    for (r, c) in draw(rng, &mut growth, 3) {
        map[idx(r, c)] = Block::Tree;
    }
    let mut rocks = band_cells(3..=8, 7..=10);
    let picked = draw(rng, &mut rocks, 8);
    for (i, (r, c)) in picked.iter().enumerate() {
        let block = match i {
            0..=3 => Block::Stone,
            4 | 5 => Block::Coal,
            _ => Block::Iron,
        };
        map[idx(*r, *c)] = block;
    }
    map
}

/// Ambient mobs present at reset, before any DSL mob placements.
pub fn initial_mobs(maps: &[FloorMap; 2], rng: &mut ChaCha8Rng) -> Vec<Mob> {
    let mut mobs = Vec::new();
    let spawn = |map: &FloorMap,
                     rng: &mut ChaCha8Rng,
                     mobs: &mut Vec<Mob>,
                     floor: u8,
                     species: Species,
                     rows: std::ops::RangeInclusive<u8>,
                     cols: std::ops::RangeInclusive<u8>,
                     k: usize| {
        let mut pool: Vec<(u8, u8)> = band_cells(rows, cols)
            .into_iter()
            .filter(|(r, c)| map[idx(*r, *c)].walkable())
            .filter(|cell| !mobs.iter().any(|m: &Mob| m.floor == floor && (m.row, m.col) == *cell))
            .collect();
        for (r, c) in draw(rng, &mut pool, k) {
            mobs.push(Mob {
                species,
                floor,
                row: r,
                col: c,
                hp: species.max_hp(),
                cooldown: 0,
            });
        }
    };
    spawn(&maps[0], rng, &mut mobs, 0, Species::Zombie, 8..=10, 1..=6, 1);
    spawn(&maps[0], rng, &mut mobs, 0, Species::Cow, 1..=2, 5..=9, 1);
    spawn(&maps[1], rng, &mut mobs, 1, Species::Guard, 1..=6, 1..=6, 2);
    mobs
}
