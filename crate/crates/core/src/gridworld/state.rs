//! World state, observation encoding and the packed state key used by the
//! tabular learner.

use rand_chacha::ChaCha8Rng;

use crate::dsl::MechanicsParams;
use crate::gridworld::{manhattan, MAP_SIZE, NUM_FLOORS};
use crate::registry::{AchSet, Block, Item, MobKind};
use crate::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Facing {
    Up,
    Down,
    Left,
    Right,
}

impl Facing {
    pub fn delta(self) -> (i16, i16) {
        match self {
            Facing::Up => (-1, 0),
            Facing::Down => (1, 0),
            Facing::Left => (0, -1),
            Facing::Right => (0, 1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Species {
    Cow,
    Zombie,
    Guard,
}

impl Species {
    pub fn kind(self) -> MobKind {
        match self {
            Species::Cow => MobKind::Passive,
            Species::Zombie | Species::Guard => MobKind::Melee,
        }
    }

    pub fn hostile(self) -> bool {
        self.kind() == MobKind::Melee
    }

    /// Concrete species for a DSL mob kind on a floor.
    pub fn for_floor(kind: MobKind, floor: u8) -> Species {
        match kind {
            MobKind::Passive => Species::Cow,
            MobKind::Melee => {
                if floor == 0 {
                    Species::Zombie
                } else {
                    Species::Guard
                }
            }
        }
    }

    pub fn max_hp(self) -> i16 {
        match self {
            Species::Cow => crate::gridworld::COW_HP,
            Species::Zombie => crate::gridworld::ZOMBIE_HP,
            Species::Guard => crate::gridworld::GUARD_HP,
        }
    }

    pub fn base_damage(self) -> f64 {
        match self {
            Species::Cow => 0.0,
            Species::Zombie => crate::gridworld::ZOMBIE_DMG,
            Species::Guard => crate::gridworld::GUARD_DMG,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mob {
    pub species: Species,
    pub floor: u8,
    pub row: u8,
    pub col: u8,
    pub hp: i16,
    pub cooldown: u8,
}

/// Everything an episode touches. Cloneable and comparable so determinism
/// can be asserted bit for bit.
#[derive(Debug, Clone, PartialEq)]
pub struct WorldState {
    pub maps: [[Block; MAP_SIZE * MAP_SIZE]; NUM_FLOORS],
    pub player_floor: u8,
    pub player_row: u8,
    pub player_col: u8,
    pub facing: Facing,
    pub inventory: [u16; Item::COUNT],
    pub health: i16,
    pub mobs: Vec<Mob>,
    pub achievements: AchSet,
    pub initial_achievements: AchSet,
    pub mechanics: MechanicsParams,
    pub monsters_killed: [u16; NUM_FLOORS],
    pub timestep: u32,
    pub max_timesteps: u32,
    pub rng: ChaCha8Rng,
    pub(crate) hunger: f64,
    pub(crate) last_damage_step: i64,
}

/// What one env step reports back to the caller.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub native_reward: Real,
    pub newly_unlocked: AchSet,
    pub done_native: bool,
}

impl WorldState {
    pub fn block_at(&self, floor: u8, row: u8, col: u8) -> Block {
        self.maps[usize::from(floor)][usize::from(row) * MAP_SIZE + usize::from(col)]
    }

    pub fn set_block(&mut self, floor: u8, row: u8, col: u8, block: Block) {
        self.maps[usize::from(floor)][usize::from(row) * MAP_SIZE + usize::from(col)] = block;
    }

    pub fn in_bounds(row: i16, col: i16) -> bool {
        (0..MAP_SIZE as i16).contains(&row) && (0..MAP_SIZE as i16).contains(&col)
    }

    pub fn player_cell(&self) -> (u8, u8) {
        (self.player_row, self.player_col)
    }

    pub fn item(&self, item: Item) -> u16 {
        self.inventory[item.index()]
    }

    pub fn mob_at(&self, floor: u8, row: u8, col: u8) -> Option<usize> {
        self.mobs
            .iter()
            .position(|m| m.floor == floor && m.row == row && m.col == col)
    }

    pub fn live_mobs_of_kind(&self, floor: u8, kind: MobKind) -> usize {
        self.mobs
            .iter()
            .filter(|m| m.floor == floor && m.species.kind() == kind)
            .count()
    }

    pub fn done_native(&self) -> bool {
        self.health <= 0 || self.timestep >= self.max_timesteps
    }

    pub fn distance_to_player(&self, mob: &Mob) -> u16 {
        manhattan((mob.row, mob.col), self.player_cell())
    }

    /// Kill progress toward the current floor's clear requirement, saturated.
    pub fn clear_progress(&self) -> u16 {
        let killed = self.monsters_killed[usize::from(self.player_floor)];
        killed
            .min(self.mechanics.monsters_killed_to_clear)
            .min(7)
    }

    /// A hostile mob is in attack range, so Interact will strike it.
    pub fn hostile_adjacent(&self) -> bool {
        self.mobs.iter().any(|m| {
            m.floor == self.player_floor
                && m.species.hostile()
                && manhattan((m.row, m.col), self.player_cell()) == 1
        })
    }

    /// Packed tabular state: floor, player cell, inventory clamped to 0..3
    /// per item, achievement bits, saturated kill progress and a threat
    /// flag for a hostile in attack range. Deliberately blind to the map
    /// layout so entries transfer across layout draws; without the threat
    /// flag the same blindness would extend to chasing mobs, and a policy
    /// that cannot see an attacker can neither fight back nor explain the
    /// damage, which turns every route estimate into noise.
    pub fn state_key(&self) -> u64 {
        let mut key: u64 = u64::from(self.player_floor & 1);
        key = (key << 4) | u64::from(self.player_row & 0xf);
        key = (key << 4) | u64::from(self.player_col & 0xf);
        for item in Item::ALL {
            let clamped = self.inventory[item.index()].min(3) as u64;
            key = (key << 2) | clamped;
        }
        key = (key << 16) | u64::from(self.achievements.0);
        key = (key << 3) | u64::from(self.clear_progress().min(7));
        key = (key << 1) | u64::from(self.hostile_adjacent());
        key
    }
}

/// Flat observation: the current floor's map with a mob overlay, inventory,
/// health and the goal multi-hot.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub values: Vec<f32>,
}

impl Observation {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn goal_bits(&self) -> &[f32] {
        &self.values[self.values.len() - crate::registry::Achievement::COUNT..]
    }
}

pub fn encode_observation(s: &WorldState, goal: AchSet) -> Observation {
    let mut values = Vec::with_capacity(MAP_SIZE * MAP_SIZE + Item::COUNT + 1 + 10);
    let floor = usize::from(s.player_floor);
    for (i, block) in s.maps[floor].iter().enumerate() {
        let row = (i / MAP_SIZE) as u8;
        let col = (i % MAP_SIZE) as u8;
        let mut code = *block as u8 as f32;
        if s.mob_at(s.player_floor, row, col).is_some() {
            code += 16.0;
        }
        values.push(code);
    }
    for item in Item::ALL {
        values.push(f32::from(s.inventory[item.index()].min(9)));
    }
    values.push(s.health.max(0) as f32);
    for a in crate::registry::Achievement::ALL {
        values.push(if goal.contains(a) { 1.0 } else { 0.0 });
    }
    Observation { values }
}
