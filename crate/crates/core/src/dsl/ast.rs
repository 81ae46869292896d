//! Program structure produced by the parser and consumed by the compiler,
//! the serializer and the mutation engine.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::registry::{AchSet, Block, Item, MobKind};

/// Where a placement lands: one exact cell, or `n` cells drawn from a
/// Manhattan annulus around the player start.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Region {
    At { row: u8, col: u8 },
    Near { min: u16, max: u16, n: u16 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacementSpec {
    pub block: Block,
    pub region: Region,
    /// Substrate the placement may overwrite. Not expressible in the grammar;
    /// always the default ({GRASS}) for parsed programs.
    pub on_blocks: Vec<Block>,
}

impl PlacementSpec {
    pub fn near(block: Block, min: u16, max: u16, n: u16) -> PlacementSpec {
        PlacementSpec {
            block,
            region: Region::Near { min, max, n },
            on_blocks: vec![Block::Grass],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MobSpec {
    pub kind: MobKind,
    pub count: u16,
    /// Annulus the mobs are drawn in. Its `n` repeats the count by grammar;
    /// the two must agree.
    pub min: u16,
    pub max: u16,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MechanicsParams {
    pub melee_spawn_multiplier: f64,
    pub passive_spawn_multiplier: f64,
    pub mob_damage_multiplier: f64,
    pub needs_depletion_multiplier: f64,
    pub monsters_killed_to_clear: u16,
}

impl Default for MechanicsParams {
    fn default() -> MechanicsParams {
        MechanicsParams {
            melee_spawn_multiplier: 1.0,
            passive_spawn_multiplier: 1.0,
            mob_damage_multiplier: 1.0,
            needs_depletion_multiplier: 1.0,
            monsters_killed_to_clear: 4,
        }
    }
}

pub const MECHANICS_FIELDS: [&str; 5] = [
    "melee_spawn_multiplier",
    "passive_spawn_multiplier",
    "mob_damage_multiplier",
    "needs_depletion_multiplier",
    "monsters_killed_to_clear",
];

impl MechanicsParams {
    pub fn get(&self, field: &str) -> Option<f64> {
        match field {
            "melee_spawn_multiplier" => Some(self.melee_spawn_multiplier),
            "passive_spawn_multiplier" => Some(self.passive_spawn_multiplier),
            "mob_damage_multiplier" => Some(self.mob_damage_multiplier),
            "needs_depletion_multiplier" => Some(self.needs_depletion_multiplier),
            "monsters_killed_to_clear" => Some(f64::from(self.monsters_killed_to_clear)),
            _ => None,
        }
    }

    pub fn set(&mut self, field: &str, value: f64) -> bool {
        match field {
            "melee_spawn_multiplier" => self.melee_spawn_multiplier = value,
            "passive_spawn_multiplier" => self.passive_spawn_multiplier = value,
            "mob_damage_multiplier" => self.mob_damage_multiplier = value,
            "needs_depletion_multiplier" => self.needs_depletion_multiplier = value,
            "monsters_killed_to_clear" => self.monsters_killed_to_clear = value as u16,
            _ => return false,
        }
        true
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LevelProgram {
    pub name: String,
    pub floor: u8,
    pub inventory_overrides: BTreeMap<Item, u16>,
    pub placements: Vec<PlacementSpec>,
    pub mob_placements: Vec<MobSpec>,
    pub mechanics: MechanicsParams,
    pub goal: AchSet,
    pub completed: AchSet,
    /// Verbatim text the program was parsed from (canonical text if the
    /// program was built programmatically and serialized).
    pub source_text: String,
}

impl LevelProgram {
    /// Minimal program: default everything, the given goal.
    pub fn minimal(name: &str, goal: AchSet) -> LevelProgram {
        LevelProgram {
            name: name.to_string(),
            floor: 0,
            inventory_overrides: BTreeMap::new(),
            placements: Vec::new(),
            mob_placements: Vec::new(),
            mechanics: MechanicsParams::default(),
            goal,
            completed: AchSet::EMPTY,
            source_text: String::new(),
        }
    }

    /// The target task: no overrides, the full achievement set as goal.
    pub fn target() -> LevelProgram {
        let mut p = LevelProgram::minimal("target", AchSet::full());
        p.source_text = crate::dsl::serialize(&p);
        p
    }

    /// Field-wise equality ignoring `source_text`; the round-trip guarantee
    /// is about structure, not the bytes the program came from.
    pub fn structurally_eq(&self, other: &LevelProgram) -> bool {
        self.name == other.name
            && self.floor == other.floor
            && self.inventory_overrides == other.inventory_overrides
            && self.placements == other.placements
            && self.mob_placements == other.mob_placements
            && self.mechanics == other.mechanics
            && self.goal == other.goal
            && self.completed == other.completed
    }
}
