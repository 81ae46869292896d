//! Structural validation. The parser runs this on every parse; it exists
//! separately so programmatically built programs (mutation offspring) can be
//! checked against the same invariants.

use crate::dsl::ast::{LevelProgram, Region};
use crate::gridworld::{MAP_SIZE, NUM_FLOORS};

pub const MOB_CAP: u16 = 3;

/// Returns every violated invariant, in program field order (name, floor,
/// inventory, placements, mobs, mechanics, goal/completed).
pub fn validate(p: &LevelProgram) -> Vec<String> {
    let mut errors = Vec::new();

    if p.name.is_empty() {
        errors.push("level name must not be empty".to_string());
    }
    if usize::from(p.floor) >= NUM_FLOORS {
        errors.push(format!(
            "floor {} out of range [0, {})",
            p.floor, NUM_FLOORS
        ));
    }
    for (item, count) in &p.inventory_overrides {
        if *count > 9 {
            errors.push(format!(
                "inventory override {} = {count} exceeds the cap of 9",
                item.name()
            ));
        }
    }
    for (i, place) in p.placements.iter().enumerate() {
        match place.region {
            Region::At { row, col } => {
                if usize::from(row) >= MAP_SIZE || usize::from(col) >= MAP_SIZE {
                    errors.push(format!(
                        "placement {i}: cell ({row}, {col}) out of map bounds"
                    ));
                }
            }
            Region::Near { min, max, n } => {
                if min < 1 {
                    errors.push(format!("placement {i}: min_dist must be >= 1"));
                }
                if max < min {
                    errors.push(format!("placement {i}: max_dist {max} < min_dist {min}"));
                }
                if n < 1 {
                    errors.push(format!("placement {i}: n must be >= 1"));
                }
            }
        }
        if place.on_blocks.is_empty() {
            errors.push(format!("placement {i}: empty substrate set"));
        }
    }
    for (i, mob) in p.mob_placements.iter().enumerate() {
        if mob.count < 1 || mob.count > MOB_CAP {
            errors.push(format!(
                "mob placement {i}: count {} outside [1, {MOB_CAP}]",
                mob.count
            ));
        }
        if mob.min < 1 {
            errors.push(format!("mob placement {i}: min_dist must be >= 1"));
        }
        if mob.max < mob.min {
            errors.push(format!(
                "mob placement {i}: max_dist {} < min_dist {}",
                mob.max, mob.min
            ));
        }
    }
    let m = &p.mechanics;
    for (field, value) in [
        ("melee_spawn_multiplier", m.melee_spawn_multiplier),
        ("passive_spawn_multiplier", m.passive_spawn_multiplier),
        ("mob_damage_multiplier", m.mob_damage_multiplier),
        ("needs_depletion_multiplier", m.needs_depletion_multiplier),
    ] {
        if !(value >= 0.0) || !value.is_finite() {
            errors.push(format!("mechanics {field} must be finite and >= 0, got {value}"));
        }
    }
    if p.goal.is_empty() {
        errors.push("goal must not be empty".to_string());
    }
    if !p.goal.intersect(p.completed).is_empty() {
        let overlap: Vec<_> = p
            .goal
            .intersect(p.completed)
            .iter()
            .map(|a| a.name())
            .collect();
        errors.push(format!(
            "goal and completed overlap: {}",
            overlap.join(", ")
        ));
    }
    errors
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::ast::{MobSpec, PlacementSpec};
    use crate::registry::{AchSet, Achievement, Block, MobKind};

    #[test]
    fn valid_minimal_program_passes() {
        let p = LevelProgram::minimal("t", AchSet::single(Achievement::CollectWood));
        assert!(validate(&p).is_empty());
    }

    #[test]
    fn goal_completed_overlap_is_one_error() {
        let mut p = LevelProgram::minimal("t", AchSet::single(Achievement::CollectWood));
        p.completed = AchSet::single(Achievement::CollectWood);
        assert_eq!(validate(&p).len(), 1);
    }

    #[test]
    fn mob_cap_and_region_checked() {
        let mut p = LevelProgram::minimal("t", AchSet::single(Achievement::CollectWood));
        p.mob_placements.push(MobSpec {
            kind: MobKind::Melee,
            count: 4,
            min: 5,
            max: 3,
        });
        let errors = validate(&p);
        assert_eq!(errors.len(), 2, "{errors:?}");
    }

    #[test]
    fn out_of_bounds_exact_cell_rejected() {
        let mut p = LevelProgram::minimal("t", AchSet::single(Achievement::CollectWood));
        p.placements.push(PlacementSpec {
            block: Block::Coal,
            region: Region::At { row: 12, col: 0 },
            on_blocks: vec![Block::Grass],
        });
        assert_eq!(validate(&p).len(), 1);
    }

    #[test]
    fn bad_floor_rejected() {
        let mut p = LevelProgram::minimal("t", AchSet::single(Achievement::CollectWood));
        p.floor = 2;
        assert_eq!(validate(&p).len(), 1);
    }
}
