//! Step mechanics. Invalid actions are no-ops that still consume the
//! timestep; achievements only ever flip from false to true.

use rand::Rng;

use crate::gridworld::state::{Facing, Mob, Species, StepOutcome, WorldState};
use crate::gridworld::{
    manhattan, reward, CHASE_TRIGGER_DIST, FIST_DMG, HUNGER_PER_HEALTH, MAX_HEALTH,
    MELEE_SPAWN_PROB, MOB_ATTACK_COOLDOWN, MOB_CAP_PER_KIND, PASSIVE_SPAWN_PROB, REGEN_CALM_STEPS,
    REGEN_INTERVAL, SPAWN_MIN_DIST, SWORD_DMG,
};
use crate::registry::{Achievement, Action, Block, Item, MobKind};

impl WorldState {
    /// Advance one timestep. Callers must not step a finished episode.
    pub fn step(&mut self, action: Action) -> StepOutcome {
        debug_assert!(!self.done_native(), "step on finished episode");
        let before = self.achievements;

        match action {
            Action::Up => self.walk(Facing::Up),
            Action::Down => self.walk(Facing::Down),
            Action::Left => self.walk(Facing::Left),
            Action::Right => self.walk(Facing::Right),
            Action::Interact => self.interact(),
            Action::PlaceTable => self.place(Block::Table, Item::Wood, Some(Achievement::PlaceTable)),
            Action::PlaceFurnace => self.place(Block::Furnace, Item::Stone, None),
            Action::MakeWoodPickaxe => self.craft_wood_pickaxe(),
            Action::MakeStonePickaxe => self.craft_stone_pickaxe(),
            Action::MakeIronSword => self.craft_iron_sword(),
            Action::Descend => self.descend(),
            Action::Noop => {}
        }

        self.update_mobs();
        self.spawn_mobs();
        self.apply_needs();
        self.timestep += 1;

        let newly = self.achievements.difference(before);
        StepOutcome {
            native_reward: reward::native_reward_of(newly),
            newly_unlocked: newly,
            done_native: self.done_native(),
        }
    }

    fn unlock(&mut self, a: Achievement) {
        self.achievements.insert(a);
    }

    fn player_damage(&self) -> i16 {
        if self.item(Item::Sword) >= 1 {
            SWORD_DMG
        } else {
            FIST_DMG
        }
    }

    fn gain(&mut self, item: Item) {
        let slot = &mut self.inventory[item.index()];
        *slot = (*slot + 1).min(9);
    }

    fn spend(&mut self, item: Item, n: u16) -> bool {
        let slot = &mut self.inventory[item.index()];
        if *slot >= n {
            *slot -= n;
            true
        } else {
            false
        }
    }

    fn collect_achievement(item: Item) -> Option<Achievement> {
        match item {
            Item::Wood => Some(Achievement::CollectWood),
            Item::Stone => Some(Achievement::CollectStone),
            Item::Coal => Some(Achievement::CollectCoal),
            Item::Iron => Some(Achievement::CollectIron),
            _ => None,
        }
    }

    fn try_harvest(&mut self, row: u8, col: u8) -> bool {
        let block = self.block_at(self.player_floor, row, col);
        let Some((item, tier)) = block.harvest() else {
            return false;
        };
        if self.item(Item::Pickaxe) < tier {
            return false;
        }
        self.set_block(self.player_floor, row, col, Block::Grass);
        self.gain(item);
        if let Some(a) = Self::collect_achievement(item) {
            self.unlock(a);
        }
        true
    }

    /// Move, turning to face the direction regardless. Walking into a
    /// harvestable block mines it (the player stays put); anything else
    /// solid just blocks.
    fn walk(&mut self, dir: Facing) {
        self.facing = dir;
        let (dr, dc) = dir.delta();
        let nr = i16::from(self.player_row) + dr;
        let nc = i16::from(self.player_col) + dc;
        if !Self::in_bounds(nr, nc) {
            return;
        }
        let (nr, nc) = (nr as u8, nc as u8);
        if self.mob_at(self.player_floor, nr, nc).is_some() {
            return;
        }
        let block = self.block_at(self.player_floor, nr, nc);
        if block.walkable() {
            self.player_row = nr;
            self.player_col = nc;
        } else {
            self.try_harvest(nr, nc);
        }
    }

    /// Attack an adjacent mob (facing cell first, then N/E/S/W order);
    /// otherwise harvest the faced block.
    fn interact(&mut self) {
        if let Some(mi) = self.adjacent_mob() {
            let dmg = self.player_damage();
            let mob = &mut self.mobs[mi];
            mob.hp -= dmg;
            if mob.hp <= 0 {
                let species = mob.species;
                let floor = mob.floor;
                self.mobs.remove(mi);
                if species.hostile() {
                    self.monsters_killed[usize::from(floor)] += 1;
                    if species == Species::Guard {
                        self.unlock(Achievement::DefeatGuard);
                    }
                }
            }
            return;
        }
        let (dr, dc) = self.facing.delta();
        let nr = i16::from(self.player_row) + dr;
        let nc = i16::from(self.player_col) + dc;
        if Self::in_bounds(nr, nc) {
            self.try_harvest(nr as u8, nc as u8);
        }
    }

    fn adjacent_mob(&self) -> Option<usize> {
        let (fr, fc) = self.facing.delta();
        let mut candidates = vec![(fr, fc)];
        for d in [(-1, 0), (0, 1), (1, 0), (0, -1)] {
            if d != (fr, fc) {
                candidates.push(d);
            }
        }
        for (dr, dc) in candidates {
            let nr = i16::from(self.player_row) + dr;
            let nc = i16::from(self.player_col) + dc;
            if !Self::in_bounds(nr, nc) {
                continue;
            }
            if let Some(mi) = self.mob_at(self.player_floor, nr as u8, nc as u8) {
                return Some(mi);
            }
        }
        None
    }

    /// Put a block down, consuming one unit of material. Tries the faced
    /// cell first, then any adjacent grass cell.
    fn place(&mut self, block: Block, material: Item, ach: Option<Achievement>) {
        if self.item(material) < 1 {
            return;
        }
        let (fr, fc) = self.facing.delta();
        let mut candidates = vec![(fr, fc)];
        for d in [(-1, 0), (0, 1), (1, 0), (0, -1)] {
            if d != (fr, fc) {
                candidates.push(d);
            }
        }
        for (dr, dc) in candidates {
            let nr = i16::from(self.player_row) + dr;
            let nc = i16::from(self.player_col) + dc;
            if !Self::in_bounds(nr, nc) {
                continue;
            }
            let (nr, nc) = (nr as u8, nc as u8);
            if self.block_at(self.player_floor, nr, nc) == Block::Grass
                && self.mob_at(self.player_floor, nr, nc).is_none()
            {
                self.spend(material, 1);
                self.set_block(self.player_floor, nr, nc, block);
                if let Some(a) = ach {
                    self.unlock(a);
                }
                return;
            }
        }
    }

    fn near_station(&self, station: Block) -> bool {
        for dr in -1i16..=1 {
            for dc in -1i16..=1 {
                let nr = i16::from(self.player_row) + dr;
                let nc = i16::from(self.player_col) + dc;
                if Self::in_bounds(nr, nc)
                    && self.block_at(self.player_floor, nr as u8, nc as u8) == station
                {
                    return true;
                }
            }
        }
        false
    }

    fn craft_wood_pickaxe(&mut self) {
        if self.near_station(Block::Table) && self.item(Item::Pickaxe) < 1 && self.spend(Item::Wood, 1)
        {
            self.inventory[Item::Pickaxe.index()] = 1;
            self.unlock(Achievement::MakeWoodPickaxe);
        }
    }

    fn craft_stone_pickaxe(&mut self) {
        if self.near_station(Block::Table)
            && self.item(Item::Pickaxe) < 2
            && self.item(Item::Wood) >= 1
            && self.item(Item::Stone) >= 1
        {
            self.spend(Item::Wood, 1);
            self.spend(Item::Stone, 1);
            self.inventory[Item::Pickaxe.index()] = 2;
            self.unlock(Achievement::MakeStonePickaxe);
        }
    }

    fn craft_iron_sword(&mut self) {
        if self.near_station(Block::Table)
            && self.near_station(Block::Furnace)
            && self.item(Item::Sword) < 1
            && self.item(Item::Wood) >= 1
            && self.item(Item::Coal) >= 1
            && self.item(Item::Iron) >= 1
        {
            self.spend(Item::Wood, 1);
            self.spend(Item::Coal, 1);
            self.spend(Item::Iron, 1);
            self.inventory[Item::Sword.index()] = 1;
            self.unlock(Achievement::MakeIronSword);
        }
    }

    fn descend(&mut self) {
        let on_ladder = self.block_at(self.player_floor, self.player_row, self.player_col)
            == Block::Ladder;
        let cleared = self.monsters_killed[usize::from(self.player_floor)]
            >= self.mechanics.monsters_killed_to_clear;
        if !on_ladder || !cleared || usize::from(self.player_floor) + 1 >= crate::gridworld::NUM_FLOORS
        {
            return;
        }
        self.player_floor += 1;
        let (lr, lc) = crate::gridworld::LANDING_POS;
        if let Some(mi) = self.mob_at(self.player_floor, lr, lc) {
            self.displace_mob(mi);
        }
        self.player_row = lr;
        self.player_col = lc;
        self.unlock(Achievement::DescendFloor);
    }

    fn displace_mob(&mut self, mi: usize) {
        let floor = self.mobs[mi].floor;
        for r in 0..crate::gridworld::MAP_SIZE as u8 {
            for c in 0..crate::gridworld::MAP_SIZE as u8 {
                if self.block_at(floor, r, c).walkable()
                    && self.mob_at(floor, r, c).is_none()
                    && (r, c) != crate::gridworld::LANDING_POS
                {
                    self.mobs[mi].row = r;
                    self.mobs[mi].col = c;
                    return;
                }
            }
        }
        self.mobs.remove(mi);
    }

    fn mob_cell_free(&self, floor: u8, row: i16, col: i16) -> bool {
        if !Self::in_bounds(row, col) {
            return false;
        }
        let (row, col) = (row as u8, col as u8);
        self.block_at(floor, row, col).walkable()
            && self.mob_at(floor, row, col).is_none()
            && !(floor == self.player_floor && (row, col) == self.player_cell())
    }

    /// Mobs on the player's floor act in list order: adjacent hostiles swing
    /// (on cooldown), triggered hostiles chase, everything else wanders.
    fn update_mobs(&mut self) {
        let floor = self.player_floor;
        let mut i = 0;
        while i < self.mobs.len() {
            if self.mobs[i].floor != floor {
                i += 1;
                continue;
            }
            if self.mobs[i].cooldown > 0 {
                self.mobs[i].cooldown -= 1;
            }
            let dist = self.distance_to_player(&self.mobs[i]);
            let species = self.mobs[i].species;
            if species.hostile() && dist == 1 {
                if self.mobs[i].cooldown == 0 {
                    let dmg =
                        (species.base_damage() * self.mechanics.mob_damage_multiplier).round();
                    self.hurt_player(dmg.max(0.0) as i16);
                    self.mobs[i].cooldown = MOB_ATTACK_COOLDOWN;
                }
                i += 1;
                continue;
            }
            let chase = species.hostile()
                && dist <= CHASE_TRIGGER_DIST
                && self.rng.gen::<f64>() < 0.75;
            let step = if chase {
                self.chase_step(i)
            } else if self.rng.gen::<f64>() < 0.5 {
                let dirs = [(-1i16, 0i16), (1, 0), (0, -1), (0, 1)];
                Some(dirs[self.rng.gen_range(0..4)])
            } else {
                None
            };
            if let Some((dr, dc)) = step {
                let nr = i16::from(self.mobs[i].row) + dr;
                let nc = i16::from(self.mobs[i].col) + dc;
                if self.mob_cell_free(floor, nr, nc) {
                    self.mobs[i].row = nr as u8;
                    self.mobs[i].col = nc as u8;
                }
            }
            i += 1;
        }
    }

    /// Step along the axis with the larger gap to the player, falling back
    /// to the other axis when blocked.
    fn chase_step(&mut self, mi: usize) -> Option<(i16, i16)> {
        let mob = &self.mobs[mi];
        let dr = i16::from(self.player_row) - i16::from(mob.row);
        let dc = i16::from(self.player_col) - i16::from(mob.col);
        let row_step = (dr.signum(), 0);
        let col_step = (0, dc.signum());
        let (first, second) = if dr.abs() >= dc.abs() {
            (row_step, col_step)
        } else {
            (col_step, row_step)
        };
        let (mr, mc) = (i16::from(mob.row), i16::from(mob.col));
        let floor = mob.floor;
        for step in [first, second] {
            if step == (0, 0) {
                continue;
            }
            if self.mob_cell_free(floor, mr + step.0, mc + step.1) {
                return Some(step);
            }
        }
        None
    }

    fn hurt_player(&mut self, dmg: i16) {
        if dmg <= 0 {
            return;
        }
        self.health -= dmg;
        self.last_damage_step = i64::from(self.timestep);
    }

    fn spawn_mobs(&mut self) {
        let floor = self.player_floor;
        let melee_p =
            (MELEE_SPAWN_PROB * self.mechanics.melee_spawn_multiplier).clamp(0.0, 1.0);
        let passive_p =
            (PASSIVE_SPAWN_PROB * self.mechanics.passive_spawn_multiplier).clamp(0.0, 1.0);
        let spawn_melee = self.rng.gen::<f64>() < melee_p;
        let spawn_passive = self.rng.gen::<f64>() < passive_p;
        if spawn_melee && self.live_mobs_of_kind(floor, MobKind::Melee) < MOB_CAP_PER_KIND {
            self.spawn_one(Species::for_floor(MobKind::Melee, floor));
        }
        if spawn_passive && self.live_mobs_of_kind(floor, MobKind::Passive) < MOB_CAP_PER_KIND {
            self.spawn_one(Species::Cow);
        }
    }

    fn spawn_one(&mut self, species: Species) {
        let floor = self.player_floor;
        let mut cells = Vec::new();
        for r in 0..crate::gridworld::MAP_SIZE as u8 {
            for c in 0..crate::gridworld::MAP_SIZE as u8 {
                if manhattan((r, c), self.player_cell()) >= SPAWN_MIN_DIST
                    && self.block_at(floor, r, c).walkable()
                    && self.mob_at(floor, r, c).is_none()
                {
                    cells.push((r, c));
                }
            }
        }
        if cells.is_empty() {
            return;
        }
        let (row, col) = cells[self.rng.gen_range(0..cells.len())];
        self.mobs.push(Mob {
            species,
            floor,
            row,
            col,
            hp: species.max_hp(),
            cooldown: 0,
        });
    }

    fn apply_needs(&mut self) {
        self.hunger += self.mechanics.needs_depletion_multiplier;
        while self.hunger >= HUNGER_PER_HEALTH {
            self.hunger -= HUNGER_PER_HEALTH;
            self.hurt_player(1);
        }
        let t = self.timestep;
        if t > 0
            && t % REGEN_INTERVAL == 0
            && i64::from(t) - self.last_damage_step >= i64::from(REGEN_CALM_STEPS)
            && self.health > 0
            && self.health < MAX_HEALTH
        {
            self.health += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::{compile, LevelProgram, MechanicsParams};
    use crate::gridworld::LADDER_POS;
    use crate::registry::AchSet;

    fn fresh(seed: u64) -> WorldState {
        compile(&LevelProgram::target(), seed).unwrap()
    }

    /// Drop the player next to a block for focused mechanics tests.
    fn put_player(s: &mut WorldState, row: u8, col: u8, facing: Facing) {
        s.set_block(s.player_floor, row, col, Block::Grass);
        if let Some(mi) = s.mob_at(s.player_floor, row, col) {
            s.mobs.remove(mi);
        }
        s.player_row = row;
        s.player_col = col;
        s.facing = facing;
    }

    fn quiet(s: &mut WorldState) {
        s.mobs.clear();
        s.mechanics.melee_spawn_multiplier = 0.0;
        s.mechanics.passive_spawn_multiplier = 0.0;
    }

    #[test]
    fn interact_facing_tree_collects_wood() {
        let mut s = fresh(3);
        quiet(&mut s);
        put_player(&mut s, 5, 5, Facing::Left);
        s.set_block(0, 5, 4, Block::Tree);
        let out = s.step(Action::Interact);
        assert_eq!(s.item(Item::Wood), 1);
        assert!(out.newly_unlocked.contains(Achievement::CollectWood));
        assert_eq!(out.native_reward, 1.0);
        assert_eq!(s.block_at(0, 5, 4), Block::Grass);
    }

    #[test]
    fn walking_into_a_tree_also_mines_it() {
        let mut s = fresh(3);
        quiet(&mut s);
        put_player(&mut s, 5, 5, Facing::Up);
        s.set_block(0, 5, 6, Block::Tree);
        s.step(Action::Right);
        assert_eq!(s.item(Item::Wood), 1);
        assert_eq!(s.player_cell(), (5, 5), "mining does not move the player");
        assert_eq!(s.facing, Facing::Right);
        s.step(Action::Right);
        assert_eq!(s.player_cell(), (5, 6), "cleared cell is walkable");
    }

    #[test]
    fn mining_stone_requires_pickaxe() {
        let mut s = fresh(3);
        quiet(&mut s);
        put_player(&mut s, 5, 5, Facing::Right);
        s.set_block(0, 5, 6, Block::Stone);
        s.step(Action::Interact);
        assert_eq!(s.item(Item::Stone), 0);
        s.inventory[Item::Pickaxe.index()] = 1;
        s.step(Action::Interact);
        assert_eq!(s.item(Item::Stone), 1);
        assert!(s.achievements.contains(Achievement::CollectStone));
    }

    #[test]
    fn iron_needs_stone_pickaxe() {
        let mut s = fresh(3);
        quiet(&mut s);
        put_player(&mut s, 5, 5, Facing::Right);
        s.set_block(0, 5, 6, Block::Iron);
        s.inventory[Item::Pickaxe.index()] = 1;
        s.step(Action::Interact);
        assert_eq!(s.item(Item::Iron), 0);
        s.inventory[Item::Pickaxe.index()] = 2;
        s.step(Action::Interact);
        assert_eq!(s.item(Item::Iron), 1);
    }

    #[test]
    fn craft_chain_with_stations() {
        let mut s = fresh(3);
        quiet(&mut s);
        put_player(&mut s, 5, 5, Facing::Right);
        s.inventory[Item::Wood.index()] = 4;
        s.inventory[Item::Stone.index()] = 2;
        s.inventory[Item::Coal.index()] = 1;
        s.inventory[Item::Iron.index()] = 1;

        s.step(Action::MakeWoodPickaxe);
        assert_eq!(s.item(Item::Pickaxe), 0, "no table nearby yet");

        s.step(Action::PlaceTable);
        assert_eq!(s.block_at(0, 5, 6), Block::Table);
        assert!(s.achievements.contains(Achievement::PlaceTable));
        assert_eq!(s.item(Item::Wood), 3);

        s.step(Action::MakeWoodPickaxe);
        assert_eq!(s.item(Item::Pickaxe), 1);
        assert_eq!(s.item(Item::Wood), 2);

        s.step(Action::MakeStonePickaxe);
        assert_eq!(s.item(Item::Pickaxe), 2);
        assert_eq!(s.item(Item::Stone), 1);

        s.step(Action::PlaceFurnace);
        assert_eq!(s.item(Item::Stone), 0);

        s.step(Action::MakeIronSword);
        assert_eq!(s.item(Item::Sword), 1);
        assert!(s.achievements.contains(Achievement::MakeIronSword));
        assert_eq!(s.item(Item::Coal), 0);
        assert_eq!(s.item(Item::Iron), 0);
    }

    #[test]
    fn pickaxe_tier_gate_blocks_recraft() {
        let mut s = fresh(3);
        quiet(&mut s);
        put_player(&mut s, 5, 5, Facing::Right);
        s.inventory[Item::Wood.index()] = 2;
        s.inventory[Item::Pickaxe.index()] = 2;
        s.step(Action::PlaceTable);
        s.step(Action::MakeWoodPickaxe);
        assert_eq!(s.item(Item::Wood), 1, "wood pickaxe craft rejected at tier 2");
        assert!(!s.achievements.contains(Achievement::MakeWoodPickaxe));
    }

    #[test]
    fn descend_needs_ladder_and_clear_count() {
        let mut s = fresh(3);
        quiet(&mut s);
        put_player(&mut s, LADDER_POS.0, LADDER_POS.1, Facing::Up);
        s.set_block(0, LADDER_POS.0, LADDER_POS.1, Block::Ladder);
        s.step(Action::Descend);
        assert_eq!(s.player_floor, 0, "not enough kills");
        s.monsters_killed[0] = 4;
        s.step(Action::Descend);
        assert_eq!(s.player_floor, 1);
        assert!(s.achievements.contains(Achievement::DescendFloor));
        assert_eq!(s.player_cell(), crate::gridworld::LANDING_POS);
    }

    #[test]
    fn descend_respects_mechanics_clear_count() {
        let mut s = fresh(3);
        quiet(&mut s);
        s.mechanics.monsters_killed_to_clear = 0;
        put_player(&mut s, LADDER_POS.0, LADDER_POS.1, Facing::Up);
        s.set_block(0, LADDER_POS.0, LADDER_POS.1, Block::Ladder);
        s.step(Action::Descend);
        assert_eq!(s.player_floor, 1);
    }

    #[test]
    fn interact_attacks_adjacent_zombie_and_counts_kill() {
        let mut s = fresh(3);
        quiet(&mut s);
        put_player(&mut s, 5, 5, Facing::Right);
        s.mobs.push(Mob {
            species: Species::Zombie,
            floor: 0,
            row: 5,
            col: 6,
            hp: Species::Zombie.max_hp(),
            cooldown: 3,
        });
        for _ in 0..3 {
            s.step(Action::Interact);
        }
        assert!(s.mobs.is_empty());
        assert_eq!(s.monsters_killed[0], 1);
    }

    #[test]
    fn guard_kill_unlocks_achievement() {
        let mut s = fresh(3);
        quiet(&mut s);
        s.player_floor = 1;
        put_player(&mut s, 5, 5, Facing::Right);
        s.inventory[Item::Sword.index()] = 1;
        s.mobs.push(Mob {
            species: Species::Guard,
            floor: 1,
            row: 5,
            col: 6,
            hp: Species::Guard.max_hp(),
            cooldown: 2,
        });
        s.step(Action::Interact);
        s.step(Action::Interact);
        assert!(s.achievements.contains(Achievement::DefeatGuard));
        assert_eq!(s.monsters_killed[1], 1);
    }

    #[test]
    fn cow_kills_do_not_count() {
        let mut s = fresh(3);
        quiet(&mut s);
        put_player(&mut s, 5, 5, Facing::Right);
        s.mobs.push(Mob {
            species: Species::Cow,
            floor: 0,
            row: 5,
            col: 6,
            hp: Species::Cow.max_hp(),
            cooldown: 0,
        });
        s.step(Action::Interact);
        s.step(Action::Interact);
        assert!(s.mobs.is_empty());
        assert_eq!(s.monsters_killed[0], 0);
    }

    #[test]
    fn adjacent_zombie_damages_player_on_cooldown() {
        let mut s = fresh(3);
        quiet(&mut s);
        put_player(&mut s, 5, 5, Facing::Up);
        s.mobs.push(Mob {
            species: Species::Zombie,
            floor: 0,
            row: 5,
            col: 6,
            hp: 100,
            cooldown: 0,
        });
        let h0 = s.health;
        s.step(Action::Noop);
        assert_eq!(s.health, h0 - 1);
        s.step(Action::Noop);
        assert_eq!(s.health, h0 - 1, "attack is on cooldown");
    }

    #[test]
    fn mob_damage_multiplier_scales_hits() {
        let mut s = fresh(3);
        quiet(&mut s);
        s.mechanics.mob_damage_multiplier = 0.0;
        put_player(&mut s, 5, 5, Facing::Up);
        s.mobs.push(Mob {
            species: Species::Zombie,
            floor: 0,
            row: 5,
            col: 6,
            hp: 100,
            cooldown: 0,
        });
        let h0 = s.health;
        s.step(Action::Noop);
        assert_eq!(s.health, h0, "zeroed damage multiplier");
    }

    #[test]
    fn invalid_actions_still_advance_time() {
        let mut s = fresh(3);
        quiet(&mut s);
        put_player(&mut s, 5, 5, Facing::Up);
        let t0 = s.timestep;
        s.step(Action::Descend);
        s.step(Action::MakeIronSword);
        s.step(Action::Noop);
        assert_eq!(s.timestep, t0 + 3);
        assert_eq!(s.player_floor, 0);
    }

    #[test]
    fn achievements_are_monotone() {
        let mut s = fresh(3);
        let mut seen = AchSet::EMPTY;
        let mut rng = crate::rngstream::stream(99, "fuzz", &[]);
        for _ in 0..s.max_timesteps - 1 {
            if s.done_native() {
                break;
            }
            let a = Action::from_index(rng.gen_range(0..Action::COUNT)).unwrap();
            s.step(a);
            assert!(seen.is_subset_of(s.achievements));
            seen = s.achievements;
        }
    }

    #[test]
    fn needs_drain_kills_idle_player_eventually() {
        let mut s = fresh(3);
        quiet(&mut s);
        s.mechanics.needs_depletion_multiplier = 8.0;
        s.max_timesteps = 400;
        let mut steps = 0;
        while !s.done_native() {
            s.step(Action::Noop);
            steps += 1;
        }
        assert!(s.health <= 0, "died of needs depletion");
        assert!(steps < 150, "took {steps}");
    }

    #[test]
    fn timeout_terminates_episode() {
        let mut s = fresh(3);
        quiet(&mut s);
        s.mechanics.needs_depletion_multiplier = 0.0;
        s.max_timesteps = 10;
        let mut out = s.step(Action::Noop);
        for _ in 0..9 {
            if out.done_native {
                break;
            }
            out = s.step(Action::Noop);
        }
        assert!(out.done_native);
        assert_eq!(s.timestep, 10);
        assert!(s.health > 0);
    }

    #[test]
    fn mechanics_default_mirrors_dsl_default() {
        let s = fresh(3);
        assert_eq!(s.mechanics, MechanicsParams::default());
    }
}
