//! Shared vocabulary: achievements, blocks, inventory items, mob kinds and
//! actions. Registry order is load-bearing; goal sets serialize in it and the
//! mutation engine appends achievements along it.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[repr(u8)]
pub enum Achievement {
    CollectWood = 0,
    PlaceTable = 1,
    MakeWoodPickaxe = 2,
    CollectStone = 3,
    MakeStonePickaxe = 4,
    CollectCoal = 5,
    CollectIron = 6,
    MakeIronSword = 7,
    DescendFloor = 8,
    DefeatGuard = 9,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tier {
    Basic,
    Deep,
}

impl Achievement {
    pub const COUNT: usize = 10;

    pub const ALL: [Achievement; Achievement::COUNT] = [
        Achievement::CollectWood,
        Achievement::PlaceTable,
        Achievement::MakeWoodPickaxe,
        Achievement::CollectStone,
        Achievement::MakeStonePickaxe,
        Achievement::CollectCoal,
        Achievement::CollectIron,
        Achievement::MakeIronSword,
        Achievement::DescendFloor,
        Achievement::DefeatGuard,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Achievement> {
        Achievement::ALL.get(i).copied()
    }

    /// DSL / export identifier.
    pub fn name(self) -> &'static str {
        match self {
            Achievement::CollectWood => "COLLECT_WOOD",
            Achievement::PlaceTable => "PLACE_TABLE",
            Achievement::MakeWoodPickaxe => "MAKE_WOOD_PICKAXE",
            Achievement::CollectStone => "COLLECT_STONE",
            Achievement::MakeStonePickaxe => "MAKE_STONE_PICKAXE",
            Achievement::CollectCoal => "COLLECT_COAL",
            Achievement::CollectIron => "COLLECT_IRON",
            Achievement::MakeIronSword => "MAKE_IRON_SWORD",
            Achievement::DescendFloor => "DESCEND_FLOOR",
            Achievement::DefeatGuard => "DEFEAT_GUARD",
        }
    }

    pub fn from_name(s: &str) -> Option<Achievement> {
        Achievement::ALL.iter().copied().find(|a| a.name() == s)
    }

    pub fn reward(self) -> crate::Real {
        match self.tier() {
            Tier::Basic => 1.0,
            Tier::Deep => {
                if self == Achievement::DefeatGuard {
                    5.0
                } else {
                    3.0
                }
            }
        }
    }

    pub fn tier(self) -> Tier {
        match self {
            Achievement::MakeIronSword | Achievement::DescendFloor | Achievement::DefeatGuard => {
                Tier::Deep
            }
            _ => Tier::Basic,
        }
    }
}

/// Bitmask over the achievement registry. Bit i corresponds to
/// `Achievement::ALL[i]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct AchSet(pub u16);

impl AchSet {
    pub const EMPTY: AchSet = AchSet(0);

    pub fn full() -> AchSet {
        AchSet((1u16 << Achievement::COUNT) - 1)
    }

    pub fn single(a: Achievement) -> AchSet {
        AchSet(1u16 << a.index())
    }

    pub fn contains(self, a: Achievement) -> bool {
        self.0 & (1u16 << a.index()) != 0
    }

    pub fn insert(&mut self, a: Achievement) {
        self.0 |= 1u16 << a.index();
    }

    pub fn remove(&mut self, a: Achievement) {
        self.0 &= !(1u16 << a.index());
    }

    pub fn union(self, other: AchSet) -> AchSet {
        AchSet(self.0 | other.0)
    }

    pub fn intersect(self, other: AchSet) -> AchSet {
        AchSet(self.0 & other.0)
    }

    pub fn difference(self, other: AchSet) -> AchSet {
        AchSet(self.0 & !other.0)
    }

    pub fn is_subset_of(self, other: AchSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    /// Members in registry order.
    pub fn iter(self) -> impl Iterator<Item = Achievement> {
        Achievement::ALL.into_iter().filter(move |a| self.contains(*a))
    }

    pub fn from_iter<I: IntoIterator<Item = Achievement>>(it: I) -> AchSet {
        let mut s = AchSet::EMPTY;
        for a in it {
            s.insert(a);
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[repr(u8)]
pub enum Block {
    Grass = 0,
    Tree = 1,
    Stone = 2,
    Coal = 3,
    Iron = 4,
    Table = 5,
    Furnace = 6,
    Ladder = 7,
    Wall = 8,
    Water = 9,
}

impl Block {
    pub const ALL: [Block; 10] = [
        Block::Grass,
        Block::Tree,
        Block::Stone,
        Block::Coal,
        Block::Iron,
        Block::Table,
        Block::Furnace,
        Block::Ladder,
        Block::Wall,
        Block::Water,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Block::Grass => "GRASS",
            Block::Tree => "TREE",
            Block::Stone => "STONE",
            Block::Coal => "COAL",
            Block::Iron => "IRON",
            Block::Table => "TABLE",
            Block::Furnace => "FURNACE",
            Block::Ladder => "LADDER",
            Block::Wall => "WALL",
            Block::Water => "WATER",
        }
    }

    pub fn from_name(s: &str) -> Option<Block> {
        Block::ALL.iter().copied().find(|b| b.name() == s)
    }

    pub fn walkable(self) -> bool {
        matches!(self, Block::Grass | Block::Ladder)
    }

    /// Pickaxe tier needed to harvest, if harvestable at all.
    pub fn harvest(self) -> Option<(Item, u16)> {
        match self {
            Block::Tree => Some((Item::Wood, 0)),
            Block::Stone => Some((Item::Stone, 1)),
            Block::Coal => Some((Item::Coal, 1)),
            Block::Iron => Some((Item::Iron, 2)),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[repr(u8)]
pub enum Item {
    Wood = 0,
    Stone = 1,
    Coal = 2,
    Iron = 3,
    Pickaxe = 4,
    Sword = 5,
}

impl Item {
    pub const COUNT: usize = 6;

    pub const ALL: [Item; Item::COUNT] = [
        Item::Wood,
        Item::Stone,
        Item::Coal,
        Item::Iron,
        Item::Pickaxe,
        Item::Sword,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Item::Wood => "wood",
            Item::Stone => "stone",
            Item::Coal => "coal",
            Item::Iron => "iron",
            Item::Pickaxe => "pickaxe",
            Item::Sword => "sword",
        }
    }

    pub fn from_name(s: &str) -> Option<Item> {
        Item::ALL.iter().copied().find(|i| i.name() == s)
    }
}

/// DSL-level mob classification. The concrete species depends on the floor:
/// melee is ZOMBIE on floor 0 and GUARD on floor 1; passive is COW on both.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MobKind {
    Passive,
    Melee,
}

impl MobKind {
    pub fn name(self) -> &'static str {
        match self {
            MobKind::Passive => "passive",
            MobKind::Melee => "melee",
        }
    }

    pub fn from_name(s: &str) -> Option<MobKind> {
        match s {
            "passive" => Some(MobKind::Passive),
            "melee" => Some(MobKind::Melee),
            _ => None,
        }
    }
}

/// Player actions. Invalid actions are no-ops that still consume the timestep.
/// Movement comes first so that value ties at unvisited states resolve to
/// walking rather than spinning on a craft action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[repr(u8)]
pub enum Action {
    Up = 0,
    Down = 1,
    Left = 2,
    Right = 3,
    Interact = 4,
    PlaceTable = 5,
    PlaceFurnace = 6,
    MakeWoodPickaxe = 7,
    MakeStonePickaxe = 8,
    MakeIronSword = 9,
    Descend = 10,
    Noop = 11,
}

impl Action {
    pub const COUNT: usize = 12;

    pub const ALL: [Action; Action::COUNT] = [
        Action::Up,
        Action::Down,
        Action::Left,
        Action::Right,
        Action::Interact,
        Action::PlaceTable,
        Action::PlaceFurnace,
        Action::MakeWoodPickaxe,
        Action::MakeStonePickaxe,
        Action::MakeIronSword,
        Action::Descend,
        Action::Noop,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Action> {
        Action::ALL.get(i).copied()
    }
}

/// One row of the exported `achievements.json`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegistryEntry {
    pub id: String,
    pub reward: crate::Real,
    pub tier: Tier,
}

/// The registry as a serializable table, the single source of truth shared by
/// the CLI and the tests.
pub fn registry_dump() -> Vec<RegistryEntry> {
    Achievement::ALL
        .iter()
        .map(|a| RegistryEntry {
            id: a.name().to_string(),
            reward: a.reward(),
            tier: a.tier(),
        })
        .collect()
}
