//! Static prompt sections for the generation phases. The deterministic
//! mutation backend ignores the prose; the remote backend sends it verbatim.

/// Domain context for the description phase: what the world is and what the
/// achievement chain looks like.
pub const DOMAIN_CONTEXT_DESCRIPTION: &str = "\
You design training levels for an agent in a 12x12 two-floor crafting world.
Floor 0 has a forest band in the west, a rock band (stone, coal, iron) in the
east, a lake, a ladder down at (9,9) and zombies. Floor 1 has sparser
resources and guards. The achievement chain, in order, is: COLLECT_WOOD,
PLACE_TABLE, MAKE_WOOD_PICKAXE, COLLECT_STONE, MAKE_STONE_PICKAXE,
COLLECT_COAL, COLLECT_IRON, MAKE_IRON_SWORD, DESCEND_FLOOR, DEFEAT_GUARD.
Stone needs a wood pickaxe, iron needs a stone pickaxe, the sword needs wood,
coal and iron next to a table and furnace, descending needs the ladder and
enough monster kills, and guards live on floor 1.
A level overrides pieces of the target task: starting floor, starting
inventory, extra block or mob placements, mechanics multipliers, the goal
achievement set and a set of achievements treated as already completed.";

/// Domain context for the program phase: the concrete DSL.
pub const DOMAIN_CONTEXT_PROGRAM: &str = "\
Levels are written in a small DSL:
  level \"name\" {
    floor = 0;
    inventory { pickaxe = 1; }
    place { block = COAL; near { min = 4; max = 8; n = 5 } }
    mob { kind = MELEE; n = 2; near { min = 3; max = 9; n = 2 } }
    mechanics { mob_damage_multiplier = 0.5; }
    goal { COLLECT_COAL }
    completed { MAKE_WOOD_PICKAXE }
  }
Blocks: GRASS WATER TREE STONE COAL IRON TABLE FURNACE LADDER WALL.
Items: wood stone coal iron pickaxe sword. Mob kinds: MELEE PASSIVE (max 3).
Mechanics fields: melee_spawn_multiplier, passive_spawn_multiplier,
mob_damage_multiplier, needs_depletion_multiplier (non-negative numbers) and
monsters_killed_to_clear (integer). The goal set must be non-empty and
disjoint from the completed set.";

/// Instructions for the description phase (closed loop).
pub const MUTATION_INSTRUCTIONS_DESCRIPTION: &str = "\
Propose how the parent level should evolve, given the parent's recent
performance and the agent's performance on the target task. Make one small,
incremental change; pick exactly one intent:
  persist: keep the goal, soften one mechanics burden so the agent can
           consolidate;
  simplify: move one goal achievement into completed and add one scaffold
            (starting item or resource placement);
  expand: the parent is solved, introduce the next achievement in the chain
          and strip one scaffold;
  vary: keep the difficulty, reshuffle placements and nudge one mechanics
        multiplier for diversity.
Start your reply with two machine-readable lines:
intent=<persist|simplify|expand|vary>
goal=<comma-separated achievement names for the offspring>
then explain the choice in two or three sentences.";

/// Description-phase instructions for open-loop runs, which see no parent
/// level and no parent performance.
pub const OPEN_LOOP_INSTRUCTIONS_DESCRIPTION: &str = "\
Propose a fresh training level for the agent given only its performance on
the target task and the example levels. Choose a goal subset of the
achievement chain that the agent plausibly cannot solve yet but could learn
next, and decide what scaffolding (starting items, placements, completed
achievements, mechanics) the level should provide.
Start your reply with two machine-readable lines:
intent=<persist|simplify|expand|vary>
goal=<comma-separated achievement names for the offspring>
then explain the choice in two or three sentences.";

/// Instructions for the program phase.
pub const MUTATION_INSTRUCTIONS_PROGRAM: &str = "\
Write the offspring level as a single DSL program implementing the
description above. Keep every part of the parent you are not changing.
Reply with the program only, wrapped in <code> and </code> tags.";
