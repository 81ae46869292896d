//! Deterministic mutation backend.
//!
//! Encodes the small-incremental-evolution policy as a decision table over
//! the parent's status and per-achievement rates, then edits the parent
//! program accordingly. Given the same context and rng stream it always
//! produces the same candidate, which is what makes curriculum runs
//! reproducible end to end.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::dsl::{self, LevelProgram, PlacementSpec, Region};
use crate::generator::{
    format_description_header, parse_description_header, BackendError, GenerationContext,
    GeneratorBackend, Intent, PerformanceProfile,
};
use crate::registry::{AchSet, Achievement, Block, Item};
use crate::Real;

/// Mechanics knobs that make a level harder when raised.
const BURDEN_FIELDS: [&str; 3] = [
    "melee_spawn_multiplier",
    "mob_damage_multiplier",
    "needs_depletion_multiplier",
];

const MULTIPLIER_FIELDS: [&str; 4] = [
    "melee_spawn_multiplier",
    "passive_spawn_multiplier",
    "mob_damage_multiplier",
    "needs_depletion_multiplier",
];

/// Items worth handing out as scaffolding.
const SCAFFOLD_ITEMS: [Item; 5] = [Item::Wood, Item::Stone, Item::Coal, Item::Iron, Item::Pickaxe];

/// Blocks worth placing as scaffolding.
const SCAFFOLD_BLOCKS: [Block; 4] = [Block::Tree, Block::Stone, Block::Coal, Block::Iron];

pub struct MutationBackend {
    /// Status cutoffs (A, B, C); shared with the archive's mapping.
    thresholds: [Real; 3],
}

impl MutationBackend {
    pub fn new(thresholds: [Real; 3]) -> MutationBackend {
        MutationBackend { thresholds }
    }

    /// The base program a candidate evolves from: the parent when present,
    /// otherwise the few-shot example closest to `anchor` (open loop),
    /// otherwise the target task.
    fn base_program<'c>(&self, ctx: &'c GenerationContext, anchor: AchSet) -> LevelProgram {
        if let Some(p) = &ctx.parent_program {
            return p.clone();
        }
        ctx.few_shot
            .iter()
            .max_by(|a, b| {
                let ja = jaccard(anchor, a.goal.union(a.completed));
                let jb = jaccard(anchor, b.goal.union(b.completed));
                ja.partial_cmp(&jb).unwrap()
            })
            .cloned()
            .unwrap_or_else(LevelProgram::target)
    }

    fn choose_intent(
        &self,
        base: &LevelProgram,
        parent_perf: Option<&PerformanceProfile>,
        target_perf: &PerformanceProfile,
        rng: &mut ChaCha8Rng,
    ) -> Intent {
        let Some(perf) = parent_perf else {
            // Open loop: no feedback to condition on, pick blind.
            let all = [Intent::Persist, Intent::Simplify, Intent::Expand, Intent::Vary];
            return all[rng.gen_range(0..all.len())];
        };
        let [a_cut, b_cut, c_cut] = self.thresholds;
        let sr = perf.goal_success_rate;
        if sr >= a_cut {
            return Intent::Expand;
        }
        if sr >= b_cut {
            if base.goal.iter().any(|ach| perf.sr_of(ach) < c_cut) {
                return Intent::Persist;
            }
            // Half-solved with every goal skill landed is close enough:
            // waiting for full mastery starves the frontier, because a
            // mastered level's learnability (and with it the odds of ever
            // being drawn as a parent again) collapses toward zero.
            let landed = base.goal.iter().all(|ach| perf.sr_of(ach) >= b_cut);
            return if landed { Intent::Expand } else { Intent::Vary };
        }
        // Below B: the level is not solved. If its goal skills are landed
        // on-task but have not transferred to the target, reshuffle for
        // diversity instead of simplifying further.
        let on_task = base.goal.iter().all(|ach| perf.sr_of(ach) >= b_cut);
        let transfer_gap = base.goal.iter().any(|ach| target_perf.sr_of(ach) < c_cut);
        if on_task && transfer_gap {
            Intent::Vary
        } else {
            Intent::Simplify
        }
    }

    /// The achievement `expand` introduces: the earliest one missing from
    /// goal ∪ completed in registry order. Registry order follows the
    /// prerequisite chain, so filling the first gap keeps every expanded
    /// goal reachable with the skills the line already has; leaping past a
    /// gap (say, iron before the stone pickaxe) breeds dead branches.
    fn next_achievement(goal: AchSet, completed: AchSet) -> Option<Achievement> {
        let have = goal.union(completed);
        Achievement::ALL.iter().copied().find(|a| !have.contains(*a))
    }

    fn offspring_goal(intent: Intent, base: &LevelProgram, rng: &mut ChaCha8Rng) -> AchSet {
        match intent {
            Intent::Expand => match Self::next_achievement(base.goal, base.completed) {
                Some(next) => {
                    let mut g = base.goal;
                    g.insert(next);
                    g
                }
                None => base.goal,
            },
            Intent::Simplify if base.goal.len() >= 2 => {
                let members: Vec<Achievement> = base.goal.iter().collect();
                let moved = members[rng.gen_range(0..members.len())];
                let mut g = base.goal;
                g.remove(moved);
                g
            }
            _ => base.goal,
        }
    }
}

impl GeneratorBackend for MutationBackend {
    fn dream_description(
        &self,
        ctx: &GenerationContext,
        rng: &mut ChaCha8Rng,
    ) -> Result<String, BackendError> {
        let base = self.base_program(ctx, AchSet::full());
        let intent = self.choose_intent(&base, ctx.parent_perf.as_ref(), &ctx.target_perf, rng);
        let goal = Self::offspring_goal(intent, &base, rng);
        let sr = ctx
            .parent_perf
            .as_ref()
            .map(|p| p.goal_success_rate)
            .unwrap_or(0.0);
        let prose = match intent {
            Intent::Expand => format!(
                "parent solved at {sr:.2}; deepen the chain and strip scaffolding"
            ),
            Intent::Persist => format!(
                "parent at {sr:.2} with a weak goal skill; soften one burden and keep going"
            ),
            Intent::Vary => format!("parent at {sr:.2}; reshuffle the layout for diversity"),
            Intent::Simplify => format!(
                "parent at {sr:.2} is too hard; pre-complete one goal step and add a scaffold"
            ),
        };
        Ok(format_description_header(intent, goal, &prose))
    }

    fn dream_program(
        &self,
        ctx: &GenerationContext,
        description: &str,
        rng: &mut ChaCha8Rng,
    ) -> Result<String, BackendError> {
        let (intent, goal) = parse_description_header(description)
            .ok_or_else(|| BackendError::Malformed("description lacks intent/goal header".into()))?;
        let mut p = self.base_program(ctx, goal);
        p.name = offspring_name(&p.name, rng);

        match intent {
            Intent::Expand => {
                let added = goal.difference(p.goal);
                p.goal = goal;
                debug_assert!(added.len() <= 1);
                // A grown goal is challenge enough: everything else stays
                // put so the behavior learned on the parent still applies.
                // Once the goal is maxed out, march the mechanics back to
                // the target task, then start shedding scaffolding.
                if added.is_empty() && !harden_toward_target(&mut p) {
                    remove_scaffold(&mut p, rng);
                }
            }
            Intent::Simplify => {
                let moved = p.goal.difference(goal);
                p.goal = goal;
                p.completed = p.completed.union(moved);
                add_scaffold(&mut p, rng);
            }
            Intent::Persist => {
                soften_burden(&mut p, rng);
            }
            Intent::Vary => {
                jitter_placements(&mut p, rng);
                perturb_multiplier(&mut p, rng);
            }
        }

        p.source_text = dsl::serialize(&p);
        Ok(p.source_text.clone())
    }
}

fn jaccard(a: AchSet, b: AchSet) -> Real {
    let union = a.union(b).len();
    if union == 0 {
        return 1.0;
    }
    a.intersect(b).len() as Real / union as Real
}

fn offspring_name(parent: &str, rng: &mut ChaCha8Rng) -> String {
    let stem: String = parent.chars().take(20).collect();
    format!("{stem}-{:03x}", rng.gen::<u16>() & 0xfff)
}

/// Drop one scaffolding element: an inventory override or a block
/// placement. Returns false when there is nothing to strip.
fn remove_scaffold(p: &mut LevelProgram, rng: &mut ChaCha8Rng) -> bool {
    let items: Vec<Item> = p.inventory_overrides.keys().copied().collect();
    let total = items.len() + p.placements.len();
    if total == 0 {
        return false;
    }
    let pick = rng.gen_range(0..total);
    if pick < items.len() {
        p.inventory_overrides.remove(&items[pick]);
    } else {
        p.placements.remove(pick - items.len());
    }
    true
}

/// Hand out one extra aid: a starting item or a resource placement.
fn add_scaffold(p: &mut LevelProgram, rng: &mut ChaCha8Rng) {
    if rng.gen::<f64>() < 0.5 {
        let item = SCAFFOLD_ITEMS[rng.gen_range(0..SCAFFOLD_ITEMS.len())];
        let slot = p.inventory_overrides.entry(item).or_insert(0);
        *slot = (*slot + 1).min(9);
    } else {
        let block = SCAFFOLD_BLOCKS[rng.gen_range(0..SCAFFOLD_BLOCKS.len())];
        let n = rng.gen_range(3..=5);
        p.placements.push(PlacementSpec::near(block, 2, 8, n));
    }
}

/// Make the level gentler: halve one burden multiplier, or the clear count.
fn soften_burden(p: &mut LevelProgram, rng: &mut ChaCha8Rng) {
    let pick = rng.gen_range(0..=BURDEN_FIELDS.len());
    if pick < BURDEN_FIELDS.len() {
        let field = BURDEN_FIELDS[pick];
        let v = p.mechanics.get(field).unwrap();
        p.mechanics.set(field, v * 0.5);
    } else {
        p.mechanics.monsters_killed_to_clear /= 2;
    }
}

/// Pull one mechanics field back to the target task's defaults. Returns
/// false when the mechanics already match the target.
fn harden_toward_target(p: &mut LevelProgram) -> bool {
    let defaults = crate::dsl::MechanicsParams::default();
    for field in crate::dsl::MECHANICS_FIELDS {
        let have = p.mechanics.get(field).unwrap();
        let want = defaults.get(field).unwrap();
        if have != want {
            p.mechanics.set(field, want);
            return true;
        }
    }
    false
}

fn jitter_placements(p: &mut LevelProgram, rng: &mut ChaCha8Rng) {
    for spec in &mut p.placements {
        if let Region::Near { min, max, .. } = &mut spec.region {
            let new_min = (i32::from(*min) + rng.gen_range(-1..=1)).max(1) as u16;
            let new_max = (i32::from(*max) + rng.gen_range(-1..=1)).max(i32::from(new_min)) as u16;
            *min = new_min;
            *max = new_max;
        }
    }
    for spec in &mut p.mob_placements {
        let new_min = (i32::from(spec.min) + rng.gen_range(-1..=1)).max(1) as u16;
        let new_max = (i32::from(spec.max) + rng.gen_range(-1..=1)).max(i32::from(new_min)) as u16;
        spec.min = new_min;
        spec.max = new_max;
    }
}

fn perturb_multiplier(p: &mut LevelProgram, rng: &mut ChaCha8Rng) {
    let field = MULTIPLIER_FIELDS[rng.gen_range(0..MULTIPLIER_FIELDS.len())];
    let factor = if rng.gen::<f64>() < 0.5 { 0.75 } else { 1.25 };
    let v = p.mechanics.get(field).unwrap();
    p.mechanics.set(field, v * factor);
}

/// Description header for a uniformly random edit of `base`, bypassing the
/// performance-conditioned decision table entirely. The plain replay
/// baseline pairs this with a randomly drawn parent so its curriculum gets
/// no feedback signal of any kind.
pub fn random_mutation_description(base: &LevelProgram, rng: &mut ChaCha8Rng) -> String {
    let intents = [Intent::Persist, Intent::Simplify, Intent::Expand, Intent::Vary];
    let intent = intents[rng.gen_range(0..intents.len())];
    let goal = MutationBackend::offspring_goal(intent, base, rng);
    format_description_header(intent, goal, "random mutation")
}
