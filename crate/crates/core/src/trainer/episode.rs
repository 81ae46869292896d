//! Episode execution: the ε-greedy rollout loop with per-step Q backups,
//! greedy evaluation on held-out instances, and the reused seed pool for
//! the domain randomization baseline.

use rand::Rng;

use crate::config::CurriculumConfig;
use crate::dsl::{self, CompileError, LevelProgram};
use crate::gridworld::wrapped_reward;
use crate::registry::{AchSet, Achievement};
use crate::rngstream;
use crate::trainer::{BonusState, PolicyTable};
use crate::Real;

/// Which reward wiring an episode runs under. The target task keeps its
/// native reward and only ends on death or timeout; generated levels get
/// the masked reward plus the goal bonus and also end once the goal is met.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EpisodeKind {
    Target,
    Generated,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeStats {
    pub success: bool,
    pub undiscounted_return: Real,
    /// Achievements earned beyond the level's preset ones.
    pub unlocked: AchSet,
    pub steps: u32,
}

/// Linear exploration schedule over global env steps, flat after the decay
/// window.
pub fn epsilon_at(env_steps: u64, cfg: &CurriculumConfig) -> Real {
    let decay_steps = (cfg.total_env_steps as Real * cfg.epsilon_decay_fraction).max(1.0);
    let frac = (env_steps as Real / decay_steps).min(1.0);
    cfg.epsilon_start + (cfg.epsilon_final - cfg.epsilon_start) * frac
}

/// Mutable learner state threaded through a run: the table, the bonus
/// schedule and the global step counter driving exploration.
#[derive(Debug, Clone)]
pub struct Trainer {
    pub policy: PolicyTable,
    pub bonus: BonusState,
    pub env_steps: u64,
    cfg: CurriculumConfig,
}

impl Trainer {
    pub fn new(cfg: &CurriculumConfig) -> Trainer {
        Trainer {
            policy: PolicyTable::new(cfg),
            bonus: BonusState::new(cfg.bonus_floor),
            env_steps: 0,
            cfg: cfg.clone(),
        }
    }

    pub fn config(&self) -> &CurriculumConfig {
        &self.cfg
    }

    pub fn epsilon(&self) -> Real {
        epsilon_at(self.env_steps, &self.cfg)
    }

    /// Run one training episode, applying a Q backup after every step.
    ///
    /// A generated level whose goal is already satisfied at reset is
    /// degenerate: it ends immediately with the bonus as its whole return
    /// and no table writes.
    pub fn run_episode(
        &mut self,
        program: &LevelProgram,
        kind: EpisodeKind,
        episode_seed: u64,
    ) -> Result<EpisodeStats, CompileError> {
        let (mut state, _obs) = dsl::reset(program, episode_seed)?;
        state.max_timesteps = self.cfg.max_timesteps as u32;
        let goal = program.goal;
        let initial = state.initial_achievements;
        let bonus = self.bonus.current;

        if kind == EpisodeKind::Generated && goal.is_subset_of(state.achievements) {
            log::debug!(
                "level '{}' is degenerate: goal already satisfied at reset",
                program.name
            );
            return Ok(EpisodeStats {
                success: true,
                undiscounted_return: bonus,
                unlocked: AchSet::EMPTY,
                steps: 0,
            });
        }

        let mut action_rng = rngstream::stream(episode_seed, "policy", &[]);
        let mut bonus_paid = false;
        let mut ret = 0.0;
        let mut steps = 0u32;
        loop {
            let key = (state.state_key(), goal.0);
            let eps = epsilon_at(self.env_steps, &self.cfg);
            let action = self.policy.select_action(key, eps, &mut action_rng);
            let outcome = state.step(action);
            self.env_steps += 1;
            steps += 1;
            let (reward, done) = match kind {
                EpisodeKind::Target => (outcome.native_reward, outcome.done_native),
                EpisodeKind::Generated => {
                    let (r, goal_met) = wrapped_reward(
                        outcome.newly_unlocked,
                        state.achievements,
                        initial,
                        goal,
                        bonus,
                        &mut bonus_paid,
                    );
                    (r, outcome.done_native || goal_met)
                }
            };
            ret += reward;
            let next_key = (state.state_key(), goal.0);
            self.policy
                .update(key, action, reward - self.cfg.step_penalty, next_key, done);
            if done {
                break;
            }
        }
        Ok(EpisodeStats {
            success: goal.is_subset_of(state.achievements),
            undiscounted_return: ret,
            unlocked: state.achievements.difference(initial),
            steps,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub mean_return: Real,
    /// Fraction of instances that earned each achievement (registry order).
    pub per_achievement_sr: Vec<Real>,
    /// Fraction of instances that satisfied the program's full goal.
    pub goal_success_rate: Real,
}

/// Greedy, update-free rollouts of `program` over the given held-out
/// episode seeds, under the native reward.
pub fn evaluate_target(
    policy: &PolicyTable,
    program: &LevelProgram,
    seeds: &[u64],
    max_timesteps: u32,
) -> Result<EvalReport, CompileError> {
    let mut total_return = 0.0;
    let mut unlock_counts = vec![0usize; Achievement::COUNT];
    let mut successes = 0usize;
    for &seed in seeds {
        let (mut state, _obs) = dsl::reset(program, seed)?;
        state.max_timesteps = max_timesteps;
        loop {
            let key = (state.state_key(), program.goal.0);
            let outcome = state.step(policy.best_action(key));
            total_return += outcome.native_reward;
            if outcome.done_native {
                break;
            }
        }
        let earned = state.achievements.difference(state.initial_achievements);
        for a in earned.iter() {
            unlock_counts[a.index()] += 1;
        }
        if program.goal.is_subset_of(state.achievements) {
            successes += 1;
        }
    }
    let n = seeds.len().max(1) as Real;
    Ok(EvalReport {
        mean_return: total_return / n,
        per_achievement_sr: unlock_counts.iter().map(|c| *c as Real / n).collect(),
        goal_success_rate: successes as Real / n,
    })
}

/// Finite pool of episode seeds reused across training, so the domain
/// randomization baseline sees the same layouts over and over.
#[derive(Debug, Clone)]
pub struct DrSeedPool {
    seeds: Vec<u64>,
}

impl DrSeedPool {
    pub fn new(master: u64, size: usize) -> DrSeedPool {
        DrSeedPool {
            seeds: (0..size)
                .map(|i| rngstream::derive(master, "dr-pool", &[i as u64]))
                .collect(),
        }
    }

    pub fn draw<R: Rng>(&self, rng: &mut R) -> u64 {
        self.seeds[rng.gen_range(0..self.seeds.len())]
    }

    pub fn contains(&self, seed: u64) -> bool {
        self.seeds.contains(&seed)
    }

    pub fn len(&self) -> usize {
        self.seeds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seeds.is_empty()
    }
}
