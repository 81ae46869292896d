//! Run configuration. Loaded from JSON with every field explicit: a missing
//! or unknown field is a hard error, not a silent default.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config io: {0}")]
    Io(#[from] std::io::Error),
    #[error("config parse: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("config invalid: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurriculumConfig {
    // Replay scoring (rank/staleness mixture).
    /// Staleness mixture coefficient tau in [0, 1].
    pub tau: f64,
    /// Rank temperature beta (> 0); score term uses (1/rank)^(1/beta).
    pub beta: f64,
    /// Ring buffer length N for per-level recent outcomes.
    pub recency_window: usize,
    /// Episodes a level needs before its status leaves Unknown.
    pub min_episodes: usize,
    /// Success-rate cutoffs for statuses A / B / C (strictly decreasing);
    /// anything below the last is D.
    pub status_thresholds: [f64; 3],

    // Generation.
    /// Generation cadence v: tickets are issued every v-th cycle.
    pub generation_cadence: usize,
    /// Valid levels wanted per generation batch.
    pub m_target: usize,
    /// Candidates launched = ceil(m_target * surplus_factor).
    pub surplus_factor: f64,
    /// Random actions rolled out during the compile check.
    pub rollout_steps: usize,
    /// Few-shot example programs attached to the generation context.
    pub few_shot_k: usize,

    // Batch plan. Fractions are of updates_per_cycle episodes.
    /// Episodes per training cycle.
    pub updates_per_cycle: usize,
    /// Share of episodes on the target task.
    pub target_fraction: f64,
    /// Share on newly generated levels (cycles that have them).
    pub new_fraction: f64,
    /// Share on replayed archive levels (cycles with new levels).
    pub replay_fraction: f64,
    /// Replay share when no new levels arrived this cycle.
    pub replay_fraction_no_new: f64,
    /// Distinct new levels a batch spreads its new-share over.
    pub unique_new: usize,
    /// Distinct replayed levels per batch (cycles with new levels).
    pub unique_replay: usize,
    /// Distinct replayed levels per batch (cycles without).
    pub unique_replay_no_new: usize,

    // Reward shaping.
    /// Floor d of the goal bonus schedule B = max(d, 2 * R_prev).
    pub bonus_floor: f64,

    // Learner.
    /// Q-learning step size.
    pub alpha: f64,
    /// Discount factor.
    pub gamma: f64,
    /// Exploration schedule: epsilon_start -> epsilon_final, linear over
    /// epsilon_decay_fraction of the step budget, then flat.
    pub epsilon_start: f64,
    pub epsilon_final: f64,
    pub epsilon_decay_fraction: f64,
    /// Initial value for unseen table entries (optimistic when > 0).
    pub q_init: f64,
    /// Uniform per-step cost subtracted inside Q backups only. Breaks the
    /// value plateau between moving and idling without touching reported
    /// returns or the optimal policy ordering.
    pub step_penalty: f64,

    // Environment / budget.
    /// Episode cap in env steps.
    pub max_timesteps: usize,
    /// Total training env steps for the run.
    pub total_env_steps: u64,
    /// Cycles between target evaluations (a final eval always runs).
    pub eval_interval_cycles: usize,
    /// Held-out target instances per evaluation.
    pub eval_instances: usize,

    // Baselines.
    /// Size of the reused layout-seed pool for domain randomization runs.
    pub dr_pool_size: usize,

    /// Directory holding the seed-level corpus (*.lvl).
    pub seed_dir: String,
}

impl CurriculumConfig {
    /// The shipped desk-scale defaults (mirrors configs/default.json).
    pub fn desk_default() -> CurriculumConfig {
        CurriculumConfig {
            tau: 0.3,
            beta: 1.0,
            recency_window: 16,
            min_episodes: 8,
            status_thresholds: [0.75, 0.50, 0.25],
            generation_cadence: 2,
            m_target: 10,
            surplus_factor: 1.5,
            rollout_steps: 32,
            few_shot_k: 2,
            updates_per_cycle: 100,
            target_fraction: 0.20,
            new_fraction: 0.53,
            replay_fraction: 0.27,
            replay_fraction_no_new: 0.80,
            unique_new: 10,
            unique_replay: 5,
            unique_replay_no_new: 15,
            bonus_floor: 1.0,
            alpha: 0.1,
            gamma: 0.99,
            epsilon_start: 1.0,
            epsilon_final: 0.05,
            epsilon_decay_fraction: 0.5,
            q_init: 0.4,
            step_penalty: 0.05,
            max_timesteps: 400,
            total_env_steps: 200_000,
            eval_interval_cycles: 5,
            eval_instances: 64,
            dr_pool_size: 64,
            seed_dir: "seeds".to_string(),
        }
    }

    pub fn load(path: &Path) -> Result<CurriculumConfig, ConfigError> {
        let text = std::fs::read_to_string(path)?;
        let cfg: CurriculumConfig = serde_json::from_str(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let err = |m: String| Err(ConfigError::Invalid(m));
        if !(0.0..=1.0).contains(&self.tau) {
            return err(format!("tau must be in [0, 1], got {}", self.tau));
        }
        if self.beta <= 0.0 {
            return err(format!("beta must be > 0, got {}", self.beta));
        }
        if self.recency_window == 0 || self.min_episodes == 0 {
            return err("recency_window and min_episodes must be >= 1".into());
        }
        if self.min_episodes > self.recency_window {
            return err(format!(
                "min_episodes ({}) exceeds recency_window ({})",
                self.min_episodes, self.recency_window
            ));
        }
        let t = &self.status_thresholds;
        if !(t[0] > t[1] && t[1] > t[2]) || t[0] >= 1.0 || t[2] <= 0.0 {
            return err(format!(
                "status_thresholds must be strictly decreasing within (0, 1), got {t:?}"
            ));
        }
        if self.generation_cadence == 0 {
            return err("generation_cadence must be >= 1".into());
        }
        if self.m_target == 0 || self.surplus_factor < 1.0 {
            return err("m_target must be >= 1 and surplus_factor >= 1".into());
        }
        if self.updates_per_cycle == 0 {
            return err("updates_per_cycle must be >= 1".into());
        }
        let with_new = self.target_fraction + self.new_fraction + self.replay_fraction;
        if (with_new - 1.0).abs() > 1e-9 {
            return err(format!(
                "target + new + replay fractions must sum to 1, got {with_new}"
            ));
        }
        let without_new = self.target_fraction + self.replay_fraction_no_new;
        if (without_new - 1.0).abs() > 1e-9 {
            return err(format!(
                "target + replay_no_new fractions must sum to 1, got {without_new}"
            ));
        }
        if self.unique_new == 0 || self.unique_replay == 0 || self.unique_replay_no_new == 0 {
            return err("unique level counts must be >= 1".into());
        }
        if !(0.0..=1.0).contains(&self.epsilon_start)
            || !(0.0..=1.0).contains(&self.epsilon_final)
            || !(0.0..=1.0).contains(&self.epsilon_decay_fraction)
        {
            return err("epsilon parameters must be in [0, 1]".into());
        }
        if !(0.0..=1.0).contains(&self.gamma) || self.alpha <= 0.0 || self.alpha > 1.0 {
            return err("alpha must be in (0, 1] and gamma in [0, 1]".into());
        }
        if self.step_penalty < 0.0 {
            return err(format!("step_penalty must be >= 0, got {}", self.step_penalty));
        }
        if self.max_timesteps == 0 || self.total_env_steps == 0 {
            return err("max_timesteps and total_env_steps must be >= 1".into());
        }
        if self.eval_instances == 0 || self.eval_interval_cycles == 0 {
            return err("eval_instances and eval_interval_cycles must be >= 1".into());
        }
        if self.dr_pool_size == 0 {
            return err("dr_pool_size must be >= 1".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn desk_default_is_valid() {
        CurriculumConfig::desk_default().validate().unwrap();
    }

    #[test]
    fn missing_field_is_an_error() {
        let mut v = serde_json::to_value(CurriculumConfig::desk_default()).unwrap();
        v.as_object_mut().unwrap().remove("tau");
        let res: Result<CurriculumConfig, _> = serde_json::from_value(v);
        assert!(res.is_err());
    }

    #[test]
    fn unknown_field_is_an_error() {
        let mut v = serde_json::to_value(CurriculumConfig::desk_default()).unwrap();
        v.as_object_mut()
            .unwrap()
            .insert("banana".into(), serde_json::json!(1));
        let res: Result<CurriculumConfig, _> = serde_json::from_value(v);
        assert!(res.is_err());
    }

    #[test]
    fn fraction_mismatch_rejected() {
        let mut cfg = CurriculumConfig::desk_default();
        cfg.new_fraction = 0.6;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn thresholds_must_decrease() {
        let mut cfg = CurriculumConfig::desk_default();
        cfg.status_thresholds = [0.75, 0.75, 0.25];
        assert!(cfg.validate().is_err());
    }
}
