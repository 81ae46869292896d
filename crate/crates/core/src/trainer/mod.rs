//! The student side of the loop: a goal-conditioned tabular Q-learner, the
//! stratified batch plan, the adaptive goal bonus, greedy evaluation on
//! held-out instances, and the seed pool behind the domain randomization
//! baseline.

mod batch;
mod bonus;
mod episode;
mod policy;

pub use batch::{plan_batch, BatchPlan, BatchSlot, BatchSource};
pub use bonus::{update_bonus, BonusState};
pub use episode::{
    epsilon_at, evaluate_target, DrSeedPool, EpisodeKind, EpisodeStats, EvalReport, Trainer,
};
pub use policy::{PolicyError, PolicyTable, StateGoalKey};
