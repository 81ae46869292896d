//! Reward shaping for goal-conditioned episodes.
//!
//! Levels may declare achievements as already completed; those contribute
//! zero reward when the environment re-observes them, so the agent is paid
//! only for progress it made itself. Completing the goal set pays a
//! one-time bonus and ends the episode.

use crate::registry::AchSet;
use crate::Real;

/// Sum of native reward values over a set of newly unlocked achievements.
pub fn native_reward_of(newly: AchSet) -> Real {
    newly.iter().map(|a| a.reward()).sum()
}

/// Goal-conditioned reward for one step.
///
/// `newly` is the set of achievements the step unlocked. Achievements in
/// `initial` are masked to zero. When the episode's achievement set first
/// covers `goal`, the step is additionally paid `bonus` and the episode is
/// done. `bonus_paid` tracks whether the bonus went out on an earlier step;
/// it is updated in place.
pub fn wrapped_reward(
    newly: AchSet,
    achievements: AchSet,
    initial: AchSet,
    goal: AchSet,
    bonus: Real,
    bonus_paid: &mut bool,
) -> (Real, bool) {
    let earned = newly.difference(initial);
    let mut r = native_reward_of(earned);
    let goal_met = goal.is_subset_of(achievements);
    if goal_met && !*bonus_paid {
        r += bonus;
        *bonus_paid = true;
    }
    (r, goal_met)
}
