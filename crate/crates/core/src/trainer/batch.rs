//! Stratified batch construction: which level each episode of a training
//! cycle runs on, and how many episodes each source gets.

use rand::Rng;

use crate::archive::{Archive, NodeId};
use crate::config::CurriculumConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BatchSource {
    Target,
    New(NodeId),
    Replay(NodeId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BatchSlot {
    pub source: BatchSource,
    pub episodes: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BatchPlan {
    pub slots: Vec<BatchSlot>,
    pub cycle_index: u64,
}

impl BatchPlan {
    /// The degenerate plan used by target-only style baselines.
    pub fn all_target(total: usize, cycle: u64) -> BatchPlan {
        BatchPlan {
            slots: vec![BatchSlot {
                source: BatchSource::Target,
                episodes: total,
            }],
            cycle_index: cycle,
        }
    }

    pub fn total_episodes(&self) -> usize {
        self.slots.iter().map(|s| s.episodes).sum()
    }

    pub fn episodes_on_target(&self) -> usize {
        self.count(|s| matches!(s, BatchSource::Target))
    }

    pub fn episodes_on_new(&self) -> usize {
        self.count(|s| matches!(s, BatchSource::New(_)))
    }

    pub fn episodes_on_replay(&self) -> usize {
        self.count(|s| matches!(s, BatchSource::Replay(_)))
    }

    pub fn distinct_new(&self) -> usize {
        self.distinct(|s| match s {
            BatchSource::New(id) => Some(id),
            _ => None,
        })
    }

    pub fn distinct_replay(&self) -> usize {
        self.distinct(|s| match s {
            BatchSource::Replay(id) => Some(id),
            _ => None,
        })
    }

    fn count(&self, pred: impl Fn(BatchSource) -> bool) -> usize {
        self.slots
            .iter()
            .filter(|s| pred(s.source))
            .map(|s| s.episodes)
            .sum()
    }

    fn distinct(&self, pick: impl Fn(BatchSource) -> Option<NodeId>) -> usize {
        let mut ids: Vec<NodeId> = self.slots.iter().filter_map(|s| pick(s.source)).collect();
        ids.sort_unstable();
        ids.dedup();
        ids.len()
    }
}

/// Build one cycle's plan. With fresh levels the episode budget splits
/// three ways (target / new / replay); without them the new share folds
/// into replay; with an empty archive the replay share folds into the
/// target slot. The target share is rounded once and the remainder lands
/// on replay.
pub fn plan_batch<R: Rng>(
    cycle: u64,
    new_levels: &[NodeId],
    archive: &mut Archive,
    cfg: &CurriculumConfig,
    rng: &mut R,
) -> BatchPlan {
    let total = cfg.updates_per_cycle;
    let mut target_n = round_share(total, cfg.target_fraction);
    let (new_n, mut replay_n, unique_replay) = if new_levels.is_empty() {
        (0, total - target_n, cfg.unique_replay_no_new)
    } else {
        let new_n = round_share(total, cfg.new_fraction);
        (new_n, total - target_n - new_n, cfg.unique_replay)
    };

    let replay_ids = if replay_n > 0 {
        archive.sample_replay(unique_replay.min(archive.len()), rng)
    } else {
        Vec::new()
    };
    if replay_n > 0 && replay_ids.is_empty() {
        log::info!("cycle {cycle}: archive empty, {replay_n} replay episodes fold into target");
        target_n += replay_n;
        replay_n = 0;
    }

    let mut slots = Vec::new();
    if target_n > 0 {
        slots.push(BatchSlot {
            source: BatchSource::Target,
            episodes: target_n,
        });
    }
    let new_ids: Vec<NodeId> = new_levels.iter().copied().take(cfg.unique_new).collect();
    spread(&mut slots, &new_ids, new_n, BatchSource::New);
    spread(&mut slots, &replay_ids, replay_n, BatchSource::Replay);
    BatchPlan {
        slots,
        cycle_index: cycle,
    }
}

fn round_share(total: usize, fraction: f64) -> usize {
    ((total as f64) * fraction).round() as usize
}

/// Even split of `episodes` over `ids`; the first `episodes % k` ids take
/// one extra.
fn spread(
    slots: &mut Vec<BatchSlot>,
    ids: &[NodeId],
    episodes: usize,
    make: fn(NodeId) -> BatchSource,
) {
    if ids.is_empty() || episodes == 0 {
        return;
    }
    let base = episodes / ids.len();
    let rem = episodes % ids.len();
    for (i, id) in ids.iter().enumerate() {
        let n = base + usize::from(i < rem);
        if n > 0 {
            slots.push(BatchSlot {
                source: make(*id),
                episodes: n,
            });
        }
    }
}
