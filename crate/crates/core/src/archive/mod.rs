//! The level archive: a lineage graph with per-node performance tracking.
//!
//! Every generated level becomes a node linked to the parent it was mutated
//! from. Nodes track their recent episode outcomes in a fixed ring; the
//! success rate over that ring drives a status (A best to D worst), the
//! learnability score, replay sampling (rank/staleness mixture) and parent
//! eligibility (a node is a useful parent while it is solved and none of its
//! children are).

pub mod score;

use std::collections::VecDeque;

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::config::CurriculumConfig;
use crate::dsl::LevelProgram;
use crate::registry::{AchSet, Achievement};
use crate::Real;

pub type NodeId = usize;

/// Success-rate prior for nodes with no recorded episodes: maximally
/// learnable, so fresh levels are attractive to replay.
const FRESH_SR_PRIOR: Real = 0.5;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ArchiveError {
    #[error("unknown node id {0}")]
    UnknownNode(NodeId),
    #[error("unknown parent id {0}")]
    UnknownParent(NodeId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Status {
    A,
    B,
    C,
    D,
    Unknown,
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Status::A => "A",
            Status::B => "B",
            Status::C => "C",
            Status::D => "D",
            Status::Unknown => "Unknown",
        };
        f.write_str(s)
    }
}

/// One training episode as the archive remembers it: did the level's goal
/// complete, and which achievements the agent unlocked on the way.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EpisodeRecord {
    pub success: bool,
    pub unlocked: AchSet,
}

#[derive(Debug, Clone)]
pub struct ArchiveNode {
    pub id: NodeId,
    pub program: LevelProgram,
    pub parent: Option<NodeId>,
    pub children: Vec<NodeId>,
    pub description: String,
    pub episodes_seen: u64,
    /// Value of the global draw counter when this node was last replayed.
    pub(crate) last_replayed_at: u64,
    /// Most recent episode outcomes, oldest first, capacity = recency window.
    outcomes: VecDeque<EpisodeRecord>,
}

impl ArchiveNode {
    /// Mean success over the ring contents, regardless of how full it is.
    fn ring_mean(&self) -> Option<Real> {
        if self.outcomes.is_empty() {
            return None;
        }
        let wins = self.outcomes.iter().filter(|r| r.success).count();
        Some(wins as Real / self.outcomes.len() as Real)
    }

    /// Share of ring episodes that unlocked each achievement (registry
    /// order). All zeros with an empty ring.
    pub fn per_achievement_sr(&self) -> Vec<Real> {
        let mut srs = vec![0.0; Achievement::COUNT];
        if self.outcomes.is_empty() {
            return srs;
        }
        for rec in &self.outcomes {
            for a in rec.unlocked.iter() {
                srs[a.index()] += 1.0;
            }
        }
        for sr in &mut srs {
            *sr /= self.outcomes.len() as Real;
        }
        srs
    }
}

#[derive(Debug, Clone)]
pub struct Archive {
    nodes: Vec<ArchiveNode>,
    /// Global replay draw counter (the `c` against which staleness is
    /// measured).
    pub(crate) draw_counter: u64,
    tau: Real,
    beta: Real,
    window: usize,
    min_episodes: usize,
    thresholds: [Real; 3],
}

impl Archive {
    pub fn new(cfg: &CurriculumConfig) -> Archive {
        Archive {
            nodes: Vec::new(),
            draw_counter: 0,
            tau: cfg.tau,
            beta: cfg.beta,
            window: cfg.recency_window,
            min_episodes: cfg.min_episodes,
            thresholds: cfg.status_thresholds,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: NodeId) -> Result<&ArchiveNode, ArchiveError> {
        self.nodes.get(id).ok_or(ArchiveError::UnknownNode(id))
    }

    pub fn nodes(&self) -> impl Iterator<Item = &ArchiveNode> {
        self.nodes.iter()
    }

    /// Add a level. `parent = None` makes a root (seed) node. Ids are dense
    /// and only ever point backwards, so the graph stays acyclic by
    /// construction.
    pub fn insert(
        &mut self,
        program: LevelProgram,
        parent: Option<NodeId>,
        description: &str,
    ) -> Result<NodeId, ArchiveError> {
        if let Some(p) = parent {
            if p >= self.nodes.len() {
                return Err(ArchiveError::UnknownParent(p));
            }
        }
        let id = self.nodes.len();
        self.nodes.push(ArchiveNode {
            id,
            program,
            parent,
            children: Vec::new(),
            description: description.to_string(),
            episodes_seen: 0,
            last_replayed_at: 0,
            outcomes: VecDeque::with_capacity(self.window),
        });
        if let Some(p) = parent {
            self.nodes[p].children.push(id);
        }
        Ok(id)
    }

    /// Success-only convenience over [`Archive::record_episode_detail`].
    pub fn record_episode(&mut self, id: NodeId, success: bool) -> Result<(), ArchiveError> {
        self.record_episode_detail(id, success, AchSet::EMPTY)
    }

    pub fn record_episode_detail(
        &mut self,
        id: NodeId,
        success: bool,
        unlocked: AchSet,
    ) -> Result<(), ArchiveError> {
        let window = self.window;
        let node = self.nodes.get_mut(id).ok_or(ArchiveError::UnknownNode(id))?;
        if node.outcomes.len() == window {
            node.outcomes.pop_front();
        }
        node.outcomes.push_back(EpisodeRecord { success, unlocked });
        node.episodes_seen += 1;
        Ok(())
    }

    /// Ring-mean success rate with no minimum-episode gate; `None` only for
    /// nodes that never ran.
    pub fn raw_success_rate(&self, id: NodeId) -> Option<Real> {
        self.nodes.get(id)?.ring_mean()
    }

    /// Recent success rate; defined once the node has seen enough episodes.
    pub fn success_rate(&self, id: NodeId) -> Option<Real> {
        let node = self.nodes.get(id)?;
        if (node.episodes_seen as usize) < self.min_episodes {
            return None;
        }
        node.ring_mean()
    }

    pub fn status(&self, id: NodeId) -> Status {
        let Some(sr) = self.success_rate(id) else {
            return Status::Unknown;
        };
        let [a, b, c] = self.thresholds;
        if sr >= a {
            Status::A
        } else if sr >= b {
            Status::B
        } else if sr >= c {
            Status::C
        } else {
            Status::D
        }
    }

    pub fn learnability_of(&self, id: NodeId) -> Option<Real> {
        self.success_rate(id).map(score::learnability)
    }

    /// Score used for replay: learnability over whatever outcome evidence
    /// exists, with an optimistic prior for brand-new nodes.
    fn replay_score(&self, id: NodeId) -> Real {
        let sr = self.nodes[id].ring_mean().unwrap_or(FRESH_SR_PRIOR);
        score::learnability(sr)
    }

    /// Replay probabilities over the whole archive, in node-id order.
    pub fn replay_distribution(&self) -> Vec<Real> {
        let scores: Vec<Real> = (0..self.nodes.len()).map(|i| self.replay_score(i)).collect();
        let drawn_at: Vec<u64> = self.nodes.iter().map(|n| n.last_replayed_at).collect();
        score::replay_probs(&scores, self.tau, self.beta, self.draw_counter, &drawn_at)
    }

    /// Draw up to `k` distinct nodes. Each draw recomputes the mixture over
    /// the remaining nodes with the current counters, stamps the drawn node
    /// with the counter value and advances it. Asking for more nodes than
    /// exist returns a permutation of the archive.
    pub fn sample_replay<R: Rng>(&mut self, k: usize, rng: &mut R) -> Vec<NodeId> {
        let mut remaining: Vec<NodeId> = (0..self.nodes.len()).collect();
        let mut drawn = Vec::new();
        while drawn.len() < k && !remaining.is_empty() {
            let scores: Vec<Real> = remaining.iter().map(|&i| self.replay_score(i)).collect();
            let drawn_at: Vec<u64> = remaining
                .iter()
                .map(|&i| self.nodes[i].last_replayed_at)
                .collect();
            let probs =
                score::replay_probs(&scores, self.tau, self.beta, self.draw_counter, &drawn_at);
            let j = score::weighted_draw(&probs, rng);
            let id = remaining.swap_remove(j);
            self.nodes[id].last_replayed_at = self.draw_counter;
            self.draw_counter += 1;
            drawn.push(id);
        }
        drawn
    }

    /// Nodes that are solved (status A or B) and whose every child has
    /// regressed to D. Leaves satisfy the child condition vacuously; a child
    /// still in Unknown blocks its parent.
    pub fn eligible_parents(&self) -> Vec<NodeId> {
        (0..self.nodes.len())
            .filter(|&id| {
                matches!(self.status(id), Status::A | Status::B)
                    && self.nodes[id]
                        .children
                        .iter()
                        .all(|&ch| self.status(ch) == Status::D)
            })
            .collect()
    }

    /// Draw a parent proportionally to learnability over the eligible set.
    pub fn sample_parent<R: Rng>(&self, rng: &mut R) -> Option<NodeId> {
        let eligible = self.eligible_parents();
        if eligible.is_empty() {
            return None;
        }
        let weights: Vec<Real> = eligible
            .iter()
            .map(|&id| self.learnability_of(id).expect("eligible nodes are scored"))
            .collect();
        Some(eligible[score::weighted_draw(&weights, rng)])
    }

    /// Root distance: 0 for seeds.
    pub fn depth(&self, id: NodeId) -> usize {
        let mut d = 0;
        let mut cur = self.nodes[id].parent;
        while let Some(p) = cur {
            d += 1;
            cur = self.nodes[p].parent;
        }
        d
    }

    pub fn to_json(&self) -> serde_json::Value {
        #[derive(Serialize)]
        struct ExportNode<'a> {
            id: NodeId,
            parent: Option<NodeId>,
            status: Status,
            success_rate: Option<Real>,
            learnability: Option<Real>,
            episodes_seen: u64,
            source: &'a str,
            description: &'a str,
        }
        let nodes: Vec<ExportNode> = self
            .nodes
            .iter()
            .map(|n| ExportNode {
                id: n.id,
                parent: n.parent,
                status: self.status(n.id),
                success_rate: self.success_rate(n.id),
                learnability: self.learnability_of(n.id),
                episodes_seen: n.episodes_seen,
                source: &n.program.source_text,
                description: &n.description,
            })
            .collect();
        serde_json::json!({ "nodes": nodes })
    }

    /// Lineage graph in DOT: fill color tracks the deepest goal achievement,
    /// node size tracks the recent success rate.
    pub fn to_dot(&self) -> String {
        const PALETTE: [&str; 10] = [
            "#a6cee3", "#1f78b4", "#b2df8a", "#33a02c", "#fb9a99", "#e31a1c", "#fdbf6f",
            "#ff7f00", "#cab2d6", "#6a3d9a",
        ];
        let mut out = String::from("digraph archive {\n  rankdir=TB;\n  node [style=filled];\n");
        for n in &self.nodes {
            let category = n
                .program
                .goal
                .iter()
                .map(Achievement::index)
                .max()
                .unwrap_or(0);
            let sr = self.nodes[n.id].ring_mean().unwrap_or(0.0);
            let size = 0.4 + 0.6 * sr;
            out.push_str(&format!(
                "  n{} [label=\"{} [{}]\", fillcolor=\"{}\", width={:.2}, height={:.2}];\n",
                n.id,
                n.program.name,
                self.status(n.id),
                PALETTE[category % PALETTE.len()],
                size,
                size * 0.6,
            ));
        }
        for n in &self.nodes {
            if let Some(p) = n.parent {
                out.push_str(&format!("  n{} -> n{};\n", p, n.id));
            }
        }
        out.push_str("}\n");
        out
    }
}
