//! Level synthesis. Generation runs in two phases: first a short
//! *description* of how the level should evolve (an intent plus the
//! offspring's goal set, followed by free prose), then the level program
//! itself. Both phases go through a pluggable backend: the deterministic
//! mutation engine used for reproducible runs and tests, or a remote
//! chat-completion endpoint.
//!
//! Candidates are generated in surplus, compile-checked with a short random
//! rollout and never repaired: a rejected candidate is dropped.

mod context;
mod mutation;
mod remote;

pub use context::{
    DOMAIN_CONTEXT_DESCRIPTION, DOMAIN_CONTEXT_PROGRAM, MUTATION_INSTRUCTIONS_DESCRIPTION,
    MUTATION_INSTRUCTIONS_PROGRAM, OPEN_LOOP_INSTRUCTIONS_DESCRIPTION,
};
pub use mutation::{random_mutation_description, MutationBackend};
pub use remote::RemoteBackend;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::archive::{Archive, NodeId};
use crate::config::CurriculumConfig;
use crate::dsl::{self, LevelProgram};
use crate::registry::{AchSet, Achievement, Action};
use crate::rngstream;
use crate::Real;

#[derive(Debug, Error)]
pub enum BackendError {
    #[error("backend unavailable: {0}")]
    Unavailable(String),
    #[error("backend request failed: {0}")]
    Request(String),
    #[error("backend reply malformed: {0}")]
    Malformed(String),
}

/// Recent success rates, both for the level's own goal and for each
/// achievement separately (registry order).
#[derive(Debug, Clone, PartialEq)]
pub struct PerformanceProfile {
    pub goal_success_rate: Real,
    pub per_achievement_sr: Vec<Real>,
}

impl PerformanceProfile {
    pub fn zeros() -> PerformanceProfile {
        PerformanceProfile {
            goal_success_rate: 0.0,
            per_achievement_sr: vec![0.0; Achievement::COUNT],
        }
    }

    /// Profile of an archived node over its outcome ring.
    pub fn of_node(archive: &Archive, id: NodeId) -> PerformanceProfile {
        let node = archive.node(id).expect("profiled node exists");
        PerformanceProfile {
            goal_success_rate: archive.raw_success_rate(id).unwrap_or(0.0),
            per_achievement_sr: node.per_achievement_sr(),
        }
    }

    pub fn sr_of(&self, a: Achievement) -> Real {
        self.per_achievement_sr[a.index()]
    }

    /// Text rendering used in backend prompts.
    pub fn render(&self, title: &str) -> String {
        let mut out = format!("{title}\n  goal success rate: {:.2}\n", self.goal_success_rate);
        for a in Achievement::ALL {
            out.push_str(&format!("  {}: {:.2}\n", a.name(), self.sr_of(a)));
        }
        out
    }
}

/// Everything a backend may condition on for one generation request.
#[derive(Debug, Clone)]
pub struct GenerationContext {
    pub domain_context_1: String,
    pub domain_context_2: String,
    pub parent_program: Option<LevelProgram>,
    pub parent_perf: Option<PerformanceProfile>,
    pub target_perf: PerformanceProfile,
    pub mutation_instructions_1: String,
    pub mutation_instructions_2: String,
    pub few_shot: Vec<LevelProgram>,
    pub open_loop: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Pending,
    Valid,
    Rejected(String),
}

#[derive(Debug, Clone)]
pub struct CandidateLevel {
    pub description: String,
    pub program_text: String,
    pub verdict: Verdict,
}

/// How the offspring should relate to its parent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Intent {
    Persist,
    Simplify,
    Expand,
    Vary,
}

impl Intent {
    pub fn name(self) -> &'static str {
        match self {
            Intent::Persist => "persist",
            Intent::Simplify => "simplify",
            Intent::Expand => "expand",
            Intent::Vary => "vary",
        }
    }

    pub fn from_name(s: &str) -> Option<Intent> {
        match s {
            "persist" => Some(Intent::Persist),
            "simplify" => Some(Intent::Simplify),
            "expand" => Some(Intent::Expand),
            "vary" => Some(Intent::Vary),
            _ => None,
        }
    }
}

/// Machine-readable first lines of a description: `intent=<name>` and
/// `goal=<A,B,...>`, prose afterwards.
pub fn format_description_header(intent: Intent, goal: AchSet, prose: &str) -> String {
    let goals: Vec<&str> = goal.iter().map(Achievement::name).collect();
    format!("intent={}\ngoal={}\n{prose}\n", intent.name(), goals.join(","))
}

pub fn parse_description_header(text: &str) -> Option<(Intent, AchSet)> {
    let mut intent = None;
    let mut goal = None;
    for line in text.lines().take(8) {
        let line = line.trim();
        if let Some(rest) = line.strip_prefix("intent=") {
            intent = Intent::from_name(rest.trim());
        } else if let Some(rest) = line.strip_prefix("goal=") {
            let mut set = AchSet::EMPTY;
            for part in rest.split(',') {
                set.insert(Achievement::from_name(part.trim())?);
            }
            goal = Some(set);
        }
    }
    Some((intent?, goal?))
}

/// One generation phase pair. Implementations must be safe to call from
/// multiple threads at once.
pub trait GeneratorBackend: Send + Sync {
    /// Phase one: the evolution rationale (latent description).
    fn dream_description(
        &self,
        ctx: &GenerationContext,
        rng: &mut ChaCha8Rng,
    ) -> Result<String, BackendError>;

    /// Phase two: the level program source, conditioned on the description.
    fn dream_program(
        &self,
        ctx: &GenerationContext,
        description: &str,
        rng: &mut ChaCha8Rng,
    ) -> Result<String, BackendError>;
}

/// Assemble the conditioning context for one generation round.
///
/// Few-shot examples are the `few_shot_k` archived programs most similar to
/// the parent, where similarity is Jaccard overlap of the goal+completed
/// achievement sets (ties broken by ascending node id; the parent itself is
/// excluded). Open-loop mode drops the parent program and its profile and
/// swaps in instructions that ask for a self-directed curriculum; similarity
/// is then measured against the target task.
pub fn build_context(
    archive: &Archive,
    parent: Option<NodeId>,
    target_perf: PerformanceProfile,
    cfg: &CurriculumConfig,
    open_loop: bool,
) -> GenerationContext {
    let parent_node = parent.map(|id| archive.node(id).expect("parent exists"));
    let anchor: AchSet = match (&parent_node, open_loop) {
        (Some(node), false) => node.program.goal.union(node.program.completed),
        _ => AchSet::full(),
    };

    let mut scored: Vec<(Real, NodeId)> = archive
        .nodes()
        .filter(|n| Some(n.id) != parent)
        .map(|n| (jaccard(anchor, n.program.goal.union(n.program.completed)), n.id))
        .collect();
    scored.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
    let few_shot: Vec<LevelProgram> = scored
        .iter()
        .take(cfg.few_shot_k)
        .map(|&(_, id)| archive.node(id).unwrap().program.clone())
        .collect();

    let instructions_1 = if open_loop {
        OPEN_LOOP_INSTRUCTIONS_DESCRIPTION
    } else {
        MUTATION_INSTRUCTIONS_DESCRIPTION
    };

    GenerationContext {
        domain_context_1: DOMAIN_CONTEXT_DESCRIPTION.to_string(),
        domain_context_2: DOMAIN_CONTEXT_PROGRAM.to_string(),
        parent_program: if open_loop {
            None
        } else {
            parent_node.map(|n| n.program.clone())
        },
        parent_perf: if open_loop {
            None
        } else {
            parent.map(|id| PerformanceProfile::of_node(archive, id))
        },
        target_perf,
        mutation_instructions_1: instructions_1.to_string(),
        mutation_instructions_2: MUTATION_INSTRUCTIONS_PROGRAM.to_string(),
        few_shot,
        open_loop,
    }
}

fn jaccard(a: AchSet, b: AchSet) -> Real {
    let union = a.union(b).len();
    if union == 0 {
        return 1.0;
    }
    a.intersect(b).len() as Real / union as Real
}

/// Validate one candidate: parse, compile with a seed drawn from `rng`, and
/// survive `rollout_steps` random actions. Rejections carry the failing
/// stage; candidates are never repaired or retried.
pub fn compile_check(program_text: &str, rollout_steps: usize, rng: &mut ChaCha8Rng) -> Verdict {
    let program = match dsl::parse(program_text) {
        Ok(p) => p,
        Err(e) => return Verdict::Rejected(format!("parse: {e}")),
    };
    let mut state = match dsl::compile(&program, rng.gen::<u64>()) {
        Ok(s) => s,
        Err(e) => return Verdict::Rejected(format!("compile: {e}")),
    };
    for _ in 0..rollout_steps {
        if state.done_native() {
            break;
        }
        let action = Action::from_index(rng.gen_range(0..Action::COUNT)).unwrap();
        state.step(action);
    }
    Verdict::Valid
}

/// Run the two generation phases plus the compile check for a surplus of
/// candidates and return them all, in generation order, with verdicts
/// filled in. Backend errors in either phase mark the candidate Rejected.
pub fn generate_batch(
    ctx: &GenerationContext,
    m_target: usize,
    surplus_factor: Real,
    rollout_steps: usize,
    backend: &dyn GeneratorBackend,
    rng: &mut ChaCha8Rng,
) -> Vec<CandidateLevel> {
    generate_surplus(
        ctx,
        m_target,
        surplus_factor,
        rollout_steps,
        backend,
        rng,
        DescriptionSource::Backend,
    )
}

/// Same surplus pipeline, but phase one is a uniformly random mutation
/// header instead of a backend call; the backend only writes programs.
/// Used by the plain replay baseline.
pub fn generate_batch_random_desc(
    ctx: &GenerationContext,
    m_target: usize,
    surplus_factor: Real,
    rollout_steps: usize,
    backend: &dyn GeneratorBackend,
    rng: &mut ChaCha8Rng,
) -> Vec<CandidateLevel> {
    generate_surplus(
        ctx,
        m_target,
        surplus_factor,
        rollout_steps,
        backend,
        rng,
        DescriptionSource::Random,
    )
}

#[derive(Clone, Copy)]
enum DescriptionSource {
    Backend,
    Random,
}

fn generate_surplus(
    ctx: &GenerationContext,
    m_target: usize,
    surplus_factor: Real,
    rollout_steps: usize,
    backend: &dyn GeneratorBackend,
    rng: &mut ChaCha8Rng,
    source: DescriptionSource,
) -> Vec<CandidateLevel> {
    let launches = (m_target as Real * surplus_factor).ceil() as usize;
    let batch_seed: u64 = rng.gen();
    (0..launches)
        .map(|i| generate_one(ctx, batch_seed, i as u64, rollout_steps, backend, source))
        .collect()
}

fn generate_one(
    ctx: &GenerationContext,
    batch_seed: u64,
    index: u64,
    rollout_steps: usize,
    backend: &dyn GeneratorBackend,
    source: DescriptionSource,
) -> CandidateLevel {
    let mut desc_rng = rngstream::stream(batch_seed, "desc", &[index]);
    let produced = match source {
        DescriptionSource::Backend => backend.dream_description(ctx, &mut desc_rng),
        DescriptionSource::Random => {
            let base = ctx.parent_program.clone().unwrap_or_else(LevelProgram::target);
            Ok(random_mutation_description(&base, &mut desc_rng))
        }
    };
    let description = match produced {
        Ok(d) if !d.trim().is_empty() => d,
        Ok(_) => {
            return CandidateLevel {
                description: String::new(),
                program_text: String::new(),
                verdict: Verdict::Rejected("description: empty".into()),
            }
        }
        Err(e) => {
            return CandidateLevel {
                description: String::new(),
                program_text: String::new(),
                verdict: Verdict::Rejected(format!("description: {e}")),
            }
        }
    };
    let mut prog_rng = rngstream::stream(batch_seed, "prog", &[index]);
    let program_text = match backend.dream_program(ctx, &description, &mut prog_rng) {
        Ok(t) => t,
        Err(e) => {
            return CandidateLevel {
                description,
                program_text: String::new(),
                verdict: Verdict::Rejected(format!("program: {e}")),
            }
        }
    };
    let mut check_rng = rngstream::stream(batch_seed, "check", &[index]);
    let verdict = compile_check(&program_text, rollout_steps, &mut check_rng);
    CandidateLevel {
        description,
        program_text,
        verdict,
    }
}

/// First `m_target` valid candidates by generation index.
pub fn take_valid(candidates: Vec<CandidateLevel>, m_target: usize) -> Vec<CandidateLevel> {
    candidates
        .into_iter()
        .filter(|c| c.verdict == Verdict::Valid)
        .take(m_target)
        .collect()
}
