//! The run loop: bootstrap the archive from the seed corpus, alternate
//! training cycles with asynchronous generation, stream metrics at every
//! evaluation point, and dump artifacts at the end.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::archive::{Archive, ArchiveError, NodeId};
use crate::config::ConfigError;
use crate::dsl::{self, CompileError, LevelProgram};
use crate::generator::{
    build_context, take_valid, BackendError, CandidateLevel, GenerationContext, GeneratorBackend,
    MutationBackend, PerformanceProfile, RemoteBackend,
};
use crate::pipeline::manifest::{BackendKind, RunManifest, RunMode};
use crate::pipeline::ticket::{
    await_generation, AwaitDecision, GenerationRequest, GenerationTicket, PollResult,
    SequentialExecutor, ThreadedExecutor, TicketExecutor, TicketStatus,
};
use crate::registry::Achievement;
use crate::rngstream::{derive, stream};
use crate::trainer::{
    plan_batch, BatchPlan, BatchSource, DrSeedPool, EpisodeKind, EvalReport, PolicyError, Trainer,
};
use crate::Real;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("seed level {path}: {message}")]
    Seed { path: String, message: String },
    #[error(transparent)]
    Archive(#[from] ArchiveError),
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error("{0}")]
    Invalid(String),
}

/// One `metrics.jsonl` line, written at every evaluation point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub cycle: u64,
    pub env_steps: u64,
    pub mean_return: f64,
    /// Success rate per achievement, registry order.
    pub per_achievement_sr: Vec<f64>,
    pub archive_size: usize,
    pub bonus: f64,
}

/// What one call to `run_cycle` did.
#[derive(Debug, Clone)]
pub struct CycleReport {
    pub cycle: u64,
    /// Levels inserted into the archive at this boundary.
    pub new_levels: Vec<NodeId>,
    pub episodes: usize,
    pub mean_target_return: Real,
    pub evaluated: Option<EvalReport>,
}

/// End-of-run accounting.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub cycles: u64,
    pub env_steps: u64,
    pub final_eval: EvalReport,
    pub tickets_issued: u64,
    pub tickets_failed: u64,
    pub blocks: u64,
    pub archive_size: usize,
    pub metrics: Vec<MetricsRecord>,
}

/// Seed the archive with the corpus programs as parentless roots.
///
/// Any unreadable, unparsable or invalid seed aborts the run: a curriculum
/// started from a broken corpus is not worth training.
pub fn bootstrap(archive: &mut Archive, seed_paths: &[String]) -> Result<Vec<NodeId>, PipelineError> {
    if seed_paths.is_empty() {
        return Err(PipelineError::Invalid(
            "seed corpus is empty; nothing to bootstrap the archive with".into(),
        ));
    }
    let mut ids = Vec::with_capacity(seed_paths.len());
    for path in seed_paths {
        let seed_err = |message: String| PipelineError::Seed {
            path: path.clone(),
            message,
        };
        let text = fs::read_to_string(path).map_err(|e| seed_err(e.to_string()))?;
        let program = dsl::parse(&text).map_err(|e| seed_err(e.to_string()))?;
        let problems = dsl::validate(&program);
        if !problems.is_empty() {
            return Err(seed_err(problems.join("; ")));
        }
        ids.push(archive.insert(program, None, "seed level")?);
    }
    Ok(ids)
}

fn make_backend(manifest: &RunManifest) -> Result<Arc<dyn GeneratorBackend>, PipelineError> {
    Ok(match manifest.backend {
        BackendKind::Mutation => Arc::new(MutationBackend::new(manifest.config.status_thresholds)),
        BackendKind::Remote => Arc::new(RemoteBackend::from_env()?),
    })
}

/// One curriculum run: the archive, the trainer, and the single
/// generation slot between them.
pub struct Pipeline {
    manifest: RunManifest,
    archive: Archive,
    trainer: Trainer,
    target: LevelProgram,
    eval_seeds: Vec<u64>,
    dr_pool: DrSeedPool,
    executor: Box<dyn TicketExecutor>,
    ticket: Option<GenerationTicket>,
    tickets_issued: u64,
    tickets_failed: u64,
    blocks: u64,
    cycle: u64,
    last_eval: Option<EvalReport>,
    last_eval_cycle: Option<u64>,
    plan_rng: ChaCha8Rng,
    parent_rng: ChaCha8Rng,
    dr_rng: ChaCha8Rng,
    metrics: Vec<MetricsRecord>,
    metrics_file: Option<fs::File>,
}

impl Pipeline {
    /// Build a pipeline with the executor implied by the manifest.
    pub fn new(manifest: RunManifest) -> Result<Pipeline, PipelineError> {
        let backend = make_backend(&manifest)?;
        let executor: Box<dyn TicketExecutor> = if manifest.sequential {
            Box::new(SequentialExecutor::new(backend))
        } else {
            Box::new(ThreadedExecutor::new(backend))
        };
        Pipeline::with_executor(manifest, executor)
    }

    /// Injection point for tests: any executor, same loop.
    pub fn with_executor(
        manifest: RunManifest,
        executor: Box<dyn TicketExecutor>,
    ) -> Result<Pipeline, PipelineError> {
        manifest.config.validate()?;
        let cfg = &manifest.config;
        let mut archive = Archive::new(cfg);
        bootstrap(&mut archive, &manifest.seed_levels)?;
        let master = manifest.master_seed;
        let eval_seeds = (0..cfg.eval_instances)
            .map(|i| derive(master, "eval", &[i as u64]))
            .collect();
        Ok(Pipeline {
            trainer: Trainer::new(cfg),
            target: LevelProgram::target(),
            eval_seeds,
            dr_pool: DrSeedPool::new(master, cfg.dr_pool_size),
            plan_rng: stream(master, "plan", &[]),
            parent_rng: stream(master, "parent", &[]),
            dr_rng: stream(master, "dr", &[]),
            archive,
            manifest,
            executor,
            ticket: None,
            tickets_issued: 0,
            tickets_failed: 0,
            blocks: 0,
            cycle: 0,
            last_eval: None,
            last_eval_cycle: None,
            metrics: Vec::new(),
            metrics_file: None,
        })
    }

    pub fn archive(&self) -> &Archive {
        &self.archive
    }

    pub fn trainer(&self) -> &Trainer {
        &self.trainer
    }

    pub fn metrics(&self) -> &[MetricsRecord] {
        &self.metrics
    }

    pub fn cycle(&self) -> u64 {
        self.cycle
    }

    pub fn blocks(&self) -> u64 {
        self.blocks
    }

    pub fn tickets_issued(&self) -> u64 {
        self.tickets_issued
    }

    pub fn tickets_failed(&self) -> u64 {
        self.tickets_failed
    }

    /// Stream every future metrics record to `path` as it is recorded.
    pub fn attach_metrics_file(&mut self, path: &Path) -> Result<(), PipelineError> {
        self.metrics_file = Some(fs::File::create(path)?);
        Ok(())
    }

    /// Target performance as the generator sees it: the most recent
    /// held-out evaluation, or all zeros before the first one.
    fn target_profile(&self) -> PerformanceProfile {
        match &self.last_eval {
            Some(r) => PerformanceProfile {
                goal_success_rate: r.goal_success_rate,
                per_achievement_sr: r.per_achievement_sr.clone(),
            },
            None => PerformanceProfile::zeros(),
        }
    }

    /// Poll the in-flight ticket at a cycle boundary, applying the
    /// blocking rule when delivery is overdue. Returns levels added to
    /// the archive.
    fn collect_generation(&mut self) -> Result<Vec<NodeId>, PipelineError> {
        let Some(ticket) = self.ticket.as_mut() else {
            return Ok(Vec::new());
        };
        let elapsed = self.cycle - ticket.issued_at_cycle;
        let cadence = self.manifest.config.generation_cadence;
        match self.executor.poll(elapsed) {
            PollResult::Ready(batch) => ticket.status = TicketStatus::Delivered(batch),
            PollResult::Broken(msg) => ticket.status = TicketStatus::Failed(msg),
            PollResult::Pending => {
                if await_generation(ticket, elapsed, cadence) == AwaitDecision::Block {
                    self.blocks += 1;
                    log::info!(
                        "cycle {}: generation overdue ({elapsed} cycles), blocking",
                        self.cycle
                    );
                    match self.executor.wait() {
                        Ok(batch) => ticket.status = TicketStatus::Delivered(batch),
                        Err(msg) => ticket.status = TicketStatus::Failed(msg),
                    }
                }
            }
        }
        let ticket = self.ticket.take().expect("ticket checked above");
        match ticket.status {
            TicketStatus::InFlight => {
                self.ticket = Some(ticket);
                Ok(Vec::new())
            }
            TicketStatus::Failed(msg) => {
                self.tickets_failed += 1;
                log::warn!(
                    "ticket from cycle {} failed: {msg}; training continues",
                    ticket.issued_at_cycle
                );
                Ok(Vec::new())
            }
            TicketStatus::Delivered(batch) => self.insert_batch(batch, ticket.parent),
        }
    }

    /// Keep the first `m_target` valid candidates and graft them onto the
    /// lineage graph.
    fn insert_batch(
        &mut self,
        batch: Vec<CandidateLevel>,
        parent: Option<NodeId>,
    ) -> Result<Vec<NodeId>, PipelineError> {
        let valid = take_valid(batch, self.manifest.config.m_target);
        let mut ids = Vec::with_capacity(valid.len());
        for cand in valid {
            match dsl::parse(&cand.program_text) {
                Ok(program) => ids.push(self.archive.insert(program, parent, &cand.description)?),
                Err(e) => log::warn!("checked candidate failed re-parse, dropping: {e}"),
            }
        }
        if ids.is_empty() {
            log::info!("cycle {}: generation delivered no usable levels", self.cycle);
        }
        Ok(ids)
    }

    /// Issue a ticket when the slot is free and the cadence boundary hits.
    fn maybe_issue(&mut self) {
        let mode = self.manifest.mode;
        if !mode.generates() || self.ticket.is_some() {
            return;
        }
        let cfg = &self.manifest.config;
        if self.cycle % cfg.generation_cadence as u64 != 0 {
            return;
        }
        let (parent, ctx) = match mode {
            RunMode::Dicode => match self.archive.sample_parent(&mut self.parent_rng) {
                Some(id) => {
                    let ctx = build_context(&self.archive, Some(id), self.target_profile(), cfg, false);
                    (Some(id), ctx)
                }
                None => {
                    log::info!("cycle {}: no eligible parent, skipping generation", self.cycle);
                    return;
                }
            },
            RunMode::DicodeOl => {
                // The ablation withholds parent and performance feedback,
                // so the context gets a zeroed target profile too.
                let ctx = build_context(&self.archive, None, PerformanceProfile::zeros(), cfg, true);
                (None, ctx)
            }
            RunMode::Plr => {
                let id = self.parent_rng.gen_range(0..self.archive.len());
                let node = self.archive.node(id).expect("uniform draw in range");
                let ctx = GenerationContext {
                    domain_context_1: String::new(),
                    domain_context_2: String::new(),
                    parent_program: Some(node.program.clone()),
                    parent_perf: None,
                    target_perf: PerformanceProfile::zeros(),
                    mutation_instructions_1: String::new(),
                    mutation_instructions_2: String::new(),
                    few_shot: Vec::new(),
                    open_loop: false,
                };
                (Some(id), ctx)
            }
            RunMode::TargetOnly | RunMode::Dr => unreachable!("filtered by generates()"),
        };
        let req = GenerationRequest {
            ctx,
            m_target: cfg.m_target,
            surplus_factor: cfg.surplus_factor,
            rollout_steps: cfg.rollout_steps,
            random_descriptions: mode == RunMode::Plr,
            batch_seed: derive(self.manifest.master_seed, "ticket", &[self.tickets_issued]),
        };
        self.executor.launch(req);
        self.ticket = Some(GenerationTicket {
            issued_at_cycle: self.cycle,
            parent,
            status: TicketStatus::InFlight,
        });
        self.tickets_issued += 1;
    }

    /// Seed for the `ordinal`-th target episode of cycle `t`. Domain
    /// randomization draws from its fixed pool; everything else gets a
    /// fresh derived seed.
    fn target_episode_seed(&mut self, t: u64, ordinal: u64) -> u64 {
        if self.manifest.mode == RunMode::Dr {
            self.dr_pool.draw(&mut self.dr_rng)
        } else {
            derive(self.manifest.master_seed, "episode", &[t, ordinal])
        }
    }

    /// One full cycle: collect generation, issue, train the batch plan,
    /// refresh the bonus, evaluate if due.
    pub fn run_cycle(&mut self) -> Result<CycleReport, PipelineError> {
        let cfg = self.manifest.config.clone();
        let t = self.cycle;

        let new_ids = if self.manifest.mode.generates() {
            self.collect_generation()?
        } else {
            Vec::new()
        };
        self.maybe_issue();

        let plan = match self.manifest.mode {
            RunMode::TargetOnly | RunMode::Dr => BatchPlan::all_target(cfg.updates_per_cycle, t),
            _ => plan_batch(t, &new_ids, &mut self.archive, &cfg, &mut self.plan_rng),
        };

        let mut target_return_sum = 0.0;
        let mut target_episodes = 0usize;
        let mut ordinal = 0u64;
        for slot in &plan.slots {
            match slot.source {
                BatchSource::Target => {
                    for _ in 0..slot.episodes {
                        let seed = self.target_episode_seed(t, ordinal);
                        ordinal += 1;
                        let stats =
                            self.trainer.run_episode(&self.target, EpisodeKind::Target, seed)?;
                        target_return_sum += stats.undiscounted_return;
                        target_episodes += 1;
                    }
                }
                BatchSource::New(id) | BatchSource::Replay(id) => {
                    let program = self.archive.node(id)?.program.clone();
                    for _ in 0..slot.episodes {
                        let seed = derive(self.manifest.master_seed, "episode", &[t, ordinal]);
                        ordinal += 1;
                        match self.trainer.run_episode(&program, EpisodeKind::Generated, seed) {
                            Ok(stats) => {
                                self.archive.record_episode_detail(id, stats.success, stats.unlocked)?;
                            }
                            Err(e) => {
                                // A layout draw can make a placement
                                // infeasible; score it as a failure rather
                                // than killing the run.
                                log::warn!("level {id}, seed {seed}: {e}; recorded as failure");
                                self.archive.record_episode(id, false)?;
                            }
                        }
                    }
                }
            }
        }

        let mean_target = if target_episodes == 0 {
            self.trainer.bonus.last_target_return
        } else {
            target_return_sum / target_episodes as Real
        };
        self.trainer.bonus.update(mean_target);

        let evaluated = if t % cfg.eval_interval_cycles as u64 == 0 {
            Some(self.evaluate_and_record(t)?)
        } else {
            None
        };

        self.cycle += 1;
        Ok(CycleReport {
            cycle: t,
            new_levels: new_ids,
            episodes: plan.total_episodes(),
            mean_target_return: mean_target,
            evaluated,
        })
    }

    /// Greedy held-out evaluation on the fixed seed set, recorded as one
    /// metrics line.
    fn evaluate_and_record(&mut self, cycle: u64) -> Result<EvalReport, PipelineError> {
        let report = crate::trainer::evaluate_target(
            &self.trainer.policy,
            &self.target,
            &self.eval_seeds,
            self.manifest.config.max_timesteps as u32,
        )?;
        let record = MetricsRecord {
            cycle,
            env_steps: self.trainer.env_steps,
            mean_return: report.mean_return,
            per_achievement_sr: report.per_achievement_sr.clone(),
            archive_size: self.archive.len(),
            bonus: self.trainer.bonus.current,
        };
        if let Some(file) = &mut self.metrics_file {
            let mut line = serde_json::to_string(&record)?;
            line.push('\n');
            file.write_all(line.as_bytes())?;
            file.flush()?;
        }
        self.metrics.push(record);
        self.last_eval = Some(report.clone());
        self.last_eval_cycle = Some(cycle);
        Ok(report)
    }

    /// Run cycles until the env-step budget is spent. A final evaluation
    /// always lands on the last trained cycle.
    pub fn run(&mut self) -> Result<RunSummary, PipelineError> {
        while self.trainer.env_steps < self.manifest.config.total_env_steps {
            self.run_cycle()?;
        }
        let last_trained = self.cycle.saturating_sub(1);
        let final_eval = match (&self.last_eval, self.last_eval_cycle) {
            (Some(report), Some(c)) if c == last_trained => report.clone(),
            _ => self.evaluate_and_record(last_trained)?,
        };
        Ok(RunSummary {
            cycles: self.cycle,
            env_steps: self.trainer.env_steps,
            final_eval,
            tickets_issued: self.tickets_issued,
            tickets_failed: self.tickets_failed,
            blocks: self.blocks,
            archive_size: self.archive.len(),
            metrics: self.metrics.clone(),
        })
    }

    /// Dump the lineage graph and the policy next to the metrics stream.
    pub fn write_artifacts(&self, out: &Path) -> Result<(), PipelineError> {
        let mut archive_json = serde_json::to_string_pretty(&self.archive.to_json())?;
        archive_json.push('\n');
        fs::write(out.join("archive.json"), archive_json)?;
        fs::write(out.join("archive.dot"), self.archive.to_dot())?;
        self.trainer.policy.save(&out.join("policy.bin"))?;
        Ok(())
    }
}

/// Launch a full run from a manifest: prepare the output directory, write
/// the manifest, run to budget, dump artifacts.
pub fn execute(manifest: RunManifest) -> Result<RunSummary, PipelineError> {
    let out = PathBuf::from(&manifest.out_dir);
    fs::create_dir_all(&out)?;
    manifest.save(&out.join("manifest.json"))?;
    let mut pipeline = Pipeline::new(manifest)?;
    pipeline.attach_metrics_file(&out.join("metrics.jsonl"))?;
    let summary = pipeline.run()?;
    pipeline.write_artifacts(&out)?;
    Ok(summary)
}

/// Flatten a metrics stream into CSV for plotting, one column per
/// achievement.
pub fn metrics_to_csv(jsonl: &str) -> Result<String, PipelineError> {
    let mut out = String::from("cycle,env_steps,mean_return");
    for a in Achievement::ALL {
        out.push_str(",sr_");
        out.push_str(&a.name().to_lowercase());
    }
    out.push_str(",archive_size,bonus\n");
    for line in jsonl.lines().filter(|l| !l.trim().is_empty()) {
        let record: MetricsRecord = serde_json::from_str(line)?;
        if record.per_achievement_sr.len() != Achievement::COUNT {
            return Err(PipelineError::Invalid(format!(
                "metrics line for cycle {} has {} achievement rates, expected {}",
                record.cycle,
                record.per_achievement_sr.len(),
                Achievement::COUNT
            )));
        }
        out.push_str(&format!(
            "{},{},{}",
            record.cycle, record.env_steps, record.mean_return
        ));
        for sr in &record.per_achievement_sr {
            out.push_str(&format!(",{sr}"));
        }
        out.push_str(&format!(",{},{}\n", record.archive_size, record.bonus));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::Verdict;
    use crate::registry::{AchSet, Item};
    use std::collections::BTreeMap;
    use std::sync::atomic::{AtomicUsize, Ordering};
    use tempfile::TempDir;

    /// Four small seed programs in a fresh directory.
    fn seed_corpus(dir: &Path) -> Vec<String> {
        let mut collect = LevelProgram::minimal("seed-collect", AchSet::single(Achievement::CollectWood));
        collect.inventory_overrides = BTreeMap::new();

        let mut craft = LevelProgram::minimal(
            "seed-craft",
            AchSet::from_iter([Achievement::CollectWood, Achievement::PlaceTable]),
        );
        craft.inventory_overrides.insert(Item::Wood, 2);

        let combat = LevelProgram::minimal("seed-combat", AchSet::single(Achievement::DefeatGuard));
        let survive = LevelProgram::minimal(
            "seed-survive",
            AchSet::from_iter([Achievement::CollectWood, Achievement::CollectStone]),
        );

        let programs = [collect, craft, combat, survive];
        let mut paths = Vec::new();
        for p in &programs {
            let path = dir.join(format!("{}.lvl", p.name));
            fs::write(&path, dsl::serialize(p)).unwrap();
            paths.push(path.to_string_lossy().into_owned());
        }
        paths.sort();
        paths
    }

    /// A budget small enough for unit tests: short episodes, few cycles.
    fn tiny_config(seed_dir: &str) -> crate::config::CurriculumConfig {
        let mut cfg = crate::config::CurriculumConfig::desk_default();
        cfg.max_timesteps = 40;
        cfg.total_env_steps = 2_400;
        cfg.updates_per_cycle = 10;
        cfg.eval_interval_cycles = 2;
        cfg.eval_instances = 4;
        cfg.m_target = 3;
        cfg.surplus_factor = 1.5;
        cfg.rollout_steps = 8;
        cfg.min_episodes = 4;
        cfg.recency_window = 8;
        cfg.dr_pool_size = 8;
        cfg.seed_dir = seed_dir.to_string();
        cfg
    }

    fn manifest(mode: RunMode, dir: &TempDir) -> RunManifest {
        let seed_dir = dir.path().join("seeds");
        fs::create_dir_all(&seed_dir).unwrap();
        seed_corpus(&seed_dir);
        let cfg = tiny_config(&seed_dir.to_string_lossy());
        RunManifest::new(
            cfg,
            41,
            mode,
            BackendKind::Mutation,
            &dir.path().join("out").to_string_lossy(),
            true,
        )
        .unwrap()
    }

    /// Grade the first seed as a solved leaf so parent sampling succeeds
    /// from cycle 0. Ticket-flow tests stay about the ticket machinery
    /// instead of how fast the tiny trainer happens to learn.
    fn prime_parent(p: &mut Pipeline) {
        for _ in 0..p.manifest.config.min_episodes {
            p.archive.record_episode(0, true).unwrap();
        }
        assert!(!p.archive.eligible_parents().is_empty());
    }

    #[test]
    fn bootstrap_inserts_sorted_parentless_roots() {
        let dir = tempfile::tempdir().unwrap();
        let paths = seed_corpus(dir.path());
        let cfg = tiny_config(".");
        let mut archive = Archive::new(&cfg);
        let ids = bootstrap(&mut archive, &paths).unwrap();
        assert_eq!(ids, vec![0, 1, 2, 3]);
        assert_eq!(archive.len(), 4);
        for id in ids {
            let node = archive.node(id).unwrap();
            assert!(node.parent.is_none());
            assert!(node.program.name.starts_with("seed-"));
        }
        // Sorted by file name: collect < combat < craft < survive.
        assert_eq!(archive.node(0).unwrap().program.name, "seed-collect");
        assert_eq!(archive.node(1).unwrap().program.name, "seed-combat");
    }

    #[test]
    fn bootstrap_rejects_corrupt_seed_with_its_path() {
        let dir = tempfile::tempdir().unwrap();
        let mut paths = seed_corpus(dir.path());
        let bad = dir.path().join("zz-broken.lvl");
        fs::write(&bad, "level \"broken\" {\n  goal { NOT_AN_ACHIEVEMENT }\n}\n").unwrap();
        paths.push(bad.to_string_lossy().into_owned());

        let cfg = tiny_config(".");
        let mut archive = Archive::new(&cfg);
        let err = bootstrap(&mut archive, &paths).unwrap_err();
        match err {
            PipelineError::Seed { path, .. } => assert!(path.ends_with("zz-broken.lvl")),
            other => panic!("expected a seed error, got {other}"),
        }
    }

    #[test]
    fn bootstrap_requires_a_corpus() {
        let cfg = tiny_config(".");
        let mut archive = Archive::new(&cfg);
        assert!(matches!(
            bootstrap(&mut archive, &[]),
            Err(PipelineError::Invalid(_))
        ));
    }

    /// Delivers an empty batch after a fixed number of cycles; used to
    /// exercise the blocking rule without a real backend.
    struct StubExecutor {
        latency: u64,
        issued_at: Option<u64>,
    }

    impl StubExecutor {
        fn new(latency: u64) -> StubExecutor {
            StubExecutor {
                latency,
                issued_at: None,
            }
        }
    }

    impl TicketExecutor for StubExecutor {
        fn launch(&mut self, _req: GenerationRequest) {
            self.issued_at = Some(0);
        }

        fn poll(&mut self, cycles_elapsed: u64) -> PollResult {
            if self.issued_at.is_none() {
                return PollResult::Broken("poll without launch".into());
            }
            if cycles_elapsed > self.latency {
                self.issued_at = None;
                PollResult::Ready(Vec::new())
            } else {
                PollResult::Pending
            }
        }

        fn wait(&mut self) -> Result<Vec<CandidateLevel>, String> {
            self.issued_at = None;
            Ok(Vec::new())
        }
    }

    /// Never delivers; `wait` fails too.
    struct BrokenExecutor;

    impl TicketExecutor for BrokenExecutor {
        fn launch(&mut self, _req: GenerationRequest) {}

        fn poll(&mut self, _cycles_elapsed: u64) -> PollResult {
            PollResult::Pending
        }

        fn wait(&mut self) -> Result<Vec<CandidateLevel>, String> {
            Err("backend is down".into())
        }
    }

    #[test]
    fn blocking_matrix_matches_the_rule() {
        // A ticket with delivery latency L blocks training exactly when
        // L >= cadence - 1.
        for cadence in [2usize, 3, 4] {
            for latency in 0..5u64 {
                let dir = tempfile::tempdir().unwrap();
                let mut m = manifest(RunMode::Dicode, &dir);
                m.config.generation_cadence = cadence;
                let mut p =
                    Pipeline::with_executor(m, Box::new(StubExecutor::new(latency))).unwrap();
                prime_parent(&mut p);
                for _ in 0..10 {
                    p.run_cycle().unwrap();
                }
                let should_block = latency >= (cadence - 1) as u64;
                assert_eq!(
                    p.blocks() > 0,
                    should_block,
                    "cadence {cadence}, latency {latency}, blocks {}",
                    p.blocks()
                );
                assert!(p.tickets_issued() > 0);
            }
        }
    }

    #[test]
    fn failing_backend_never_stalls_training() {
        let dir = tempfile::tempdir().unwrap();
        let m = manifest(RunMode::Dicode, &dir);
        let mut p = Pipeline::with_executor(m, Box::new(BrokenExecutor)).unwrap();
        prime_parent(&mut p);
        let summary = p.run().unwrap();
        assert!(summary.env_steps >= 2_400);
        assert!(summary.tickets_failed > 0, "broken tickets surface as failures");
        assert_eq!(summary.archive_size, 4, "nothing was ever delivered");
        assert!(!summary.metrics.is_empty());
    }

    /// Counts phase calls and delegates to the mutation engine.
    struct CountingBackend {
        inner: MutationBackend,
        descriptions: AtomicUsize,
        programs: AtomicUsize,
    }

    impl CountingBackend {
        fn new() -> CountingBackend {
            CountingBackend {
                inner: MutationBackend::new([0.75, 0.50, 0.25]),
                descriptions: AtomicUsize::new(0),
                programs: AtomicUsize::new(0),
            }
        }
    }

    impl GeneratorBackend for CountingBackend {
        fn dream_description(
            &self,
            ctx: &GenerationContext,
            rng: &mut ChaCha8Rng,
        ) -> Result<String, BackendError> {
            self.descriptions.fetch_add(1, Ordering::SeqCst);
            self.inner.dream_description(ctx, rng)
        }

        fn dream_program(
            &self,
            ctx: &GenerationContext,
            description: &str,
            rng: &mut ChaCha8Rng,
        ) -> Result<String, BackendError> {
            self.programs.fetch_add(1, Ordering::SeqCst);
            self.inner.dream_program(ctx, description, rng)
        }
    }

    #[test]
    fn plr_generates_without_ever_asking_for_descriptions() {
        let dir = tempfile::tempdir().unwrap();
        let m = manifest(RunMode::Plr, &dir);
        let backend = Arc::new(CountingBackend::new());
        let counter = Arc::clone(&backend);
        let mut p =
            Pipeline::with_executor(m, Box::new(SequentialExecutor::new(backend))).unwrap();
        let summary = p.run().unwrap();
        assert!(summary.tickets_issued > 0);
        assert!(
            counter.programs.load(Ordering::SeqCst) > 0,
            "programs still come from the backend"
        );
        assert_eq!(
            counter.descriptions.load(Ordering::SeqCst),
            0,
            "plain replay must not use performance-conditioned descriptions"
        );
    }

    #[test]
    fn target_only_and_dr_never_generate() {
        for mode in [RunMode::TargetOnly, RunMode::Dr] {
            let dir = tempfile::tempdir().unwrap();
            let m = manifest(mode, &dir);
            let backend = Arc::new(CountingBackend::new());
            let counter = Arc::clone(&backend);
            let mut p =
                Pipeline::with_executor(m, Box::new(SequentialExecutor::new(backend))).unwrap();
            let summary = p.run().unwrap();
            assert_eq!(summary.tickets_issued, 0);
            assert_eq!(summary.archive_size, 4);
            assert_eq!(counter.programs.load(Ordering::SeqCst), 0);
            assert!(!summary.metrics.is_empty());
        }
    }

    #[test]
    fn dr_draws_target_seeds_from_its_pool() {
        let dir = tempfile::tempdir().unwrap();
        let m = manifest(RunMode::Dr, &dir);
        let backend = Arc::new(CountingBackend::new());
        let mut p =
            Pipeline::with_executor(m, Box::new(SequentialExecutor::new(backend))).unwrap();
        let pool = p.dr_pool.clone();
        for ordinal in 0..50 {
            let seed = p.target_episode_seed(3, ordinal);
            assert!(pool.contains(seed), "dr seed {seed} outside the pool");
        }

        let dir2 = tempfile::tempdir().unwrap();
        let m2 = manifest(RunMode::TargetOnly, &dir2);
        let backend2 = Arc::new(CountingBackend::new());
        let mut p2 =
            Pipeline::with_executor(m2, Box::new(SequentialExecutor::new(backend2))).unwrap();
        let seed = p2.target_episode_seed(3, 0);
        assert_eq!(seed, derive(41, "episode", &[3, 0]));
    }

    #[test]
    fn dicode_run_grows_archive_and_streams_metrics() {
        let dir = tempfile::tempdir().unwrap();
        let m = manifest(RunMode::Dicode, &dir);
        let mut p = Pipeline::new(m).unwrap();
        prime_parent(&mut p);
        let summary = p.run().unwrap();
        assert!(summary.env_steps >= 2_400);
        assert!(summary.cycles > 3);
        assert!(summary.tickets_issued > 0);
        assert!(summary.archive_size > 4, "the curriculum should add levels");
        // Metrics cover cycle 0 and the final cycle, monotone in steps.
        assert_eq!(summary.metrics.first().unwrap().cycle, 0);
        assert_eq!(summary.metrics.last().unwrap().cycle, summary.cycles - 1);
        for pair in summary.metrics.windows(2) {
            assert!(pair[1].env_steps > pair[0].env_steps);
            assert!(pair[1].cycle > pair[0].cycle);
        }
        let last = summary.metrics.last().unwrap();
        assert_eq!(last.env_steps, summary.env_steps);
        assert_eq!(last.archive_size, summary.archive_size);
        assert_eq!(last.per_achievement_sr.len(), Achievement::COUNT);
    }

    #[test]
    fn open_loop_levels_are_parentless() {
        let dir = tempfile::tempdir().unwrap();
        let m = manifest(RunMode::DicodeOl, &dir);
        let mut p = Pipeline::new(m).unwrap();
        let summary = p.run().unwrap();
        assert!(summary.archive_size > 4);
        for node in p.archive().nodes().skip(4) {
            assert!(node.parent.is_none(), "open-loop node {} has a parent", node.id);
        }
    }

    #[test]
    fn sequential_reruns_are_bit_identical() {
        let run = || {
            let dir = tempfile::tempdir().unwrap();
            let m = manifest(RunMode::Dicode, &dir);
            let mut p = Pipeline::new(m).unwrap();
            let summary = p.run().unwrap();
            let lines: Vec<String> = summary
                .metrics
                .iter()
                .map(|r| serde_json::to_string(r).unwrap())
                .collect();
            (lines, p.trainer().policy.fingerprint(), summary.archive_size)
        };
        let (a_lines, a_fp, a_size) = run();
        let (b_lines, b_fp, b_size) = run();
        assert_eq!(a_lines, b_lines);
        assert_eq!(a_fp, b_fp);
        assert_eq!(a_size, b_size);
    }

    #[test]
    fn execute_writes_every_artifact() {
        let dir = tempfile::tempdir().unwrap();
        let m = manifest(RunMode::Dicode, &dir);
        let out = PathBuf::from(&m.out_dir);
        let summary = execute(m).unwrap();

        for name in ["manifest.json", "metrics.jsonl", "archive.json", "archive.dot", "policy.bin"] {
            assert!(out.join(name).exists(), "{name} missing");
        }
        let jsonl = fs::read_to_string(out.join("metrics.jsonl")).unwrap();
        assert_eq!(jsonl.lines().count(), summary.metrics.len());
        let first: MetricsRecord = serde_json::from_str(jsonl.lines().next().unwrap()).unwrap();
        assert_eq!(first.cycle, 0);
        assert_eq!(first.archive_size, 4);

        // Field order in the stream is part of the format.
        let keys: Vec<&str> = jsonl
            .lines()
            .next()
            .unwrap()
            .split('"')
            .skip(1)
            .step_by(2)
            .collect();
        assert_eq!(
            keys,
            ["cycle", "env_steps", "mean_return", "per_achievement_sr", "archive_size", "bonus"]
        );

        let manifest_back = RunManifest::load(&out.join("manifest.json")).unwrap();
        assert_eq!(manifest_back.mode, RunMode::Dicode);

        let policy = crate::trainer::PolicyTable::load(&out.join("policy.bin")).unwrap();
        assert!(policy.fingerprint() != 0);

        let csv = metrics_to_csv(&jsonl).unwrap();
        assert!(csv.starts_with("cycle,env_steps,mean_return,sr_collect_wood"));
        assert_eq!(csv.lines().count(), summary.metrics.len() + 1);
    }

    #[test]
    fn bonus_follows_previous_cycle_target_return() {
        let dir = tempfile::tempdir().unwrap();
        let m = manifest(RunMode::TargetOnly, &dir);
        let floor = m.config.bonus_floor;
        let backend = Arc::new(CountingBackend::new());
        let mut p =
            Pipeline::with_executor(m, Box::new(SequentialExecutor::new(backend))).unwrap();
        let report = p.run_cycle().unwrap();
        let expected = (2.0 * report.mean_target_return).max(floor);
        assert!((p.trainer().bonus.current - expected).abs() < 1e-12);
    }

    #[test]
    fn delivered_batch_respects_m_target_cap() {
        let dir = tempfile::tempdir().unwrap();
        let m = manifest(RunMode::Dicode, &dir);
        let cap = m.config.m_target;
        let mut p = Pipeline::new(m).unwrap();
        prime_parent(&mut p);
        let mut inserted_per_cycle = Vec::new();
        for _ in 0..8 {
            let report = p.run_cycle().unwrap();
            if !report.new_levels.is_empty() {
                inserted_per_cycle.push(report.new_levels.len());
            }
        }
        assert!(!inserted_per_cycle.is_empty());
        assert!(inserted_per_cycle.iter().all(|&n| n <= cap));
    }

    #[test]
    fn metrics_to_csv_rejects_malformed_rates() {
        let record = MetricsRecord {
            cycle: 0,
            env_steps: 10,
            mean_return: 0.5,
            per_achievement_sr: vec![0.0; 3],
            archive_size: 4,
            bonus: 1.0,
        };
        let line = serde_json::to_string(&record).unwrap();
        assert!(matches!(
            metrics_to_csv(&line),
            Err(PipelineError::Invalid(_))
        ));
    }

    #[test]
    fn candidates_delivered_while_pending_do_not_double_insert() {
        // A stub that returns one valid candidate; checks slot lifecycle.
        struct OneShot {
            batch: Option<Vec<CandidateLevel>>,
        }
        impl TicketExecutor for OneShot {
            fn launch(&mut self, _req: GenerationRequest) {
                let program = LevelProgram::minimal("one-shot", AchSet::single(Achievement::CollectWood));
                self.batch = Some(vec![CandidateLevel {
                    description: "persist".into(),
                    program_text: dsl::serialize(&program),
                    verdict: Verdict::Valid,
                }]);
            }
            fn poll(&mut self, _e: u64) -> PollResult {
                match self.batch.take() {
                    Some(b) => PollResult::Ready(b),
                    None => PollResult::Broken("empty slot".into()),
                }
            }
            fn wait(&mut self) -> Result<Vec<CandidateLevel>, String> {
                self.batch.take().ok_or_else(|| "empty slot".into())
            }
        }

        let dir = tempfile::tempdir().unwrap();
        let m = manifest(RunMode::Dicode, &dir);
        let mut p = Pipeline::with_executor(m, Box::new(OneShot { batch: None })).unwrap();
        prime_parent(&mut p);
        let mut total_inserted = 0;
        for _ in 0..6 {
            total_inserted += p.run_cycle().unwrap().new_levels.len();
        }
        assert!(total_inserted > 0);
        assert_eq!(total_inserted as u64, p.tickets_issued());
        assert_eq!(p.archive().len(), 4 + total_inserted);
    }
}
