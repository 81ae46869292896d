//! Command line frontend: training runs, standalone evaluation and
//! generation, and artifact export.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use dicode_core::archive::Archive;
use dicode_core::config::CurriculumConfig;
use dicode_core::dsl;
use dicode_core::generator::{
    build_context, generate_batch, take_valid, GeneratorBackend, MutationBackend,
    PerformanceProfile, RemoteBackend,
};
use dicode_core::pipeline::{execute, metrics_to_csv, BackendKind, RunManifest, RunMode};
use dicode_core::rngstream::stream;
use dicode_core::trainer::{evaluate_target, PolicyTable};

#[derive(Parser)]
#[command(
    name = "dicode",
    version,
    about = "Curriculum training for the two-floor crafting gridworld"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one curriculum training run to its env-step budget.
    Train {
        /// JSON config with every field explicit.
        #[arg(long)]
        config: PathBuf,
        /// dicode, dicode-ol, target-only, dr or plr.
        #[arg(long)]
        mode: RunMode,
        /// Master seed for the whole run.
        #[arg(long)]
        seed: u64,
        /// Output directory for metrics and artifacts.
        #[arg(long)]
        out: PathBuf,
        /// Run generation inline instead of on a worker thread
        /// (bit-reproducible).
        #[arg(long)]
        sequential: bool,
        /// Generator backend.
        #[arg(long, default_value = "mutation")]
        backend: CliBackend,
        /// Write into a non-empty output directory.
        #[arg(long)]
        force: bool,
    },
    /// Evaluate a saved policy on held-out target instances.
    Eval {
        /// Path to a policy.bin dump.
        #[arg(long)]
        policy: PathBuf,
        /// Number of instances to evaluate.
        #[arg(long)]
        instances: usize,
        /// File of episode seeds, one integer per line.
        #[arg(long)]
        seeds: PathBuf,
        /// Episode cap.
        #[arg(long, default_value_t = 400)]
        max_timesteps: u32,
    },
    /// Generate candidate levels standalone and write the valid ones out.
    GenTest {
        /// Generator backend.
        #[arg(long, default_value = "mutation")]
        backend: CliBackend,
        /// Parent level to mutate; omitted means open-loop generation.
        #[arg(long)]
        parent: Option<PathBuf>,
        /// How many valid levels to produce.
        #[arg(long)]
        n: usize,
        /// Directory the levels are written to.
        #[arg(long, default_value = "gen-out")]
        out: PathBuf,
        /// Generation seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Print a run's archive in JSON or DOT form.
    ArchiveExport {
        /// A run output directory.
        #[arg(long)]
        run: PathBuf,
        #[arg(long, value_enum)]
        format: ExportFormat,
    },
    /// Flatten a run's metrics stream into CSV for plotting.
    PlotData {
        /// A run output directory.
        #[arg(long)]
        run: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum CliBackend {
    Mutation,
    Remote,
}

impl From<CliBackend> for BackendKind {
    fn from(b: CliBackend) -> BackendKind {
        match b {
            CliBackend::Mutation => BackendKind::Mutation,
            CliBackend::Remote => BackendKind::Remote,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ExportFormat {
    Json,
    Dot,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train {
            config,
            mode,
            seed,
            out,
            sequential,
            backend,
            force,
        } => train(&config, mode, seed, &out, sequential, backend.into(), force),
        Command::Eval {
            policy,
            instances,
            seeds,
            max_timesteps,
        } => eval(&policy, instances, &seeds, max_timesteps),
        Command::GenTest {
            backend,
            parent,
            n,
            out,
            seed,
        } => gen_test(backend.into(), parent.as_deref(), n, &out, seed),
        Command::ArchiveExport { run, format } => archive_export(&run, format),
        Command::PlotData { run } => plot_data(&run),
    }
}

fn train(
    config_path: &Path,
    mode: RunMode,
    seed: u64,
    out: &Path,
    sequential: bool,
    backend: BackendKind,
    force: bool,
) -> Result<()> {
    let config = CurriculumConfig::load(config_path)
        .with_context(|| format!("loading config {}", config_path.display()))?;
    if out.exists() && out.read_dir()?.next().is_some() && !force {
        bail!(
            "output directory {} is not empty; pass --force to write into it",
            out.display()
        );
    }
    let manifest = RunManifest::new(config, seed, mode, backend, &out.to_string_lossy(), sequential)
        .context("collecting the seed corpus")?;
    let summary = execute(manifest)?;
    println!(
        "{} run finished: {} cycles, {} env steps, final mean return {:.4}",
        mode, summary.cycles, summary.env_steps, summary.final_eval.mean_return
    );
    println!(
        "archive {} levels, {} tickets ({} failed), {} blocking waits",
        summary.archive_size, summary.tickets_issued, summary.tickets_failed, summary.blocks
    );
    println!("artifacts in {}", out.display());
    Ok(())
}

fn eval(policy_path: &Path, instances: usize, seeds_path: &Path, max_timesteps: u32) -> Result<()> {
    let policy = PolicyTable::load(policy_path)
        .with_context(|| format!("loading policy {}", policy_path.display()))?;
    let text = fs::read_to_string(seeds_path)
        .with_context(|| format!("reading seeds {}", seeds_path.display()))?;
    let seeds: Vec<u64> = text
        .split_whitespace()
        .map(|tok| {
            tok.parse::<u64>()
                .with_context(|| format!("seed file entry {tok:?} is not an integer"))
        })
        .collect::<Result<_>>()?;
    if seeds.len() < instances {
        bail!(
            "asked for {instances} instances but {} provides only {}",
            seeds_path.display(),
            seeds.len()
        );
    }
    let report = evaluate_target(
        &policy,
        &dsl::LevelProgram::target(),
        &seeds[..instances],
        max_timesteps,
    )?;
    println!("{}", serde_json::to_string_pretty(&serde_json::json!({
        "instances": instances,
        "mean_return": report.mean_return,
        "goal_success_rate": report.goal_success_rate,
        "per_achievement_sr": report.per_achievement_sr,
    }))?);
    Ok(())
}

fn gen_test(
    backend_kind: BackendKind,
    parent: Option<&Path>,
    n: usize,
    out: &Path,
    seed: u64,
) -> Result<()> {
    let cfg = CurriculumConfig::desk_default();
    let backend: Box<dyn GeneratorBackend> = match backend_kind {
        BackendKind::Mutation => Box::new(MutationBackend::new(cfg.status_thresholds)),
        BackendKind::Remote => Box::new(RemoteBackend::from_env()?),
    };

    let mut archive = Archive::new(&cfg);
    let parent_id = match parent {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading parent {}", path.display()))?;
            let program = dsl::parse(&text)
                .with_context(|| format!("parsing parent {}", path.display()))?;
            Some(archive.insert(program, None, "gen-test parent")?)
        }
        None => None,
    };
    let ctx = build_context(
        &archive,
        parent_id,
        PerformanceProfile::zeros(),
        &cfg,
        parent_id.is_none(),
    );

    let mut rng = stream(seed, "gen-test", &[]);
    let mut kept = Vec::new();
    let mut launched = 0usize;
    for _ in 0..20 {
        if kept.len() >= n {
            break;
        }
        let batch = generate_batch(&ctx, n, 2.0, cfg.rollout_steps, backend.as_ref(), &mut rng);
        launched += batch.len();
        kept.extend(take_valid(batch, n - kept.len()));
    }
    if kept.len() < n {
        bail!("only {} of {n} candidates were valid after {launched} launches", kept.len());
    }

    fs::create_dir_all(out)?;
    for (i, cand) in kept.iter().enumerate() {
        let path = out.join(format!("gen-{:03}.lvl", i + 1));
        fs::write(&path, &cand.program_text)?;
        println!("{}  {}", path.display(), cand.description.lines().next().unwrap_or(""));
    }
    println!("{n} valid levels written to {} ({launched} launched)", out.display());
    Ok(())
}

fn archive_export(run: &Path, format: ExportFormat) -> Result<()> {
    let (name, check): (&str, fn(&str) -> bool) = match format {
        ExportFormat::Json => ("archive.json", |s| {
            serde_json::from_str::<serde_json::Value>(s).is_ok()
        }),
        ExportFormat::Dot => ("archive.dot", |s| s.starts_with("digraph")),
    };
    let path = run.join(name);
    let text =
        fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    if !check(&text) {
        bail!("{} does not look like a valid export", path.display());
    }
    print!("{text}");
    Ok(())
}

fn plot_data(run: &Path) -> Result<()> {
    let path = run.join("metrics.jsonl");
    let text =
        fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    print!("{}", metrics_to_csv(&text)?);
    Ok(())
}
