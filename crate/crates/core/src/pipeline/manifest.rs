//! Run manifest: the frozen record of how a run was launched.
//!
//! Everything needed to reproduce a run goes in here (config, master seed,
//! mode, backend, seed corpus) and the whole thing is dumped to
//! `manifest.json` in the output directory before the first cycle.

use std::fs;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::CurriculumConfig;

/// Which curriculum variant a run trains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunMode {
    /// Closed-loop curriculum: archive-guided parents, performance-aware
    /// descriptions, learnability-gated expansion.
    Dicode,
    /// Open-loop ablation: generation keeps running but sees no parent and
    /// no performance feedback.
    DicodeOl,
    /// Train on the target task only; the archive never grows.
    TargetOnly,
    /// Domain randomization: target task over a fixed pool of layout seeds.
    Dr,
    /// Plain replay baseline: random parents, random mutation intents,
    /// prioritized replay unchanged.
    Plr,
}

impl RunMode {
    pub const ALL: [RunMode; 5] = [
        RunMode::Dicode,
        RunMode::DicodeOl,
        RunMode::TargetOnly,
        RunMode::Dr,
        RunMode::Plr,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RunMode::Dicode => "dicode",
            RunMode::DicodeOl => "dicode-ol",
            RunMode::TargetOnly => "target-only",
            RunMode::Dr => "dr",
            RunMode::Plr => "plr",
        }
    }

    pub fn from_name(s: &str) -> Option<RunMode> {
        RunMode::ALL.into_iter().find(|m| m.name() == s)
    }

    /// Whether the mode issues generation tickets at all.
    pub fn generates(self) -> bool {
        matches!(self, RunMode::Dicode | RunMode::DicodeOl | RunMode::Plr)
    }
}

impl std::fmt::Display for RunMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for RunMode {
    type Err = String;

    fn from_str(s: &str) -> Result<RunMode, String> {
        RunMode::from_name(s).ok_or_else(|| {
            let names: Vec<&str> = RunMode::ALL.iter().map(|m| m.name()).collect();
            format!("unknown mode {s:?}, expected one of {}", names.join(", "))
        })
    }
}

/// Which generator backend fills tickets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BackendKind {
    /// Deterministic mutation engine; the default for reproducible runs.
    Mutation,
    /// Remote chat-completion endpoint configured through the environment.
    Remote,
}

impl BackendKind {
    pub fn name(self) -> &'static str {
        match self {
            BackendKind::Mutation => "mutation",
            BackendKind::Remote => "remote",
        }
    }

    pub fn from_name(s: &str) -> Option<BackendKind> {
        match s {
            "mutation" => Some(BackendKind::Mutation),
            "remote" => Some(BackendKind::Remote),
            _ => None,
        }
    }
}

impl std::fmt::Display for BackendKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for BackendKind {
    type Err = String;

    fn from_str(s: &str) -> Result<BackendKind, String> {
        BackendKind::from_name(s)
            .ok_or_else(|| format!("unknown backend {s:?}, expected mutation or remote"))
    }
}

/// The launch record for one run.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub config: CurriculumConfig,
    pub master_seed: u64,
    pub mode: RunMode,
    pub backend: BackendKind,
    /// Seed level files, sorted by name, exactly as bootstrapped.
    pub seed_levels: Vec<String>,
    pub out_dir: String,
    /// Run generation inline at issue time instead of on a worker thread.
    pub sequential: bool,
}

impl RunManifest {
    /// Build a manifest, discovering the seed corpus from the config's
    /// seed directory.
    pub fn new(
        config: CurriculumConfig,
        master_seed: u64,
        mode: RunMode,
        backend: BackendKind,
        out_dir: &str,
        sequential: bool,
    ) -> io::Result<RunManifest> {
        let seed_levels = discover_seed_levels(&config.seed_dir)?;
        Ok(RunManifest {
            config,
            master_seed,
            mode,
            backend,
            seed_levels,
            out_dir: out_dir.to_string(),
            sequential,
        })
    }

    pub fn load(path: &Path) -> io::Result<RunManifest> {
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))
    }

    pub fn save(&self, path: &Path) -> io::Result<()> {
        let mut text = serde_json::to_string_pretty(self)
            .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?;
        text.push('\n');
        fs::write(path, text)
    }
}

/// All `.lvl` files directly under `seed_dir`, sorted by file name so the
/// bootstrap order never depends on directory iteration order.
pub fn discover_seed_levels(seed_dir: &str) -> io::Result<Vec<String>> {
    let mut paths: Vec<String> = Vec::new();
    for entry in fs::read_dir(seed_dir)? {
        let path = entry?.path();
        if path.extension().is_some_and(|e| e == "lvl") {
            paths.push(path.to_string_lossy().into_owned());
        }
    }
    paths.sort();
    Ok(paths)
}
