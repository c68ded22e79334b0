use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use pepr_core::history::HistoryStore;
use pepr_core::patterns::PatternRegistry;
use pepr_core::ranker::{RankerConfig, DEFAULT_EM_ALPHA};
use serde::Deserialize;

pub const DEFAULT_WORKSPACE: &str = "pepr.toml";
const DEFAULT_HISTORY: &str = "pepr-history.json";

/// Workspace file contents. Relative paths are taken relative to the file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct WorkspaceFile {
    history: Option<PathBuf>,
    patterns: Option<PathBuf>,
    em_alpha: Option<f64>,
    #[serde(default)]
    tie_break: Vec<String>,
}

#[derive(Debug)]
pub struct Workspace {
    pub history_path: PathBuf,
    pub patterns_path: Option<PathBuf>,
    pub ranker: RankerConfig,
}

impl Workspace {
    /// Opens the named workspace file, or `pepr.toml` in the current
    /// directory if it exists, or falls back to defaults.
    pub fn open(explicit: Option<&Path>) -> Result<Self> {
        let (file, base) = match explicit {
            Some(path) => {
                let text = fs::read_to_string(path).with_context(|| format!("reading workspace {}", path.display()))?;
                (parse(path, &text)?, parent_dir(path))
            }
            None if Path::new(DEFAULT_WORKSPACE).is_file() => {
                let path = Path::new(DEFAULT_WORKSPACE);
                let text = fs::read_to_string(path).with_context(|| format!("reading workspace {}", path.display()))?;
                (parse(path, &text)?, PathBuf::from("."))
            }
            None => (WorkspaceFile::default(), PathBuf::from(".")),
        };

        let history_path = base.join(file.history.unwrap_or_else(|| PathBuf::from(DEFAULT_HISTORY)));
        if let Some(dir) = history_path.parent().filter(|d| !d.as_os_str().is_empty()) {
            if !dir.is_dir() {
                bail!("history directory {} does not exist", dir.display());
            }
        }
        let patterns_path = file.patterns.map(|p| base.join(p));
        if let Some(p) = &patterns_path {
            if !p.is_file() {
                bail!("pattern config {} does not exist", p.display());
            }
        }
        let ranker = RankerConfig {
            em_alpha: file.em_alpha.unwrap_or(DEFAULT_EM_ALPHA),
            tie_break_priority: file.tie_break,
        };
        ranker.validate()?;
        Ok(Self {
            history_path,
            patterns_path,
            ranker,
        })
    }

    pub fn patterns(&self) -> Result<PatternRegistry> {
        match &self.patterns_path {
            None => Ok(PatternRegistry::builtin()),
            Some(p) => {
                let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                PatternRegistry::load(&text).with_context(|| format!("loading pattern config {}", p.display()))
            }
        }
    }

    /// The stored history; empty if the file does not exist yet.
    pub fn history(&self) -> Result<HistoryStore> {
        if !self.history_path.exists() {
            return Ok(HistoryStore::new());
        }
        HistoryStore::load(&self.history_path)
            .with_context(|| format!("loading history {}", self.history_path.display()))
    }

    pub fn save_history(&self, store: &HistoryStore) -> Result<()> {
        store
            .save(&self.history_path)
            .with_context(|| format!("writing history {}", self.history_path.display()))
    }
}

fn parent_dir(path: &Path) -> PathBuf {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    }
}

fn parse(path: &Path, text: &str) -> Result<WorkspaceFile> {
    let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    if is_json {
        serde_json::from_str(text).with_context(|| format!("parsing workspace {}", path.display()))
    } else {
        toml::from_str(text).with_context(|| format!("parsing workspace {}", path.display()))
    }
}
