//! Categorized repair history.
//!
//! Each tool keeps `<tool, feature, fail_times, correct_times>` counters, where
//! the feature is either the statement node type (BF1) or the failing-test
//! error type (BF4) of bugs it attempted. The history score of a tool on a
//! feature is its fix rate `correct / (correct + fail)`, or 0 with no data.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::features::{BugFeatures, LineFeatures, NodeType, TestErrorType};
use crate::roster::{RosterError, ToolRoster};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum HistoryError {
    #[error(transparent)]
    Roster(#[from] RosterError),
    #[error("bug `{0}` has no faulty lines")]
    EmptyBug(String),
    #[error("history file i/o")]
    Io(#[from] std::io::Error),
    #[error("history file is malformed: {0}")]
    Schema(String),
    #[error("history schema version {found} is not supported (expected {SCHEMA_VERSION})")]
    SchemaVersion { found: u32 },
}

/// Which feature a history counter is indexed by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum KeyKind {
    BF1,
    BF4,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FeatureKey {
    pub kind: KeyKind,
    pub value: String,
}

impl FeatureKey {
    pub fn statement(node_type: &NodeType) -> Self {
        Self {
            kind: KeyKind::BF1,
            value: node_type.to_string(),
        }
    }

    pub fn error(error: &TestErrorType) -> Self {
        Self {
            kind: KeyKind::BF4,
            value: error.as_str().to_string(),
        }
    }

    /// History keys of one line: its statement type, then its error type.
    pub fn of_line(lf: &LineFeatures) -> Vec<FeatureKey> {
        let mut keys = vec![Self::statement(&lf.bf1)];
        if let Some(e) = &lf.bf4 {
            keys.push(Self::error(e));
        }
        keys
    }

    /// Distinct history keys of a bug. An update touches each once.
    pub fn of_bug(bug: &BugFeatures) -> BTreeSet<FeatureKey> {
        bug.lines.iter().flat_map(Self::of_line).collect()
    }
}

impl fmt::Display for FeatureKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}={}", self.kind, self.value)
    }
}

/// Verdict on one tool's attempt at one bug.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FixStatus {
    Correct,
    Overfit,
    Fail,
}

impl FromStr for FixStatus {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "correct" => Ok(FixStatus::Correct),
            "overfit" => Ok(FixStatus::Overfit),
            "fail" => Ok(FixStatus::Fail),
            _ => Err(format!("unknown fix status `{s}` (expected correct, overfit or fail)")),
        }
    }
}

impl fmt::Display for FixStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FixStatus::Correct => "correct",
            FixStatus::Overfit => "overfit",
            FixStatus::Fail => "fail",
        })
    }
}

/// Counters for one (tool, feature) pair. `overfit` is the part of `fail`
/// that produced a plausible but wrong patch.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Counts {
    pub correct: u64,
    pub fail: u64,
    pub overfit: u64,
}

impl Counts {
    pub fn score(&self) -> f64 {
        let total = self.correct + self.fail;
        if total == 0 {
            0.0
        } else {
            self.correct as f64 / total as f64
        }
    }

    fn record(&mut self, status: FixStatus) {
        match status {
            FixStatus::Correct => self.correct += 1,
            FixStatus::Overfit => {
                self.fail += 1;
                self.overfit += 1;
            }
            FixStatus::Fail => self.fail += 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistoryRecord {
    pub tool: String,
    pub kind: KeyKind,
    pub value: String,
    pub fail: u64,
    pub correct: u64,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub overfit: u64,
}

fn is_zero(n: &u64) -> bool {
    *n == 0
}

/// One observed attempt, as imported from earlier repair results.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub bug: BugFeatures,
    pub tool: String,
    pub status: FixStatus,
}

#[derive(Debug, Default)]
pub struct ImportSummary {
    pub applied: usize,
    /// Tools that were not registered before the import.
    pub registered: Vec<String>,
    /// Index of the rejected observation and why.
    pub rejected: Vec<(usize, HistoryError)>,
}

/// Tool roster plus repair-history counters.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct HistoryStore {
    roster: ToolRoster,
    counts: BTreeMap<(String, FeatureKey), Counts>,
}

impl HistoryStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_roster(roster: ToolRoster) -> Self {
        Self {
            roster,
            counts: BTreeMap::new(),
        }
    }

    pub fn roster(&self) -> &ToolRoster {
        &self.roster
    }

    pub fn roster_mut(&mut self) -> &mut ToolRoster {
        &mut self.roster
    }

    pub fn counts(&self, tool: &str, key: &FeatureKey) -> Counts {
        self.counts
            .get(&(tool.to_string(), key.clone()))
            .copied()
            .unwrap_or_default()
    }

    /// Overwrites the counters of one pair, registering the tool if needed.
    pub fn set_counts(&mut self, tool: &str, key: FeatureKey, counts: Counts) {
        self.roster.ensure(tool);
        self.counts.insert((tool.to_string(), key), counts);
    }

    /// Fix rate of `tool` on `key`, in `[0, 1]`; 0 without history.
    pub fn history_score(&self, tool: &str, key: &FeatureKey) -> f64 {
        self.counts(tool, key).score()
    }

    /// Records one verdict of `tool` on `bug`. Every distinct key of the bug is
    /// counted once; overfit verdicts count as failures.
    pub fn update(&mut self, tool: &str, bug: &BugFeatures, status: FixStatus) -> Result<(), HistoryError> {
        self.roster.require(tool)?;
        if bug.lines.is_empty() {
            return Err(HistoryError::EmptyBug(bug.bug_id.clone()));
        }
        for key in FeatureKey::of_bug(bug) {
            self.counts.entry((tool.to_string(), key)).or_default().record(status);
        }
        Ok(())
    }

    /// Applies observations in order, registering unknown tools with no
    /// patterns. Invalid observations are skipped and reported.
    pub fn import_history(&mut self, observations: impl IntoIterator<Item = Observation>) -> ImportSummary {
        let mut summary = ImportSummary::default();
        for (i, obs) in observations.into_iter().enumerate() {
            if obs.tool.trim().is_empty() {
                summary.rejected.push((i, RosterError::EmptyName.into()));
                continue;
            }
            if obs.bug.lines.is_empty() {
                summary.rejected.push((i, HistoryError::EmptyBug(obs.bug.bug_id)));
                continue;
            }
            if self.roster.ensure(&obs.tool) {
                summary.registered.push(obs.tool.clone());
            }
            match self.update(&obs.tool, &obs.bug, obs.status) {
                Ok(()) => summary.applied += 1,
                Err(e) => summary.rejected.push((i, e)),
            }
        }
        summary
    }

    pub fn records(&self) -> impl Iterator<Item = HistoryRecord> + '_ {
        self.counts.iter().map(|((tool, key), c)| HistoryRecord {
            tool: tool.clone(),
            kind: key.kind,
            value: key.value.clone(),
            fail: c.fail,
            correct: c.correct,
            overfit: c.overfit,
        })
    }

    pub fn to_json(&self) -> String {
        let doc = HistoryDoc {
            schema_version: SCHEMA_VERSION,
            tools: self.roster.clone(),
            records: self.records().collect(),
        };
        serde_json::to_string_pretty(&doc).expect("history serializes")
    }

    pub fn from_json(json: &str) -> Result<Self, HistoryError> {
        let probe: VersionProbe = serde_json::from_str(json).map_err(|e| HistoryError::Schema(e.to_string()))?;
        if probe.schema_version != SCHEMA_VERSION {
            return Err(HistoryError::SchemaVersion {
                found: probe.schema_version,
            });
        }
        let doc: HistoryDoc = serde_json::from_str(json).map_err(|e| HistoryError::Schema(e.to_string()))?;
        let mut store = HistoryStore::with_roster(doc.tools);
        for r in doc.records {
            if !store.roster.contains(&r.tool) {
                return Err(HistoryError::Schema(format!(
                    "record for unregistered tool `{}`",
                    r.tool
                )));
            }
            if r.overfit > r.fail {
                return Err(HistoryError::Schema(format!(
                    "record {}/{:?}={} has more overfit than failed attempts",
                    r.tool, r.kind, r.value
                )));
            }
            let key = FeatureKey {
                kind: r.kind,
                value: r.value,
            };
            let counts = Counts {
                correct: r.correct,
                fail: r.fail,
                overfit: r.overfit,
            };
            if store.counts.insert((r.tool.clone(), key.clone()), counts).is_some() {
                return Err(HistoryError::Schema(format!("duplicate record {}/{key}", r.tool)));
            }
        }
        Ok(store)
    }

    /// Writes the store through a temporary file in the same directory and
    /// renames it into place.
    pub fn save(&self, path: &Path) -> Result<(), HistoryError> {
        let dir = match path.parent() {
            Some(p) if !p.as_os_str().is_empty() => p,
            _ => Path::new("."),
        };
        let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
        tmp.write_all(self.to_json().as_bytes())?;
        tmp.write_all(b"\n")?;
        tmp.as_file().sync_all()?;
        tmp.persist(path).map_err(|e| HistoryError::Io(e.error))?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, HistoryError> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}

#[derive(Deserialize)]
struct VersionProbe {
    schema_version: u32,
}

#[derive(Serialize, Deserialize)]
struct HistoryDoc {
    schema_version: u32,
    #[serde(default)]
    tools: ToolRoster,
    #[serde(default)]
    records: Vec<HistoryRecord>,
}
