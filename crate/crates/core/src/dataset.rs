//! Recorded repair results and the file formats that carry them.
//!
//! Bugs are described either by precomputed features
//! (`{"bug_id", "lines": [LineFeatures...]}`) or by a source reference
//! (`{"bug_id", "source_path", "lines": [12, 40], "error_type"?, "test_log"?}`)
//! that is run through feature extraction. Relative paths resolve against the
//! directory of the file that mentions them.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs;
use std::io::BufRead;
use std::path::{Path, PathBuf};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::features::{
    extract_bug_features, parse_test_error, BugFeatures, ExtractError, FeatureExtractor, LineFeatures, SkippedLine,
    TestErrorType,
};
use crate::history::{FixStatus, Observation};
use crate::roster::ToolRoster;

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("{}: {error}", path.display())]
    Io { path: PathBuf, error: std::io::Error },
    #[error("{what} line {line}: {message}")]
    Parse { what: String, line: usize, message: String },
    #[error("bug `{bug_id}`: {error}")]
    Extract { bug_id: String, error: ExtractError },
    #[error("bug `{0}` is described more than once")]
    DuplicateBug(String),
    #[error("bug `{0}` has no faulty lines")]
    EmptyBug(String),
    #[error("outcome for bug `{0}` but the bug has no features")]
    MissingFeatures(String),
    #[error("more than one outcome for bug `{bug_id}` and tool `{tool}`")]
    DuplicateOutcome { bug_id: String, tool: String },
}

/// Result of one tool on one bug.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Correct,
    Overfit,
    /// No plausible patch.
    None,
}

impl Outcome {
    /// Correct and overfit patches both pass the test suite.
    pub fn is_plausible(self) -> bool {
        !matches!(self, Outcome::None)
    }

    pub fn status(self) -> FixStatus {
        match self {
            Outcome::Correct => FixStatus::Correct,
            Outcome::Overfit => FixStatus::Overfit,
            Outcome::None => FixStatus::Fail,
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Correct => "correct",
            Outcome::Overfit => "overfit",
            Outcome::None => "none",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepairOutcome {
    pub bug_id: String,
    pub tool: String,
    pub outcome: Outcome,
}

/// A bug as it appears in input files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BugSpec {
    Precomputed {
        bug_id: String,
        #[serde(alias = "features")]
        lines: Vec<LineFeatures>,
    },
    Source {
        bug_id: String,
        source_path: PathBuf,
        lines: Vec<u32>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        error_type: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        test_log: Option<PathBuf>,
    },
}

impl BugSpec {
    pub fn bug_id(&self) -> &str {
        match self {
            BugSpec::Precomputed { bug_id, .. } | BugSpec::Source { bug_id, .. } => bug_id,
        }
    }

    /// Features of the bug, extracting them from source when needed. Lines
    /// skipped during extraction are returned alongside.
    pub fn resolve<E: FeatureExtractor + ?Sized>(
        self,
        base_dir: &Path,
        extractor: &E,
    ) -> Result<(BugFeatures, Vec<SkippedLine>), DatasetError> {
        match self {
            BugSpec::Precomputed { bug_id, lines } => {
                if lines.is_empty() {
                    return Err(DatasetError::EmptyBug(bug_id));
                }
                Ok((BugFeatures { bug_id, lines }, Vec::new()))
            }
            BugSpec::Source {
                bug_id,
                source_path,
                lines,
                error_type,
                test_log,
            } => {
                let source = read(&base_dir.join(source_path))?;
                let error = match (error_type, test_log) {
                    (Some(e), _) => TestErrorType::new(e),
                    (None, Some(log)) => parse_test_error(&read(&base_dir.join(log))?),
                    (None, None) => None,
                };
                let extraction = extract_bug_features(extractor, bug_id.clone(), &source, &lines, None)
                    .map_err(|error| DatasetError::Extract { bug_id, error })?;
                let mut features = extraction.features;
                for lf in &mut features.lines {
                    lf.bf4 = error.clone();
                }
                Ok((features, extraction.skipped))
            }
        }
    }
}

/// One line of a history import file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportRecord {
    #[serde(flatten)]
    pub bug: BugSpec,
    pub tool: String,
    pub status: FixStatus,
}

impl ImportRecord {
    pub fn resolve<E: FeatureExtractor + ?Sized>(
        self,
        base_dir: &Path,
        extractor: &E,
    ) -> Result<Observation, DatasetError> {
        let (bug, _) = self.bug.resolve(base_dir, extractor)?;
        Ok(Observation {
            bug,
            tool: self.tool,
            status: self.status,
        })
    }
}

fn read(path: &Path) -> Result<String, DatasetError> {
    fs::read_to_string(path).map_err(|error| DatasetError::Io {
        path: path.to_path_buf(),
        error,
    })
}

/// Parses JSON-lines, skipping blank lines and `#` comments.
pub fn parse_jsonl<T: for<'de> Deserialize<'de>>(reader: impl BufRead, what: &str) -> Result<Vec<T>, DatasetError> {
    let mut items = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| DatasetError::Parse {
            what: what.to_string(),
            line: i + 1,
            message: e.to_string(),
        })?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        items.push(serde_json::from_str(trimmed).map_err(|e| DatasetError::Parse {
            what: what.to_string(),
            line: i + 1,
            message: e.to_string(),
        })?);
    }
    Ok(items)
}

pub fn read_outcomes(path: &Path) -> Result<Vec<RepairOutcome>, DatasetError> {
    parse_jsonl(read(path)?.as_bytes(), &path.display().to_string())
}

pub fn read_import_records(path: &Path) -> Result<Vec<ImportRecord>, DatasetError> {
    parse_jsonl(read(path)?.as_bytes(), &path.display().to_string())
}

/// Reads a features file: a JSON array of bug specs, or an object mapping
/// bug ids to their line features.
pub fn read_bug_specs(path: &Path) -> Result<Vec<BugSpec>, DatasetError> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum FeaturesDoc {
        List(Vec<BugSpec>),
        Map(IndexMap<String, Vec<LineFeatures>>),
    }
    let text = read(path)?;
    let doc: FeaturesDoc = serde_json::from_str(&text).map_err(|e| DatasetError::Parse {
        what: path.display().to_string(),
        line: e.line(),
        message: e.to_string(),
    })?;
    Ok(match doc {
        FeaturesDoc::List(specs) => specs,
        FeaturesDoc::Map(map) => map
            .into_iter()
            .map(|(bug_id, lines)| BugSpec::Precomputed { bug_id, lines })
            .collect(),
    })
}

/// Bugs with features, per-(bug, tool) outcomes, and the tool roster.
#[derive(Debug, Clone)]
pub struct RepairDataset {
    bugs: IndexMap<String, BugFeatures>,
    outcomes: HashMap<(String, String), Outcome>,
    roster: ToolRoster,
}

impl RepairDataset {
    /// Tools that appear in outcomes but not in `roster` are appended to it,
    /// in order of first appearance. Missing (bug, tool) pairs read as
    /// [`Outcome::None`].
    pub fn new(
        bugs: impl IntoIterator<Item = BugFeatures>,
        outcomes: impl IntoIterator<Item = RepairOutcome>,
        mut roster: ToolRoster,
    ) -> Result<Self, DatasetError> {
        let mut by_id = IndexMap::new();
        for bug in bugs {
            if bug.lines.is_empty() {
                return Err(DatasetError::EmptyBug(bug.bug_id));
            }
            if by_id.contains_key(&bug.bug_id) {
                return Err(DatasetError::DuplicateBug(bug.bug_id));
            }
            by_id.insert(bug.bug_id.clone(), bug);
        }
        let mut table = HashMap::new();
        for o in outcomes {
            if !by_id.contains_key(&o.bug_id) {
                return Err(DatasetError::MissingFeatures(o.bug_id));
            }
            roster.ensure(&o.tool);
            if table.insert((o.bug_id.clone(), o.tool.clone()), o.outcome).is_some() {
                return Err(DatasetError::DuplicateOutcome {
                    bug_id: o.bug_id,
                    tool: o.tool,
                });
            }
        }
        Ok(Self {
            bugs: by_id,
            outcomes: table,
            roster,
        })
    }

    pub fn roster(&self) -> &ToolRoster {
        &self.roster
    }

    pub fn bug(&self, bug_id: &str) -> Option<&BugFeatures> {
        self.bugs.get(bug_id)
    }

    /// Bug ids in the order they were supplied.
    pub fn bug_ids(&self) -> impl Iterator<Item = &str> {
        self.bugs.keys().map(String::as_str)
    }

    pub fn bug_count(&self) -> usize {
        self.bugs.len()
    }

    pub fn outcome(&self, bug_id: &str, tool: &str) -> Outcome {
        self.outcomes
            .get(&(bug_id.to_string(), tool.to_string()))
            .copied()
            .unwrap_or(Outcome::None)
    }

    /// Bugs that at least one tool fixes correctly.
    pub fn correctly_fixable(&self) -> usize {
        self.bugs
            .keys()
            .filter(|b| self.roster.names().any(|t| self.outcome(b, t) == Outcome::Correct))
            .count()
    }

    pub(crate) fn check_order(&self, order: &[String]) -> Result<(), String> {
        let mut seen = HashSet::new();
        for id in order {
            if !self.bugs.contains_key(id) {
                return Err(format!("bug order names unknown bug `{id}`"));
            }
            if !seen.insert(id.as_str()) {
                return Err(format!("bug order names `{id}` twice"));
            }
        }
        if seen.len() != self.bugs.len() {
            return Err(format!("bug order lists {} of {} bugs", seen.len(), self.bugs.len()));
        }
        Ok(())
    }
}
