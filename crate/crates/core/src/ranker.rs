//! Preference scoring and ranking of repair tools for one bug.
//!
//! For every faulty line a tool earns the sum of its history scores on the
//! line's statement type and (if present) test error type. If one of the
//! tool's patterns matches the line, that line's score is multiplied by
//! `1 + em_alpha`. A tool's score for the bug is the sum over its lines.

use serde::{Deserialize, Serialize};

use crate::features::BugFeatures;
use crate::history::{FeatureKey, HistoryStore};
use crate::patterns::PatternRegistry;
use crate::roster::RosterError;

pub const DEFAULT_EM_ALPHA: f64 = 0.5;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum RankError {
    #[error(transparent)]
    Roster(#[from] RosterError),
    #[error("no tools to rank")]
    EmptyToolset,
    #[error("bonus coefficient must be finite and non-negative, got {0}")]
    InvalidAlpha(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankerConfig {
    pub em_alpha: f64,
    /// Tools listed here win ties in this order; the rest follow in
    /// registration order.
    #[serde(default)]
    pub tie_break_priority: Vec<String>,
}

impl Default for RankerConfig {
    fn default() -> Self {
        Self {
            em_alpha: DEFAULT_EM_ALPHA,
            tie_break_priority: Vec::new(),
        }
    }
}

impl RankerConfig {
    pub fn new(em_alpha: f64) -> Result<Self, RankError> {
        let config = Self {
            em_alpha,
            ..Self::default()
        };
        config.validate()?;
        Ok(config)
    }

    pub fn with_priority(mut self, priority: Vec<String>) -> Self {
        self.tie_break_priority = priority;
        self
    }

    pub fn validate(&self) -> Result<(), RankError> {
        if self.em_alpha.is_finite() && self.em_alpha >= 0.0 {
            Ok(())
        } else {
            Err(RankError::InvalidAlpha(self.em_alpha))
        }
    }
}

/// Score contribution of one faulty line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineScore {
    pub line_id: u32,
    /// Sum of history scores over the line's history keys.
    pub history: f64,
    pub pattern_matched: bool,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankEntry {
    pub tool: String,
    pub score: f64,
    pub lines: Vec<LineScore>,
}

/// Tools ordered by descending score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ranking {
    pub entries: Vec<RankEntry>,
}

impl Ranking {
    /// The first `k` tools (fewer if the ranking is shorter).
    pub fn top_k(&self, k: usize) -> Vec<&str> {
        self.entries.iter().take(k).map(|e| e.tool.as_str()).collect()
    }

    pub fn tools(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.tool.as_str())
    }

    pub fn truncate(&mut self, k: usize) {
        self.entries.truncate(k);
    }
}

/// Preference score of one tool for `bug`, with its per-line breakdown.
pub fn score_tool(
    tool: &str,
    bug: &BugFeatures,
    registry: &PatternRegistry,
    history: &HistoryStore,
    config: &RankerConfig,
) -> Result<RankEntry, RankError> {
    config.validate()?;
    let roster = history.roster();
    roster.require(tool)?;
    let mut lines = Vec::with_capacity(bug.lines.len());
    let mut total = 0.0;
    for lf in &bug.lines {
        let h: f64 = FeatureKey::of_line(lf)
            .iter()
            .map(|key| history.history_score(tool, key))
            .sum();
        let pattern_matched = registry.tool_pattern_match(tool, roster, lf)?;
        let score = if pattern_matched {
            h * (1.0 + config.em_alpha)
        } else {
            h
        };
        total += score;
        lines.push(LineScore {
            line_id: lf.line_id,
            history: h,
            pattern_matched,
            score,
        });
    }
    Ok(RankEntry {
        tool: tool.to_string(),
        score: total,
        lines,
    })
}

/// Scores every tool in `tools` and sorts them by descending score. Ties go
/// to the configured priority list, then to registration order.
pub fn rank<'a>(
    bug: &BugFeatures,
    tools: impl IntoIterator<Item = &'a str>,
    registry: &PatternRegistry,
    history: &HistoryStore,
    config: &RankerConfig,
) -> Result<Ranking, RankError> {
    let mut entries = tools
        .into_iter()
        .map(|t| score_tool(t, bug, registry, history, config))
        .collect::<Result<Vec<_>, _>>()?;
    if entries.is_empty() {
        return Err(RankError::EmptyToolset);
    }
    let roster = history.roster();
    let tie_key = |tool: &str| {
        let listed = config.tie_break_priority.iter().position(|p| p == tool);
        let registered = roster.position(tool).unwrap_or(usize::MAX);
        (listed.unwrap_or(usize::MAX), registered)
    };
    entries.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then_with(|| tie_key(&a.tool).cmp(&tie_key(&b.tool)))
            .then_with(|| a.tool.cmp(&b.tool))
    });
    entries.dedup_by(|a, b| a.tool == b.tool);
    Ok(Ranking { entries })
}
