//! Bug features extracted from a faulty source file.
//!
//! Every suspicious line yields a [`LineFeatures`]: the node type of the
//! statement covering the line, the node types found inside that statement,
//! and (shared by all lines of a bug) the first non-trivial failing-test error.
//! The pair of statement type and child types is never stored; see
//! [`LineFeatures::statement_and_children`].

mod java;
mod node_type;
mod test_log;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

pub use java::{JavaExtractor, StatementSpan};
pub use node_type::NodeType;
pub use test_log::parse_test_error;

/// Name of the assertion failure that carries no information about the bug.
pub const TRIVIAL_TEST_ERROR: &str = "junit.framework.AssertionFailedError";

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum ExtractError {
    #[error("source does not parse (first syntax error at line {line}, column {column})")]
    Parse { line: u32, column: u32 },
    #[error("line {line} is outside the source (1..={line_count})")]
    LineOutOfRange { line: u32, line_count: u32 },
    #[error("line {0} holds no statement")]
    NoStatementAtLine(u32),
    #[error("no faulty line could be mapped to a statement")]
    AllLinesUnusable,
    #[error("no faulty lines given")]
    NoFaultyLines,
    #[error("parser setup failed: {0}")]
    Language(String),
}

/// Fully qualified class name of a failing-test error.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct TestErrorType(String);

impl TestErrorType {
    /// Returns `None` for empty names and for the trivial assertion failure.
    pub fn new(fqname: impl Into<String>) -> Option<Self> {
        let fqname = fqname.into();
        let trimmed = fqname.trim();
        if trimmed.is_empty() || trimmed == TRIVIAL_TEST_ERROR {
            None
        } else {
            Some(Self(trimmed.to_string()))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for TestErrorType {
    type Error = String;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        Self::new(value.clone()).ok_or_else(|| format!("`{value}` is not a usable test error type"))
    }
}

impl From<TestErrorType> for String {
    fn from(value: TestErrorType) -> Self {
        value.0
    }
}

impl fmt::Display for TestErrorType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Features of one faulty line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineFeatures {
    pub line_id: u32,
    /// Node type of the statement covering the line.
    pub bf1: NodeType,
    /// Distinct node types below the statement node.
    #[serde(default)]
    pub bf2: BTreeSet<NodeType>,
    /// First non-trivial failing-test error of the bug, if any.
    #[serde(default)]
    pub bf4: Option<TestErrorType>,
}

impl LineFeatures {
    pub fn new(line_id: u32, bf1: NodeType, bf2: impl IntoIterator<Item = NodeType>) -> Self {
        Self {
            line_id,
            bf1,
            bf2: bf2.into_iter().collect(),
            bf4: None,
        }
    }

    pub fn with_error(mut self, bf4: Option<TestErrorType>) -> Self {
        self.bf4 = bf4;
        self
    }

    /// The combined statement/child feature, derived on demand.
    pub fn statement_and_children(&self) -> (&NodeType, &BTreeSet<NodeType>) {
        (&self.bf1, &self.bf2)
    }
}

/// Features of every usable faulty line of one bug, in input order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BugFeatures {
    pub bug_id: String,
    pub lines: Vec<LineFeatures>,
}

impl BugFeatures {
    /// The bug's test error, taken from its first line that carries one.
    pub fn error_type(&self) -> Option<&TestErrorType> {
        self.lines.iter().find_map(|l| l.bf4.as_ref())
    }
}

/// A faulty line that could not be used, kept so callers can report it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkippedLine {
    pub line_id: u32,
    pub reason: ExtractError,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Extraction {
    pub features: BugFeatures,
    pub skipped: Vec<SkippedLine>,
}

/// Maps source lines of one language to line features.
pub trait FeatureExtractor {
    /// Features for each requested line, in order. The outer error is for
    /// problems with the whole source (it does not parse); the inner ones are
    /// per line.
    fn extract_lines(
        &self,
        source: &str,
        lines: &[u32],
    ) -> Result<Vec<Result<LineFeatures, ExtractError>>, ExtractError>;
}

/// Extracts the features of a bug from its faulty file, faulty lines and an
/// optional failing-test log.
///
/// Lines that cannot be mapped to a statement are skipped and reported in
/// [`Extraction::skipped`]; the call fails only when none are usable.
pub fn extract_bug_features<E: FeatureExtractor + ?Sized>(
    extractor: &E,
    bug_id: impl Into<String>,
    source: &str,
    faulty_lines: &[u32],
    test_log: Option<&str>,
) -> Result<Extraction, ExtractError> {
    if faulty_lines.is_empty() {
        return Err(ExtractError::NoFaultyLines);
    }
    let bf4 = test_log.and_then(parse_test_error);
    let mut lines = Vec::with_capacity(faulty_lines.len());
    let mut skipped = Vec::new();
    for (line_id, result) in faulty_lines
        .iter()
        .copied()
        .zip(extractor.extract_lines(source, faulty_lines)?)
    {
        match result {
            Ok(lf) => lines.push(lf.with_error(bf4.clone())),
            Err(reason) => {
                log::warn!("skipping faulty line {line_id}: {reason}");
                skipped.push(SkippedLine { line_id, reason });
            }
        }
    }
    if lines.is_empty() {
        return Err(ExtractError::AllLinesUnusable);
    }
    Ok(Extraction {
        features: BugFeatures {
            bug_id: bug_id.into(),
            lines,
        },
        skipped,
    })
}
