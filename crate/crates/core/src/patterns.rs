//! Repair patterns and their pre-requirements.
//!
//! A pattern is a declarative predicate over one line's features plus the
//! tools that implement it. Three patterns ship built in:
//!
//! * `P1` Insert Cast Checker: the statement contains a cast.
//! * `P3` Insert Range Checker: the statement indexes an array, or calls an
//!   indexed collection accessor such as `get(i)`.
//! * `P4` Throw Exception: the failing test throws an exception.
//!
//! The "unchecked" qualifier of P1 and P3 is approximated by syntactic
//! presence; no guard analysis is performed. Other pattern ids are accepted
//! from user config. `P2` (null-pointer checker) is rejected because its
//! pre-requirement matches nearly every statement.

use std::collections::BTreeSet;
use std::fmt;

use indexmap::IndexMap;
use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::features::{LineFeatures, NodeType};
use crate::roster::{RosterError, ToolRoster};

/// Pattern id that can never be registered.
pub const EXCLUDED_PATTERN: &str = "P2";

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum PatternError {
    #[error("pattern `{0}` is defined more than once")]
    DuplicatePatternId(String),
    #[error("pattern `{id}`: {reason}")]
    MalformedPredicate { id: String, reason: String },
    #[error("pattern `P2` is too general to be used")]
    ExcludedPattern,
    #[error("pattern config is not valid JSON: {0}")]
    Syntax(String),
}

/// The bug feature a pattern's pre-requirement inspects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FeatureKind {
    BF1,
    BF2,
    BF3,
    BF4,
}

impl fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Feature kind required for the documented pattern ids.
pub fn documented_feature_kind(id: &str) -> Option<FeatureKind> {
    match id {
        "P6" | "P11" | "P12" => Some(FeatureKind::BF1),
        "P3" | "P5" | "P7" | "P8" | "P9" => Some(FeatureKind::BF2),
        "P1" | "P10" => Some(FeatureKind::BF3),
        "P4" => Some(FeatureKind::BF4),
        _ => None,
    }
}

/// Statement types a predicate accepts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StatementTypes {
    Any,
    Of(BTreeSet<NodeType>),
}

impl StatementTypes {
    fn accepts(&self, t: &NodeType) -> bool {
        match self {
            StatementTypes::Any => true,
            StatementTypes::Of(set) => set.contains(t),
        }
    }
}

/// Error types a predicate accepts.
#[derive(Debug, Clone)]
pub enum ErrorTypes {
    /// Any thrown exception.
    Any,
    /// Class-name globs, `*` matching any run of characters.
    Matching(Vec<String>, Vec<Regex>),
}

impl ErrorTypes {
    fn matching(globs: Vec<String>) -> Result<Self, String> {
        if globs.is_empty() {
            return Err("error_type_matches needs at least one class-name pattern".into());
        }
        let compiled = globs
            .iter()
            .map(|g| {
                let body = g.split('*').map(regex::escape).collect::<Vec<_>>().join(".*");
                Regex::new(&format!("^{body}$")).map_err(|e| e.to_string())
            })
            .collect::<Result<_, _>>()?;
        Ok(ErrorTypes::Matching(globs, compiled))
    }
}

impl PartialEq for ErrorTypes {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (ErrorTypes::Any, ErrorTypes::Any) => true,
            (ErrorTypes::Matching(a, _), ErrorTypes::Matching(b, _)) => a == b,
            _ => false,
        }
    }
}

impl Eq for ErrorTypes {}

/// Declarative pre-requirement over one line's features.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawPredicate", into = "RawPredicate")]
pub enum PredicateSpec {
    StatementTypeIn(BTreeSet<NodeType>),
    ChildTypesContainAny(BTreeSet<NodeType>),
    StatementAndChild {
        statement: StatementTypes,
        children: BTreeSet<NodeType>,
    },
    ErrorTypeMatches(ErrorTypes),
}

impl PredicateSpec {
    pub fn feature_kind(&self) -> FeatureKind {
        match self {
            PredicateSpec::StatementTypeIn(_) => FeatureKind::BF1,
            PredicateSpec::ChildTypesContainAny(_) => FeatureKind::BF2,
            PredicateSpec::StatementAndChild { .. } => FeatureKind::BF3,
            PredicateSpec::ErrorTypeMatches(_) => FeatureKind::BF4,
        }
    }

    pub fn eval(&self, lf: &LineFeatures) -> bool {
        match self {
            PredicateSpec::StatementTypeIn(types) => types.contains(&lf.bf1),
            PredicateSpec::ChildTypesContainAny(types) => !types.is_disjoint(&lf.bf2),
            PredicateSpec::StatementAndChild { statement, children } => {
                let (bf1, bf2) = lf.statement_and_children();
                statement.accepts(bf1) && !children.is_disjoint(bf2)
            }
            PredicateSpec::ErrorTypeMatches(errors) => match (&lf.bf4, errors) {
                (None, _) => false,
                (Some(_), ErrorTypes::Any) => true,
                (Some(e), ErrorTypes::Matching(_, res)) => res.iter().any(|re| re.is_match(e.as_str())),
            },
        }
    }
}

/// Wire form: `{"kind": ..., "args": ...}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawPredicate {
    kind: String,
    #[serde(default)]
    args: serde_json::Value,
}

#[derive(Deserialize)]
struct RawStatementAndChild {
    statement_type_in: serde_json::Value,
    child_types_contain_any: BTreeSet<NodeType>,
}

impl TryFrom<RawPredicate> for PredicateSpec {
    type Error = String;

    fn try_from(raw: RawPredicate) -> Result<Self, Self::Error> {
        fn types(v: serde_json::Value, what: &str) -> Result<BTreeSet<NodeType>, String> {
            let set: BTreeSet<NodeType> = serde_json::from_value(v).map_err(|e| format!("{what}: {e}"))?;
            if set.is_empty() {
                return Err(format!("{what}: node-type set is empty"));
            }
            Ok(set)
        }
        match raw.kind.as_str() {
            "statement_type_in" => Ok(PredicateSpec::StatementTypeIn(types(raw.args, "statement_type_in")?)),
            "child_types_contain_any" => Ok(PredicateSpec::ChildTypesContainAny(types(
                raw.args,
                "child_types_contain_any",
            )?)),
            "statement_and_child" => {
                let both: RawStatementAndChild =
                    serde_json::from_value(raw.args).map_err(|e| format!("statement_and_child: {e}"))?;
                let statement = match both.statement_type_in {
                    serde_json::Value::String(s) if s == "any" => StatementTypes::Any,
                    v => StatementTypes::Of(types(v, "statement_type_in")?),
                };
                if both.child_types_contain_any.is_empty() {
                    return Err("child_types_contain_any: node-type set is empty".into());
                }
                Ok(PredicateSpec::StatementAndChild {
                    statement,
                    children: both.child_types_contain_any,
                })
            }
            "error_type_matches" => match raw.args {
                serde_json::Value::String(s) if s == "any" => Ok(PredicateSpec::ErrorTypeMatches(ErrorTypes::Any)),
                v => {
                    let globs: Vec<String> =
                        serde_json::from_value(v).map_err(|e| format!("error_type_matches: {e}"))?;
                    Ok(PredicateSpec::ErrorTypeMatches(ErrorTypes::matching(globs)?))
                }
            },
            other => Err(format!("unknown predicate kind `{other}`")),
        }
    }
}

impl From<PredicateSpec> for RawPredicate {
    fn from(p: PredicateSpec) -> Self {
        use serde_json::json;
        let (kind, args) = match p {
            PredicateSpec::StatementTypeIn(t) => ("statement_type_in", json!(t)),
            PredicateSpec::ChildTypesContainAny(t) => ("child_types_contain_any", json!(t)),
            PredicateSpec::StatementAndChild { statement, children } => {
                let statement = match statement {
                    StatementTypes::Any => json!("any"),
                    StatementTypes::Of(t) => json!(t),
                };
                (
                    "statement_and_child",
                    json!({ "statement_type_in": statement, "child_types_contain_any": children }),
                )
            }
            PredicateSpec::ErrorTypeMatches(ErrorTypes::Any) => ("error_type_matches", json!("any")),
            PredicateSpec::ErrorTypeMatches(ErrorTypes::Matching(globs, _)) => ("error_type_matches", json!(globs)),
        };
        RawPredicate {
            kind: kind.to_string(),
            args,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepairPattern {
    pub id: String,
    pub name: String,
    pub feature_kind: FeatureKind,
    pub predicate: PredicateSpec,
    #[serde(default)]
    pub implementers: BTreeSet<String>,
}

impl RepairPattern {
    pub fn matches(&self, lf: &LineFeatures) -> bool {
        self.predicate.eval(lf)
    }

    fn validate(&self) -> Result<(), PatternError> {
        if self.id == EXCLUDED_PATTERN {
            return Err(PatternError::ExcludedPattern);
        }
        let malformed = |reason: String| PatternError::MalformedPredicate {
            id: self.id.clone(),
            reason,
        };
        if self.id.trim().is_empty() {
            return Err(malformed("empty pattern id".into()));
        }
        if self.predicate.feature_kind() != self.feature_kind {
            return Err(malformed(format!(
                "predicate inspects {} but feature_kind is {}",
                self.predicate.feature_kind(),
                self.feature_kind
            )));
        }
        if let Some(expected) = documented_feature_kind(&self.id) {
            if expected != self.feature_kind {
                return Err(malformed(format!("{} is a {expected} pattern", self.id)));
            }
        }
        Ok(())
    }
}

fn set<const N: usize>(items: [&str; N]) -> BTreeSet<String> {
    items.iter().map(|s| s.to_string()).collect()
}

/// The shipped patterns, with implementers limited to the default tool roster.
pub fn builtin_patterns() -> Vec<RepairPattern> {
    vec![
        RepairPattern {
            id: "P1".into(),
            name: "Insert Cast Checker".into(),
            feature_kind: FeatureKind::BF3,
            predicate: PredicateSpec::StatementAndChild {
                statement: StatementTypes::Any,
                children: [NodeType::Cast].into(),
            },
            implementers: set(["AVATAR", "SimFix", "TBar", "kPAR"]),
        },
        RepairPattern {
            id: "P3".into(),
            name: "Insert Range Checker".into(),
            feature_kind: FeatureKind::BF2,
            predicate: PredicateSpec::ChildTypesContainAny([NodeType::ArrayAccess, NodeType::IndexedInvocation].into()),
            implementers: set(["AVATAR", "TBar", "kPAR"]),
        },
        RepairPattern {
            id: "P4".into(),
            name: "Throw Exception".into(),
            feature_kind: FeatureKind::BF4,
            predicate: PredicateSpec::ErrorTypeMatches(ErrorTypes::Any),
            implementers: set(["ACS"]),
        },
    ]
}

/// Pattern config document: a list of patterns, optionally wrapped in an
/// object that can also drop the built-ins.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PatternConfig {
    Wrapped {
        #[serde(default = "yes")]
        include_builtins: bool,
        patterns: Vec<RepairPattern>,
    },
    List(Vec<RepairPattern>),
}

fn yes() -> bool {
    true
}

/// Immutable set of patterns keyed by id, in definition order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternRegistry {
    patterns: IndexMap<String, RepairPattern>,
}

impl Default for PatternRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}

impl PatternRegistry {
    pub fn builtin() -> Self {
        Self::from_config(PatternConfig::List(Vec::new())).expect("built-in patterns are valid")
    }

    /// Parses a JSON pattern config. Entries override built-ins with the same
    /// id; an id may appear only once in the config itself.
    pub fn load(json: &str) -> Result<Self, PatternError> {
        use serde_json::Value;
        if json.trim().is_empty() {
            return Ok(Self::builtin());
        }
        let syntax = |msg: &str| PatternError::Syntax(msg.to_string());
        let value: Value = serde_json::from_str(json).map_err(|e| PatternError::Syntax(e.to_string()))?;
        let (include_builtins, entries) = match value {
            Value::Array(entries) => (true, entries),
            Value::Object(mut doc) => {
                let include = match doc.get("include_builtins") {
                    None => true,
                    Some(v) => v
                        .as_bool()
                        .ok_or_else(|| syntax("include_builtins must be a boolean"))?,
                };
                match doc.remove("patterns") {
                    Some(Value::Array(entries)) => (include, entries),
                    None => (include, Vec::new()),
                    Some(_) => return Err(syntax("patterns must be an array")),
                }
            }
            _ => return Err(syntax("expected a pattern list or an object with `patterns`")),
        };
        let patterns = entries
            .into_iter()
            .map(|entry| {
                let id = entry
                    .get("id")
                    .and_then(Value::as_str)
                    .unwrap_or("<missing id>")
                    .to_string();
                serde_json::from_value::<RepairPattern>(entry).map_err(|e| PatternError::MalformedPredicate {
                    id,
                    reason: e.to_string(),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_config(PatternConfig::Wrapped {
            include_builtins,
            patterns,
        })
    }

    pub fn from_config(config: PatternConfig) -> Result<Self, PatternError> {
        let (include_builtins, entries) = match config {
            PatternConfig::Wrapped {
                include_builtins,
                patterns,
            } => (include_builtins, patterns),
            PatternConfig::List(patterns) => (true, patterns),
        };
        let mut patterns = IndexMap::new();
        if include_builtins {
            for p in builtin_patterns() {
                patterns.insert(p.id.clone(), p);
            }
        }
        let mut seen = BTreeSet::new();
        for p in entries {
            p.validate()?;
            if !seen.insert(p.id.clone()) {
                return Err(PatternError::DuplicatePatternId(p.id));
            }
            patterns.insert(p.id.clone(), p);
        }
        Ok(Self { patterns })
    }

    pub fn to_config(&self) -> PatternConfig {
        PatternConfig::Wrapped {
            include_builtins: false,
            patterns: self.patterns.values().cloned().collect(),
        }
    }

    pub fn get(&self, id: &str) -> Option<&RepairPattern> {
        self.patterns.get(id)
    }

    pub fn contains(&self, id: &str) -> bool {
        self.patterns.contains_key(id)
    }

    pub fn iter(&self) -> impl Iterator<Item = &RepairPattern> {
        self.patterns.values()
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    /// Patterns a tool implements: those listing it as implementer plus those
    /// named in its roster entry.
    pub fn patterns_of<'a>(
        &'a self,
        tool: &'a str,
        roster: &'a ToolRoster,
    ) -> Result<impl Iterator<Item = &'a RepairPattern> + 'a, RosterError> {
        let entry = roster.require(tool)?;
        Ok(self
            .patterns
            .values()
            .filter(move |p| p.implementers.contains(tool) || entry.patterns.contains(&p.id)))
    }

    /// Whether any pattern implemented by `tool` matches the line.
    pub fn tool_pattern_match(
        &self,
        tool: &str,
        roster: &ToolRoster,
        line: &LineFeatures,
    ) -> Result<bool, RosterError> {
        Ok(self.patterns_of(tool, roster)?.any(|p| p.matches(line)))
    }
}
