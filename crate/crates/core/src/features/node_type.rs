use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Canonical node type shared by feature extraction, repair history and
/// pattern predicates.
///
/// Parser node kinds without a canonical counterpart are wrapped in
/// [`NodeType::Other`], so the mapping from parser kinds is total.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum NodeType {
    // statements
    Invocation,
    Assignment,
    LocalVariable,
    FieldDeclaration,
    If,
    Loop,
    Return,
    Throw,
    Break,
    Continue,
    Try,
    Switch,
    Synchronized,
    Assert,
    Yield,
    // expressions
    ConstructorCall,
    Cast,
    ArrayAccess,
    /// Marker for a call to an index-taking collection or string accessor
    /// such as `get(i)` or `charAt(i)`; emitted alongside `Invocation`.
    IndexedInvocation,
    NewArray,
    BinaryOperator,
    UnaryOperator,
    Conditional,
    InstanceOf,
    Lambda,
    MethodReference,
    Literal,
    FieldAccess,
    VariableRead,
    VariableWrite,
    ThisAccess,
    SuperAccess,
    TypeAccess,
    Other(String),
}

const NAMED: &[(NodeType, &str)] = &[
    (NodeType::Invocation, "Invocation"),
    (NodeType::Assignment, "Assignment"),
    (NodeType::LocalVariable, "LocalVariable"),
    (NodeType::FieldDeclaration, "FieldDeclaration"),
    (NodeType::If, "If"),
    (NodeType::Loop, "Loop"),
    (NodeType::Return, "Return"),
    (NodeType::Throw, "Throw"),
    (NodeType::Break, "Break"),
    (NodeType::Continue, "Continue"),
    (NodeType::Try, "Try"),
    (NodeType::Switch, "Switch"),
    (NodeType::Synchronized, "Synchronized"),
    (NodeType::Assert, "Assert"),
    (NodeType::Yield, "Yield"),
    (NodeType::ConstructorCall, "ConstructorCall"),
    (NodeType::Cast, "Cast"),
    (NodeType::ArrayAccess, "ArrayAccess"),
    (NodeType::IndexedInvocation, "IndexedInvocation"),
    (NodeType::NewArray, "NewArray"),
    (NodeType::BinaryOperator, "BinaryOperator"),
    (NodeType::UnaryOperator, "UnaryOperator"),
    (NodeType::Conditional, "Conditional"),
    (NodeType::InstanceOf, "InstanceOf"),
    (NodeType::Lambda, "Lambda"),
    (NodeType::MethodReference, "MethodReference"),
    (NodeType::Literal, "Literal"),
    (NodeType::FieldAccess, "FieldAccess"),
    (NodeType::VariableRead, "VariableRead"),
    (NodeType::VariableWrite, "VariableWrite"),
    (NodeType::ThisAccess, "ThisAccess"),
    (NodeType::SuperAccess, "SuperAccess"),
    (NodeType::TypeAccess, "TypeAccess"),
];

impl NodeType {
    /// All named (non-`Other`) members of the taxonomy.
    pub fn named() -> impl Iterator<Item = &'static NodeType> {
        NAMED.iter().map(|(t, _)| t)
    }

    pub fn name(&self) -> &str {
        match self {
            NodeType::Other(raw) => raw,
            named => NAMED
                .iter()
                .find(|(t, _)| t == named)
                .map(|(_, n)| *n)
                .expect("every named variant is listed"),
        }
    }

    /// Whether this type can describe a whole statement.
    pub fn is_statement_level(&self) -> bool {
        matches!(
            self,
            NodeType::Invocation
                | NodeType::Assignment
                | NodeType::LocalVariable
                | NodeType::FieldDeclaration
                | NodeType::If
                | NodeType::Loop
                | NodeType::Return
                | NodeType::Throw
                | NodeType::Break
                | NodeType::Continue
                | NodeType::Try
                | NodeType::Switch
                | NodeType::Synchronized
                | NodeType::Assert
                | NodeType::Yield
                | NodeType::ConstructorCall
                | NodeType::UnaryOperator
                | NodeType::Other(_)
        )
    }
}

impl fmt::Display for NodeType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeType::Other(raw) => write!(f, "Other({raw})"),
            named => f.write_str(named.name()),
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("unknown node type `{0}`")]
pub struct UnknownNodeType(String);

impl FromStr for NodeType {
    type Err = UnknownNodeType;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if let Some(raw) = s.strip_prefix("Other(").and_then(|r| r.strip_suffix(')')) {
            if raw.is_empty() {
                return Err(UnknownNodeType(s.to_string()));
            }
            return Ok(NodeType::Other(raw.to_string()));
        }
        NAMED
            .iter()
            .find(|(_, n)| *n == s)
            .map(|(t, _)| t.clone())
            .ok_or_else(|| UnknownNodeType(s.to_string()))
    }
}

impl TryFrom<String> for NodeType {
    type Error = UnknownNodeType;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        value.parse()
    }
}

impl From<NodeType> for String {
    fn from(value: NodeType) -> Self {
        value.to_string()
    }
}
