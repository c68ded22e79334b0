use std::collections::BTreeSet;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum RosterError {
    #[error("tool `{0}` is already registered")]
    DuplicateTool(String),
    #[error("unknown tool `{0}`")]
    UnknownTool(String),
    #[error("tool name must not be empty")]
    EmptyName,
}

/// Per-tool settings kept alongside the repair history.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToolEntry {
    /// Pattern ids the tool implements, on top of the pattern config's
    /// implementer lists.
    #[serde(default)]
    pub patterns: BTreeSet<String>,
}

/// Registered tools in registration order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ToolRoster {
    tools: IndexMap<String, ToolEntry>,
}

impl ToolRoster {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(
        &mut self,
        name: impl Into<String>,
        patterns: impl IntoIterator<Item = String>,
    ) -> Result<(), RosterError> {
        let name = name.into();
        if name.trim().is_empty() {
            return Err(RosterError::EmptyName);
        }
        if self.tools.contains_key(&name) {
            return Err(RosterError::DuplicateTool(name));
        }
        self.tools.insert(
            name,
            ToolEntry {
                patterns: patterns.into_iter().collect(),
            },
        );
        Ok(())
    }

    /// Registers `name` with no patterns unless it is already known.
    pub fn ensure(&mut self, name: &str) -> bool {
        if self.tools.contains_key(name) {
            return false;
        }
        self.tools.insert(name.to_string(), ToolEntry::default());
        true
    }

    pub fn contains(&self, name: &str) -> bool {
        self.tools.contains_key(name)
    }

    pub fn get(&self, name: &str) -> Option<&ToolEntry> {
        self.tools.get(name)
    }

    pub fn get_mut(&mut self, name: &str) -> Option<&mut ToolEntry> {
        self.tools.get_mut(name)
    }

    pub fn require(&self, name: &str) -> Result<&ToolEntry, RosterError> {
        self.get(name).ok_or_else(|| RosterError::UnknownTool(name.to_string()))
    }

    /// Tool names in registration order.
    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.tools.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &ToolEntry)> {
        self.tools.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// Registration index of `name`.
    pub fn position(&self, name: &str) -> Option<usize> {
        self.tools.get_index_of(name)
    }

    pub fn len(&self) -> usize {
        self.tools.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tools.is_empty()
    }
}
