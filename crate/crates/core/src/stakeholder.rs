//! Stakeholder groups, optionally nested (a sub-group names its parent).

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stakeholder {
    pub id: String,
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent: Option<String>,
}

impl Stakeholder {
    pub fn new(id: &str, name: &str) -> Self {
        Self {
            id: id.to_string(),
            name: name.to_string(),
            parent: None,
        }
    }

    pub fn sub_group(id: &str, name: &str, parent: &str) -> Self {
        Self {
            parent: Some(parent.to_string()),
            ..Self::new(id, name)
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RegistryError {
    #[error("duplicate stakeholder `{0}`")]
    Duplicate(String),
    #[error("stakeholder `{0}` names unknown parent `{1}`")]
    UnknownParent(String, String),
    #[error("stakeholder nesting through `{0}` is cyclic")]
    Cycle(String),
    #[error("stakeholder id `{0}` must be lowercase letters, digits and dashes")]
    InvalidId(String),
}

/// Registry kept sorted by id.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Stakeholder>", into = "Vec<Stakeholder>")]
pub struct StakeholderRegistry {
    groups: Vec<Stakeholder>,
}

impl TryFrom<Vec<Stakeholder>> for StakeholderRegistry {
    type Error = RegistryError;
    fn try_from(groups: Vec<Stakeholder>) -> Result<Self, Self::Error> {
        Self::new(groups)
    }
}

impl From<StakeholderRegistry> for Vec<Stakeholder> {
    fn from(registry: StakeholderRegistry) -> Self {
        registry.groups
    }
}

impl StakeholderRegistry {
    pub fn new(groups: Vec<Stakeholder>) -> Result<Self, RegistryError> {
        let mut groups = groups;
        groups.sort_by(|a, b| a.id.cmp(&b.id));
        for pair in groups.windows(2) {
            if pair[0].id == pair[1].id {
                return Err(RegistryError::Duplicate(pair[0].id.clone()));
            }
        }
        let registry = Self { groups };
        registry.validate()?;
        Ok(registry)
    }

    fn validate(&self) -> Result<(), RegistryError> {
        for g in &self.groups {
            if g.id.is_empty()
                || !g
                    .id
                    .chars()
                    .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '-')
            {
                return Err(RegistryError::InvalidId(g.id.clone()));
            }
            if let Some(parent) = &g.parent {
                if self.get(parent).is_none() {
                    return Err(RegistryError::UnknownParent(g.id.clone(), parent.clone()));
                }
            }
            let mut seen = 0;
            let mut cur = g.parent.as_deref();
            while let Some(p) = cur {
                seen += 1;
                if p == g.id || seen > self.groups.len() {
                    return Err(RegistryError::Cycle(g.id.clone()));
                }
                cur = self.get(p).and_then(|s| s.parent.as_deref());
            }
        }
        Ok(())
    }

    pub fn get(&self, id: &str) -> Option<&Stakeholder> {
        self.groups
            .binary_search_by(|g| g.id.as_str().cmp(id))
            .ok()
            .map(|i| &self.groups[i])
    }

    pub fn contains(&self, id: &str) -> bool {
        self.get(id).is_some()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Stakeholder> {
        self.groups.iter()
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    /// Display name, falling back to the id for unregistered stakeholders.
    pub fn name<'a>(&'a self, id: &'a str) -> &'a str {
        self.get(id).map(|s| s.name.as_str()).unwrap_or(id)
    }

    /// Whether `id` is `ancestor` or nested anywhere beneath it.
    pub fn is_within(&self, id: &str, ancestor: &str) -> bool {
        let mut cur = Some(id);
        let mut steps = 0;
        while let Some(c) = cur {
            if c == ancestor {
                return true;
            }
            steps += 1;
            if steps > self.groups.len() + 1 {
                return false;
            }
            cur = self.get(c).and_then(|s| s.parent.as_deref());
        }
        false
    }

    pub fn is_leaf(&self, id: &str) -> bool {
        !self.groups.iter().any(|g| g.parent.as_deref() == Some(id))
    }
}
