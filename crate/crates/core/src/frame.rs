//! Task frames: the discrete commands the agent can execute.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Placeholder for an unfilled role.
pub const EMPTY: &str = "∅";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Action,
    Patient,
    Recipient,
    Source,
    Goal,
}

impl Role {
    pub const ALL: [Role; 5] = [Role::Action, Role::Patient, Role::Recipient, Role::Source, Role::Goal];

    pub fn name(self) -> &'static str {
        match self {
            Role::Action => "action",
            Role::Patient => "patient",
            Role::Recipient => "recipient",
            Role::Source => "source",
            Role::Goal => "goal",
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Role {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Role::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown role `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Action {
    Walk,
    Deliver,
    Relocate,
}

impl Action {
    pub const ALL: [Action; 3] = [Action::Walk, Action::Deliver, Action::Relocate];

    pub fn name(self) -> &'static str {
        match self {
            Action::Walk => "walk",
            Action::Deliver => "deliver",
            Action::Relocate => "relocate",
        }
    }

    pub fn from_name(s: &str) -> Option<Action> {
        Action::ALL.into_iter().find(|a| a.name() == s)
    }

    /// Argument roles in the order the action predicate takes them.
    pub fn roles(self) -> &'static [Role] {
        match self {
            Action::Walk => &[Role::Goal],
            Action::Deliver => &[Role::Patient, Role::Recipient],
            Action::Relocate => &[Role::Patient, Role::Source, Role::Goal],
        }
    }
}

/// (action, patient, recipient, source, goal); `None` is ∅.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TaskFrame {
    pub action: Option<String>,
    pub patient: Option<String>,
    pub recipient: Option<String>,
    pub source: Option<String>,
    pub goal: Option<String>,
}

impl TaskFrame {
    pub fn walk(goal: &str) -> Self {
        TaskFrame {
            action: Some("walk".into()),
            goal: Some(goal.into()),
            ..Default::default()
        }
    }

    pub fn deliver(patient: &str, recipient: &str) -> Self {
        TaskFrame {
            action: Some("deliver".into()),
            patient: Some(patient.into()),
            recipient: Some(recipient.into()),
            ..Default::default()
        }
    }

    pub fn relocate(patient: &str, source: &str, goal: &str) -> Self {
        TaskFrame {
            action: Some("relocate".into()),
            patient: Some(patient.into()),
            source: Some(source.into()),
            goal: Some(goal.into()),
            ..Default::default()
        }
    }

    pub fn get(&self, role: Role) -> Option<&str> {
        match role {
            Role::Action => self.action.as_deref(),
            Role::Patient => self.patient.as_deref(),
            Role::Recipient => self.recipient.as_deref(),
            Role::Source => self.source.as_deref(),
            Role::Goal => self.goal.as_deref(),
        }
    }

    pub fn set(&mut self, role: Role, value: Option<String>) {
        let slot = match role {
            Role::Action => &mut self.action,
            Role::Patient => &mut self.patient,
            Role::Recipient => &mut self.recipient,
            Role::Source => &mut self.source,
            Role::Goal => &mut self.goal,
        };
        *slot = value;
    }

    pub fn action_kind(&self) -> Option<Action> {
        self.action.as_deref().and_then(Action::from_name)
    }

    /// Filled roles in role order.
    pub fn filled(&self) -> Vec<(Role, &str)> {
        Role::ALL
            .into_iter()
            .filter_map(|r| self.get(r).map(|v| (r, v)))
            .collect()
    }

    /// Relevant roles are exactly the ones filled, and only those.
    pub fn is_well_formed(&self) -> bool {
        let Some(action) = self.action_kind() else {
            return self.filled().is_empty();
        };
        Role::ALL[1..]
            .iter()
            .all(|r| action.roles().contains(r) == self.get(*r).is_some())
    }
}

impl fmt::Display for TaskFrame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = Role::ALL
            .iter()
            .map(|r| format!("{}={}", r, self.get(*r).unwrap_or(EMPTY)))
            .collect();
        write!(f, "({})", parts.join(", "))
    }
}
