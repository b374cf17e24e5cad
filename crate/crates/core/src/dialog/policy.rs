//! The static question-asking policy and the wording of agent questions.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::belief::BeliefState;
use crate::frame::{Action, Role, TaskFrame, EMPTY};
use crate::num::Scalar;
use crate::world::WorldModel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyConfig {
    pub rho_clarify: f64,
    pub rho_confirm: f64,
    /// A role's top value may be confirmed once it holds this much mass.
    pub confirm_threshold: f64,
    pub max_turns: usize,
    /// Synonym candidates offered for an unknown word.
    pub max_synonyms: usize,
    /// Labels gathered for a new concept before returning to the task.
    pub max_concept_labels: usize,
    /// Label questions about known concepts asked before finishing a task,
    /// when local objects are available.
    pub known_concept_queries: usize,
    /// Such a question is only asked when the model's |score| on the chosen
    /// object is below this.
    pub label_query_margin: f64,
}

impl Default for PolicyConfig {
    fn default() -> Self {
        PolicyConfig {
            rho_clarify: 0.5,
            rho_confirm: 1.0,
            confirm_threshold: 0.5,
            max_turns: 50,
            max_synonyms: 3,
            max_concept_labels: 6,
            known_concept_queries: 2,
            label_query_margin: 0.5,
        }
    }
}

impl PolicyConfig {
    pub fn relevant_roles(action: Action) -> Vec<Role> {
        let mut v = vec![Role::Action];
        v.extend_from_slice(action.roles());
        v
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum DialogAct {
    AllClarification,
    RoleClarification { role: Role },
    /// Asks the user to confirm the non-∅ roles of `frame`.
    Confirmation { frame: TaskFrame },
    PropertyQuery { word: String },
    SynonymQuery { word: String, candidate: String },
    ExampleRequest { concept: String, word: String, positive: bool },
    ConceptLabelQuery { concept: String, word: String, object: String },
    TaskComplete { frame: TaskFrame },
    DialogFailed,
}

/// How the user can answer an act.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Affordance {
    FreeText,
    YesNo,
    /// Free text or one of the listed constants.
    Menu { options: Vec<String>, allow_none: bool },
    Closed,
}

impl DialogAct {
    pub fn kind(&self) -> &'static str {
        match self {
            DialogAct::AllClarification => "AllClarification",
            DialogAct::RoleClarification { .. } => "RoleClarification",
            DialogAct::Confirmation { .. } => "Confirmation",
            DialogAct::PropertyQuery { .. } => "PropertyQuery",
            DialogAct::SynonymQuery { .. } => "SynonymQuery",
            DialogAct::ExampleRequest { .. } => "ExampleRequest",
            DialogAct::ConceptLabelQuery { .. } => "ConceptLabelQuery",
            DialogAct::TaskComplete { .. } => "TaskComplete",
            DialogAct::DialogFailed => "DialogFailed",
        }
    }

    pub fn is_question(&self) -> bool {
        !matches!(self, DialogAct::TaskComplete { .. } | DialogAct::DialogFailed)
    }

    pub fn is_clarification(&self) -> bool {
        matches!(self, DialogAct::AllClarification | DialogAct::RoleClarification { .. })
    }

    /// Questions of the unknown-word and concept-labelling sub-dialogs.
    pub fn is_learning_question(&self) -> bool {
        matches!(
            self,
            DialogAct::PropertyQuery { .. }
                | DialogAct::SynonymQuery { .. }
                | DialogAct::ExampleRequest { .. }
                | DialogAct::ConceptLabelQuery { .. }
        )
    }

    pub fn expects_yes_no(&self) -> bool {
        matches!(
            self,
            DialogAct::Confirmation { .. }
                | DialogAct::PropertyQuery { .. }
                | DialogAct::SynonymQuery { .. }
                | DialogAct::ConceptLabelQuery { .. }
        )
    }

    /// Asserted (role, value) pairs of a confirmation.
    pub fn asserted(&self) -> Vec<(Role, String)> {
        match self {
            DialogAct::Confirmation { frame } => frame.filled().into_iter().map(|(r, v)| (r, v.to_string())).collect(),
            _ => Vec::new(),
        }
    }
}

fn top_action<S: Scalar>(b: &BeliefState<S>) -> Option<Action> {
    Action::from_name(b.top(Role::Action).0)
}

/// Chooses the next act. Relevant roles are those of the top action plus
/// the action itself. A role is ready for confirmation when its top value is
/// not ∅ and holds at least the threshold. When every unconfirmed relevant
/// role is ready they are confirmed together; otherwise the agent asks about
/// the least certain role that is not ready.
pub fn next_act<S: Scalar>(b: &BeliefState<S>, config: &PolicyConfig) -> DialogAct {
    let Some(action) = top_action(b) else {
        return DialogAct::AllClarification;
    };
    let relevant = PolicyConfig::relevant_roles(action);
    let open: Vec<Role> = relevant.iter().copied().filter(|r| !b.is_confirmed(*r)).collect();
    if open.is_empty() {
        return DialogAct::TaskComplete { frame: b.top_frame() };
    }
    let tau = S::from_f64_lossy(config.confirm_threshold);
    let ready = |r: Role| {
        let (v, p) = b.top(r);
        v != EMPTY && p >= tau
    };
    let mut worst: Option<(Role, S)> = None;
    for &r in open.iter().filter(|r| !ready(**r)) {
        let m = b.role(r).max();
        worst = match worst {
            Some((wr, wm)) if wm <= m => Some((wr, wm)),
            _ => Some((r, m)),
        };
    }
    match worst {
        Some((role, _)) => DialogAct::RoleClarification { role },
        None => {
            let mut frame = TaskFrame::default();
            for r in open {
                frame.set(r, Some(b.top(r).0.to_string()));
            }
            DialogAct::Confirmation { frame }
        }
    }
}

/// Words used to describe constants and actions in agent questions.
pub struct Verbalizer<'a> {
    pub world: &'a WorldModel,
}

impl Verbalizer<'_> {
    fn name(&self, id: &str) -> String {
        self.world.display_name(id)
    }

    fn verb(action: Action) -> &'static str {
        match action {
            Action::Walk => "go",
            Action::Deliver => "deliver",
            Action::Relocate => "move",
        }
    }

    /// Question text. `context` is the current top frame, used to phrase role
    /// questions around what the agent already believes.
    pub fn text(&self, act: &DialogAct, context: &TaskFrame) -> String {
        match act {
            DialogAct::AllClarification => "What should I do?".into(),
            DialogAct::RoleClarification { role } => self.role_question(*role, context),
            DialogAct::Confirmation { frame } => {
                let action = frame.action_kind().or(context.action_kind());
                format!("You want me to {}?", self.describe(frame, action))
            }
            DialogAct::PropertyQuery { word } => format!(
                "I haven't heard the word '{word}' before. Does it refer to properties of things, like a color, shape, or weight?"
            ),
            DialogAct::SynonymQuery { word, candidate } => {
                format!("Does '{word}' mean the same thing as '{candidate}'?")
            }
            DialogAct::ExampleRequest { word, positive, .. } => {
                let not = if *positive { "" } else { " not" };
                format!("Show me an object you could{not} use the word '{word}' when describing, or say 'none of them'.")
            }
            DialogAct::ConceptLabelQuery { word, object, .. } => {
                format!("Would you use the word '{word}' when describing {}?", self.name(object))
            }
            DialogAct::TaskComplete { frame } => {
                format!("Happy to help! I will {}.", self.describe(frame, frame.action_kind()))
            }
            DialogAct::DialogFailed => "Sorry, I could not understand the task.".into(),
        }
    }

    fn role_question(&self, role: Role, context: &TaskFrame) -> String {
        let action = context.action_kind();
        let who = |r: Role| context.get(r).map(|v| self.name(v));
        match (role, action) {
            (Role::Action, _) => "What should I do?".into(),
            (Role::Patient, Some(Action::Deliver)) => match who(Role::Recipient) {
                Some(p) => format!("What should I deliver to {p}?"),
                None => "What should I deliver?".into(),
            },
            (Role::Patient, _) => "What should I move?".into(),
            (Role::Recipient, _) => "Who should I deliver it to?".into(),
            (Role::Source, _) => "Where should I move something from on its way somewhere else?".into(),
            (Role::Goal, Some(Action::Relocate)) => "Where should I move it to?".into(),
            (Role::Goal, _) => "Where should I go?".into(),
        }
    }

    fn describe(&self, frame: &TaskFrame, action: Option<Action>) -> String {
        let n = |r: Role| frame.get(r).map(|v| self.name(v));
        match action {
            Some(Action::Walk) => match n(Role::Goal) {
                Some(g) => format!("go to {g}"),
                None => "go somewhere".into(),
            },
            Some(a) => {
                let mut s = format!("{} {}", Self::verb(a), n(Role::Patient).unwrap_or_else(|| "something".into()));
                if let Some(src) = n(Role::Source) {
                    s.push_str(&format!(" from {src}"));
                }
                if let Some(r) = n(Role::Recipient) {
                    s.push_str(&format!(" to {r}"));
                }
                if let Some(g) = n(Role::Goal) {
                    s.push_str(&format!(" to {g}"));
                }
                s
            }
            None => "do something".into(),
        }
    }

    /// How the user may answer `act`.
    pub fn affordance(&self, act: &DialogAct, local_objects: &[String], patient_scope: &[String]) -> Affordance {
        let ids = |v: Vec<String>| Affordance::Menu {
            options: v,
            allow_none: false,
        };
        match act {
            DialogAct::AllClarification => Affordance::FreeText,
            DialogAct::RoleClarification { role } => match role {
                Role::Action => Affordance::FreeText,
                Role::Patient => ids(patient_scope.to_vec()),
                Role::Recipient => ids(self.world.people().iter().map(|p| p.id.clone()).collect()),
                Role::Source | Role::Goal => ids(self.world.rooms().iter().map(|r| r.id.clone()).collect()),
            },
            DialogAct::ExampleRequest { .. } => Affordance::Menu {
                options: local_objects.to_vec(),
                allow_none: true,
            },
            a if a.expects_yes_no() => Affordance::YesNo,
            _ => Affordance::Closed,
        }
    }
}

/// Counts of agent questions by kind.
pub fn tally<'a>(acts: impl IntoIterator<Item = &'a DialogAct>) -> BTreeMap<&'static str, usize> {
    let mut m = BTreeMap::new();
    for a in acts {
        *m.entry(a.kind()).or_insert(0) += 1;
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dialog::belief::init_belief;
    use crate::world::{standard_fixture, Split};

    #[test]
    fn initial_belief_asks_what_to_do() {
        let (w, _) = standard_fixture(7).unwrap();
        let b: BeliefState<f64> = init_belief(&w, &w.objects_in(Split::Test));
        let act = next_act(&b, &PolicyConfig::default());
        assert_eq!(act, DialogAct::AllClarification);
        let v = Verbalizer { world: &w };
        assert_eq!(v.text(&act, &b.top_frame()), "What should I do?");
    }

    #[test]
    fn confirmation_wording() {
        let (w, _) = standard_fixture(7).unwrap();
        let v = Verbalizer { world: &w };
        let walk = TaskFrame::walk("r3");
        let action_only = DialogAct::Confirmation {
            frame: TaskFrame {
                action: Some("walk".into()),
                ..Default::default()
            },
        };
        assert_eq!(v.text(&action_only, &walk), "You want me to go somewhere?");
        let full = DialogAct::Confirmation {
            frame: TaskFrame::relocate("o3", "r3", "r1"),
        };
        assert_eq!(v.text(&full, &walk), "You want me to move o3 from 3.514 to 3.510?");
    }
}
