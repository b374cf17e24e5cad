//! One conversation: the turn loop, its log, and the unknown-word
//! sub-dialog.

use std::collections::{BTreeMap, BTreeSet};

use log::warn;
use serde::{Deserialize, Serialize};

use super::belief::{
    apply_confirmation_answer, belief_from_groundings, init_belief, softmax, update_belief, BeliefState,
    BeliefSummary, UtteranceBelief,
};
use super::policy::{next_act, Affordance, DialogAct, PolicyConfig, Verbalizer};
use crate::agent::{Agent, LearningEvent, SKIP_WORDS};
use crate::error::{Error, Result};
use crate::frame::{Role, TaskFrame};
use crate::semparse::{is_punctuation, tokenize};

pub const BACK_TO_TASK: &str = "Thanks. Now back to business.";

/// A user reply.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", content = "value", rename_all = "snake_case")]
pub enum UserInput {
    Text(String),
    Yes,
    No,
    /// A constant picked from a menu.
    Choice(String),
    NoneOfThem,
    /// Opt out of the current learning sub-dialog.
    Stop,
}

impl UserInput {
    pub fn kind(&self) -> &'static str {
        match self {
            UserInput::Text(_) => "text",
            UserInput::Yes => "yes",
            UserInput::No => "no",
            UserInput::Choice(_) => "choice",
            UserInput::NoneOfThem => "none",
            UserInput::Stop => "stop",
        }
    }

    /// Reads a typed reply in the light of the question it answers.
    pub fn interpret(text: &str, act: &DialogAct, affordance: &Affordance) -> UserInput {
        let norm: String = tokenize(text)
            .into_iter()
            .filter(|t| !is_punctuation(t))
            .collect::<Vec<_>>()
            .join(" ");
        if act.expects_yes_no() {
            match norm.as_str() {
                "yes" | "y" | "yeah" | "yep" | "sure" | "correct" | "right" => return UserInput::Yes,
                "no" | "n" | "nope" | "wrong" => return UserInput::No,
                _ => {}
            }
        }
        if act.is_learning_question() && matches!(norm.as_str(), "stop" | "skip" | "never mind") {
            return UserInput::Stop;
        }
        if let Affordance::Menu { options, allow_none } = affordance {
            if *allow_none && matches!(norm.as_str(), "none" | "none of them") {
                return UserInput::NoneOfThem;
            }
            if let Some(o) = options.iter().find(|o| o.to_lowercase() == norm) {
                return UserInput::Choice(o.clone());
            }
        }
        UserInput::Text(text.trim().to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Speaker {
    Agent,
    User,
}

/// How a free-text user turn was read.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "as", rename_all = "snake_case")]
pub enum Reading {
    Command { tokens: Vec<String> },
    RoleAnswer { role: Role, tokens: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Turn {
    pub speaker: Speaker,
    /// Act kind for agent turns, input kind for user turns.
    pub kind: String,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub act: Option<DialogAct>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<UserInput>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reading: Option<Reading>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub belief: Option<BeliefSummary>,
}

/// Question counts of one conversation. The opening "What should I do?" is
/// not a question the user's command caused and is not counted.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpisodeMetrics {
    pub clarification_questions: usize,
    pub confirmations: usize,
    pub learning_questions: usize,
    pub user_turns: usize,
    pub completed: bool,
}

impl EpisodeMetrics {
    pub fn questions(&self) -> usize {
        self.clarification_questions + self.confirmations + self.learning_questions
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConversationLog {
    pub session_id: String,
    pub patient_scope: Vec<String>,
    pub local_objects: Vec<String>,
    pub turns: Vec<Turn>,
    pub events: Vec<LearningEvent>,
    /// The confirmed frame, once the task is complete.
    pub outcome: Option<TaskFrame>,
    pub failed: bool,
    pub metrics: EpisodeMetrics,
}

impl ConversationLog {
    pub fn user_turns(&self) -> impl Iterator<Item = &Turn> {
        self.turns.iter().filter(|t| t.speaker == Speaker::User)
    }

    pub fn agent_acts(&self) -> impl Iterator<Item = &DialogAct> {
        self.turns.iter().filter_map(|t| t.act.as_ref())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionConfig {
    pub policy: PolicyConfig,
    /// Objects the patient may be.
    pub patient_scope: Vec<String>,
    /// Objects at hand for example requests and label questions.
    pub local_objects: Vec<String>,
    /// Ask about unknown words and label objects during the conversation.
    pub learning: bool,
}

impl SessionConfig {
    pub fn new(patient_scope: Vec<String>, local_objects: Vec<String>) -> Self {
        SessionConfig {
            policy: PolicyConfig::default(),
            patient_scope,
            local_objects,
            learning: true,
        }
    }
}

/// What the agent says after a turn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentMove {
    pub act: DialogAct,
    pub text: String,
    pub affordance: Affordance,
    /// Said before the act, e.g. when a learning sub-dialog ends.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preamble: Option<String>,
    pub belief: BeliefSummary,
    pub finished: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum WordStage {
    Property,
    Synonym { candidates: Vec<String>, next: usize },
    /// Example and label questions for a new concept; `asked` counts them.
    Examples { asked: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct WordDialog {
    word: String,
    adjective: bool,
    stage: WordStage,
    /// The command that mentioned the word, reparsed afterwards.
    command: String,
}

#[derive(Debug, Clone)]
pub struct Session {
    id: String,
    agent: Agent,
    config: SessionConfig,
    belief: BeliefState<f64>,
    pending: DialogAct,
    word_dialog: Option<WordDialog>,
    ignore: BTreeSet<String>,
    asked_words: BTreeSet<String>,
    /// Concept predicates named in commands, with the word used.
    mentioned: BTreeMap<String, String>,
    known_queries: usize,
    labelled: BTreeSet<(String, String)>,
    log: ConversationLog,
    finished: bool,
}

impl Session {
    /// Opens a conversation; the agent speaks first.
    pub fn new(id: impl Into<String>, agent: Agent, config: SessionConfig) -> Self {
        let belief = init_belief(&agent.world, &config.patient_scope);
        let log = ConversationLog {
            session_id: id.into(),
            patient_scope: config.patient_scope.clone(),
            local_objects: config.local_objects.clone(),
            turns: Vec::new(),
            events: Vec::new(),
            outcome: None,
            failed: false,
            metrics: EpisodeMetrics::default(),
        };
        let mut s = Session {
            id: log.session_id.clone(),
            agent,
            config,
            belief,
            pending: DialogAct::AllClarification,
            word_dialog: None,
            ignore: SKIP_WORDS.iter().map(|w| w.to_string()).collect(),
            asked_words: BTreeSet::new(),
            mentioned: BTreeMap::new(),
            known_queries: 0,
            labelled: BTreeSet::new(),
            log,
            finished: false,
        };
        s.say(DialogAct::AllClarification, None, false);
        s
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn agent(&self) -> &Agent {
        &self.agent
    }

    pub fn config(&self) -> &SessionConfig {
        &self.config
    }

    pub fn belief(&self) -> &BeliefState<f64> {
        &self.belief
    }

    pub fn pending(&self) -> &DialogAct {
        &self.pending
    }

    pub fn log(&self) -> &ConversationLog {
        &self.log
    }

    pub fn into_log(self) -> ConversationLog {
        self.log
    }

    pub fn is_finished(&self) -> bool {
        self.finished
    }

    fn verbalizer(&self) -> Verbalizer<'_> {
        Verbalizer {
            world: &self.agent.world,
        }
    }

    /// The agent's current question with its wording and answer options.
    pub fn current(&self) -> AgentMove {
        self.make_move(self.pending.clone(), None)
    }

    fn make_move(&self, act: DialogAct, preamble: Option<String>) -> AgentMove {
        let v = self.verbalizer();
        AgentMove {
            text: v.text(&act, &self.belief.top_frame()),
            affordance: v.affordance(&act, &self.config.local_objects, &self.config.patient_scope),
            act,
            preamble,
            belief: BeliefSummary::from(&self.belief),
            finished: self.finished,
        }
    }

    /// Reads a typed reply to the current question.
    pub fn interpret(&self, text: &str) -> UserInput {
        let aff = self
            .verbalizer()
            .affordance(&self.pending, &self.config.local_objects, &self.config.patient_scope);
        UserInput::interpret(text, &self.pending, &aff)
    }

    fn say(&mut self, act: DialogAct, preamble: Option<&str>, counted: bool) {
        if counted {
            let m = &mut self.log.metrics;
            match &act {
                a if a.is_clarification() => m.clarification_questions += 1,
                DialogAct::Confirmation { .. } => m.confirmations += 1,
                a if a.is_learning_question() => m.learning_questions += 1,
                _ => {}
            }
        }
        let mut text = self.verbalizer().text(&act, &self.belief.top_frame());
        if let Some(p) = preamble {
            text = format!("{p} {text}");
        }
        self.log.turns.push(Turn {
            speaker: Speaker::Agent,
            kind: act.kind().to_string(),
            text,
            act: Some(act.clone()),
            input: None,
            reading: None,
            belief: Some(BeliefSummary::from(&self.belief)),
        });
        self.pending = act;
    }

    /// Applies one user reply and returns the agent's next move.
    pub fn step(&mut self, input: UserInput) -> Result<AgentMove> {
        if self.finished {
            return Err(Error::Dialog(format!("session {} has finished", self.id)));
        }
        self.log.metrics.user_turns += 1;
        let text = match &input {
            UserInput::Text(t) | UserInput::Choice(t) => t.clone(),
            other => other.kind().to_string(),
        };
        self.log.turns.push(Turn {
            speaker: Speaker::User,
            kind: input.kind().to_string(),
            text,
            act: None,
            input: Some(input.clone()),
            reading: None,
            belief: None,
        });

        let mut preamble = None;
        let pending = self.pending.clone();
        let act = if self.word_dialog.is_some() {
            match self.word_reply(&input)? {
                Some(act) => act,
                None => {
                    preamble = Some(BACK_TO_TASK);
                    let command = self.word_dialog.take().map(|d| d.command).unwrap_or_default();
                    match self.read_command(&command)? {
                        Some(act) => act,
                        None => self.decide()?,
                    }
                }
            }
        } else {
            let started = match (&pending, &input) {
                (DialogAct::ConceptLabelQuery { concept, object, .. }, UserInput::Yes | UserInput::No) => {
                    let label = if input == UserInput::Yes { 1 } else { -1 };
                    self.label(concept, object, label)?;
                    None
                }
                (DialogAct::Confirmation { .. }, UserInput::Yes | UserInput::No) => {
                    let rho = self.config.policy.rho_clarify;
                    self.belief =
                        apply_confirmation_answer(&self.belief, &pending.asserted(), input == UserInput::Yes, rho)?;
                    None
                }
                (DialogAct::RoleClarification { role }, UserInput::Text(t)) if *role != Role::Action => {
                    self.read_role_answer(*role, t)?
                }
                (DialogAct::RoleClarification { role }, UserInput::Choice(c)) => {
                    let rho = self.config.policy.rho_clarify;
                    let bx = UtteranceBelief::single(*role, BTreeMap::from([(c.clone(), 1.0)]));
                    self.belief = update_belief(&self.belief, &bx, rho)?;
                    None
                }
                (_, UserInput::Text(t)) => self.read_command(t)?,
                _ => None,
            };
            match started {
                Some(act) => act,
                None => self.decide()?,
            }
        };

        let act = if self.log.metrics.user_turns >= self.config.policy.max_turns && act.is_question() {
            self.finished = true;
            self.log.failed = true;
            DialogAct::DialogFailed
        } else {
            act
        };
        self.say(act.clone(), preamble, true);
        if matches!(act, DialogAct::DialogFailed) {
            self.finished = true;
            self.log.failed = true;
        }
        Ok(self.make_move(act, preamble.map(str::to_string)))
    }

    /// Convenience: interpret typed text, then step.
    pub fn step_text(&mut self, text: &str) -> Result<AgentMove> {
        let input = self.interpret(text);
        self.step(input)
    }

    fn set_reading(&mut self, reading: Reading) {
        if let Some(t) = self.log.turns.last_mut() {
            t.reading = Some(reading);
        }
    }

    fn content_tokens(&self, text: &str) -> Vec<String> {
        tokenize(text)
            .into_iter()
            .filter(|t| !is_punctuation(t) && !self.ignore.contains(t))
            .collect()
    }

    /// An unknown word next to a perceptual word, not yet asked about.
    fn unknown_word(&self, tokens: &[String]) -> Option<(String, bool)> {
        let lex = self.agent.parser.lexicon();
        let sig = self.agent.parser.signature();
        tokens.iter().enumerate().find_map(|(i, t)| {
            let unknown = t.chars().all(char::is_alphabetic)
                && !lex.knows(t)
                && !sig.contains(t)
                && !self.asked_words.contains(t)
                && self.agent.concepts.predicate_of(t).is_none();
            let next_perceptual = tokens.get(i + 1).is_some_and(|n| self.agent.is_concept_word(n));
            let prev_perceptual = i > 0 && self.agent.is_concept_word(&tokens[i - 1]);
            (unknown && (next_perceptual || prev_perceptual)).then(|| (t.clone(), next_perceptual))
        })
    }

    /// Folds a command into the belief. Returns a question when the command
    /// starts an unknown-word sub-dialog instead.
    fn read_command(&mut self, text: &str) -> Result<Option<DialogAct>> {
        let tokens = self.content_tokens(text);
        if self.config.learning && !self.config.local_objects.is_empty() {
            if let Some((word, adjective)) = self.unknown_word(&tokens) {
                self.asked_words.insert(word.clone());
                self.word_dialog = Some(WordDialog {
                    word: word.clone(),
                    adjective,
                    stage: WordStage::Property,
                    command: text.to_string(),
                });
                return Ok(Some(DialogAct::PropertyQuery { word }));
            }
        }
        self.set_reading(Reading::Command { tokens: tokens.clone() });
        for (p, w) in self.agent.concepts_in(&tokens) {
            self.mentioned.entry(p).or_insert(w);
        }
        let beam = self.agent.ground_command(&tokens, &self.ignore, &self.config.patient_scope);
        let scored: Vec<_> = beam.into_iter().map(|(p, d)| (p.score, d)).collect();
        if let Ok(bx) = belief_from_groundings(&scored) {
            self.belief = update_belief(&self.belief, &bx, self.config.policy.rho_clarify)?;
        }
        Ok(None)
    }

    /// Folds a noun-phrase answer about one role into the belief. Answers
    /// that do not read as a description of that role are tried as commands.
    fn read_role_answer(&mut self, role: Role, text: &str) -> Result<Option<DialogAct>> {
        let tokens = self.content_tokens(text);
        let beam = self
            .agent
            .ground_role_answer(role, &tokens, &self.ignore, &self.config.patient_scope);
        let weights = softmax(&beam.iter().map(|(p, _)| p.score).collect::<Vec<_>>());
        let support = &self.belief.role(role).dist;
        let mut dist: BTreeMap<String, f64> = BTreeMap::new();
        for ((_, d), w) in beam.iter().zip(weights) {
            for (c, p) in d {
                if support.contains_key(c) {
                    *dist.entry(c.clone()).or_insert(0.0) += w * p;
                }
            }
        }
        dist.retain(|_, p| *p > 0.0);
        let total: f64 = dist.values().sum();
        if total <= 0.0 {
            return self.read_command(text);
        }
        for p in dist.values_mut() {
            *p /= total;
        }
        self.set_reading(Reading::RoleAnswer { role, tokens });
        let bx = UtteranceBelief::single(role, dist);
        self.belief = update_belief(&self.belief, &bx, self.config.policy.rho_clarify)?;
        Ok(None)
    }

    fn label(&mut self, predicate: &str, object: &str, label: i8) -> Result<()> {
        self.agent.concepts.add_label(predicate, object, label)?;
        self.labelled.insert((predicate.to_string(), object.to_string()));
        self.log.events.push(LearningEvent::Label {
            predicate: predicate.to_string(),
            object: object.to_string(),
            label,
        });
        Ok(())
    }

    fn unlabelled_local(&self, predicate: &str) -> Vec<String> {
        self.config
            .local_objects
            .iter()
            .filter(|o| !self.labelled.contains(&(predicate.to_string(), o.to_string())))
            .cloned()
            .collect()
    }

    /// Policy act, with label questions about mentioned concepts slipped in
    /// before the task is declared complete.
    fn decide(&mut self) -> Result<DialogAct> {
        let act = next_act(&self.belief, &self.config.policy);
        let DialogAct::TaskComplete { frame } = &act else {
            return Ok(act);
        };
        if self.config.learning {
            if self.known_queries < self.config.policy.known_concept_queries {
                if let Some(q) = self.known_concept_query()? {
                    self.known_queries += 1;
                    return Ok(q);
                }
            }
            if let Some(patient) = frame.patient.clone() {
                if self.config.local_objects.contains(&patient) {
                    let preds: Vec<String> = self.mentioned.keys().cloned().collect();
                    for p in preds {
                        if !self.labelled.contains(&(p.clone(), patient.clone())) {
                            self.label(&p, &patient, 1)?;
                        }
                    }
                }
            }
        }
        self.finished = true;
        self.log.outcome = Some(frame.clone());
        self.log.metrics.completed = true;
        Ok(act)
    }

    /// A label question on the least certain local object for a concept the
    /// user mentioned, if the model is unsure about it.
    fn known_concept_query(&self) -> Result<Option<DialogAct>> {
        for (predicate, word) in &self.mentioned {
            let candidates = self.unlabelled_local(predicate);
            let Some(object) = self.agent.concepts.select_query_object(predicate, &candidates)? else {
                continue;
            };
            let pred = self.agent.concepts.predict(predicate, &object)?;
            if pred.score.abs() < self.config.policy.label_query_margin {
                return Ok(Some(DialogAct::ConceptLabelQuery {
                    concept: predicate.clone(),
                    word: word.clone(),
                    object,
                }));
            }
        }
        Ok(None)
    }

    fn word_act(&self) -> Result<Option<DialogAct>> {
        let Some(d) = &self.word_dialog else {
            return Ok(None);
        };
        let word = d.word.clone();
        Ok(match &d.stage {
            WordStage::Property => Some(DialogAct::PropertyQuery { word }),
            WordStage::Synonym { candidates, next } => Some(DialogAct::SynonymQuery {
                word,
                candidate: candidates[*next].clone(),
            }),
            WordStage::Examples { asked } if *asked >= self.config.policy.max_concept_labels => None,
            WordStage::Examples { asked } if *asked < 3 => {
                let candidates = self.unlabelled_local(&word);
                (!candidates.is_empty()).then(|| DialogAct::ExampleRequest {
                    concept: word.clone(),
                    word,
                    positive: *asked != 1,
                })
            }
            WordStage::Examples { .. } => {
                let candidates = self.unlabelled_local(&word);
                self.agent
                    .concepts
                    .select_query_object(&word, &candidates)?
                    .map(|object| DialogAct::ConceptLabelQuery {
                        concept: word.clone(),
                        word,
                        object,
                    })
            }
        })
    }

    /// Advances the unknown-word sub-dialog. `None` means it is over.
    fn word_reply(&mut self, input: &UserInput) -> Result<Option<DialogAct>> {
        let Some(mut d) = self.word_dialog.clone() else {
            return Ok(None);
        };
        if *input == UserInput::Stop {
            if !matches!(d.stage, WordStage::Examples { .. }) {
                self.ignore.insert(d.word.clone());
            }
            return Ok(None);
        }
        match d.stage.clone() {
            WordStage::Property => {
                if *input != UserInput::Yes {
                    self.ignore.insert(d.word.clone());
                    return Ok(None);
                }
                let candidates = self.synonym_candidates(&d.word);
                d.stage = if candidates.is_empty() {
                    match self.new_concept(&d) {
                        Some(s) => s,
                        None => return Ok(None),
                    }
                } else {
                    WordStage::Synonym { candidates, next: 0 }
                };
            }
            WordStage::Synonym { candidates, next } => {
                if *input == UserInput::Yes {
                    let predicate = self.agent.add_synonym_word(&d.word, &candidates[next])?;
                    self.log.events.push(LearningEvent::Synonym {
                        word: d.word.clone(),
                        known_word: candidates[next].clone(),
                        predicate,
                    });
                    return Ok(None);
                }
                d.stage = if next + 1 < candidates.len() {
                    WordStage::Synonym { candidates, next: next + 1 }
                } else {
                    match self.new_concept(&d) {
                        Some(s) => s,
                        None => return Ok(None),
                    }
                };
            }
            WordStage::Examples { asked } => {
                match (&self.pending, input) {
                    (DialogAct::ExampleRequest { concept, positive, .. }, UserInput::Choice(o) | UserInput::Text(o))
                        if self.config.local_objects.contains(o) =>
                    {
                        let (concept, label) = (concept.clone(), if *positive { 1 } else { -1 });
                        self.label(&concept, o, label)?;
                    }
                    (DialogAct::ConceptLabelQuery { concept, object, .. }, UserInput::Yes | UserInput::No) => {
                        let (concept, object) = (concept.clone(), object.clone());
                        self.label(&concept, &object, if *input == UserInput::Yes { 1 } else { -1 })?;
                    }
                    _ => {}
                }
                d.stage = WordStage::Examples { asked: asked + 1 };
            }
        }
        self.word_dialog = Some(d);
        self.word_act()
    }

    fn synonym_candidates(&self, word: &str) -> Vec<String> {
        let known = self.agent.concept_words();
        let emb = self.agent.parser.embeddings();
        let theta = self.agent.parser.config().oov_threshold;
        emb.rank(word, known.iter().map(String::as_str))
            .into_iter()
            .filter(|(_, c)| *c >= theta)
            .take(self.config.policy.max_synonyms)
            .map(|(w, _)| w)
            .collect()
    }

    /// Starts a concept for the word; a word that cannot be added is
    /// skipped for the rest of the conversation.
    fn new_concept(&mut self, d: &WordDialog) -> Option<WordStage> {
        if let Err(e) = self.agent.create_concept_word(&d.word, d.adjective) {
            warn!("cannot add `{}`: {e}", d.word);
            self.ignore.insert(d.word.clone());
            return None;
        }
        self.log.events.push(LearningEvent::NewConcept {
            word: d.word.clone(),
            adjective: d.adjective,
        });
        Some(WordStage::Examples { asked: 0 })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::Split;

    fn session(learning: bool) -> Session {
        let agent = Agent::fixture(7).unwrap();
        let test = agent.world.objects_in(Split::Test);
        let mut cfg = SessionConfig::new(test.clone(), test);
        cfg.learning = learning;
        Session::new("t", agent, cfg)
    }

    #[test]
    fn lounge_by_the_kitchen_is_confirmed_then_done() {
        let mut s = session(false);
        assert_eq!(s.current().text, "What should I do?");
        let m = s.step_text("go to the lounge by the kitchen").unwrap();
        assert_eq!(m.act, DialogAct::Confirmation { frame: TaskFrame::walk("r3") });
        assert_eq!(m.text, "You want me to go to 3.514?");
        let m = s.step_text("yes").unwrap();
        assert_eq!(m.act, DialogAct::TaskComplete { frame: TaskFrame::walk("r3") });
        assert!(m.finished);
        assert_eq!(s.log().metrics.confirmations, 1);
        assert_eq!(s.log().metrics.questions(), 1);
        assert!(s.step_text("hello").is_err());
    }

    #[test]
    fn unparseable_command_asks_again() {
        let mut s = session(false);
        let m = s.step_text("blorp zing").unwrap();
        assert_eq!(m.act, DialogAct::AllClarification);
    }

    #[test]
    fn uninformative_turns_fail_at_the_cap() {
        let mut s = session(false);
        let mut last = s.current().act;
        for _ in 0..50 {
            last = s.step_text("blorp").unwrap().act;
            if s.is_finished() {
                break;
            }
        }
        assert_eq!(last, DialogAct::DialogFailed);
        assert!(s.log().failed);
        assert_eq!(s.log().metrics.user_turns, 50);
    }

    #[test]
    fn role_answer_fills_the_goal() {
        let mut s = session(false);
        let m = s.step_text("walk to an office").unwrap();
        assert_eq!(m.act, DialogAct::RoleClarification { role: Role::Goal });
        // "robert" only resembles "bob", so one answer is not yet enough.
        let m = s.step_text("robert's office").unwrap();
        assert_eq!(s.belief().top(Role::Goal).0, "r1");
        assert_eq!(m.act, DialogAct::RoleClarification { role: Role::Goal });
        let reading = s.log().turns.iter().rev().find_map(|t| t.reading.clone());
        assert_eq!(
            reading,
            Some(Reading::RoleAnswer {
                role: Role::Goal,
                tokens: vec!["robert".into(), "'s".into(), "office".into()]
            })
        );
    }

    #[test]
    fn menu_choice_counts_as_evidence() {
        let mut s = session(false);
        s.step_text("walk to an office").unwrap();
        let m = s.step(UserInput::Choice("r4".into())).unwrap();
        assert_eq!(m.act, DialogAct::Confirmation { frame: TaskFrame::walk("r4") });
    }

    #[test]
    fn typed_replies_are_interpreted() {
        let s = session(false);
        let conf = DialogAct::Confirmation { frame: TaskFrame::walk("r1") };
        assert_eq!(UserInput::interpret("Yes.", &conf, &Affordance::YesNo), UserInput::Yes);
        assert_eq!(UserInput::interpret("nope", &conf, &Affordance::YesNo), UserInput::No);
        let menu = Affordance::Menu { options: vec!["o1".into()], allow_none: true };
        let req = DialogAct::ExampleRequest { concept: "x".into(), word: "x".into(), positive: true };
        assert_eq!(UserInput::interpret("none of them", &req, &menu), UserInput::NoneOfThem);
        assert_eq!(UserInput::interpret("O1", &req, &menu), UserInput::Choice("o1".into()));
        assert_eq!(s.interpret("go to the kitchen"), UserInput::Text("go to the kitchen".into()));
    }

    #[test]
    fn declined_property_question_skips_the_word() {
        let mut s = session(true);
        let m = s.step_text("bring the zorby can to alice").unwrap();
        assert_eq!(m.act, DialogAct::PropertyQuery { word: "zorby".into() });
        let m = s.step_text("no").unwrap();
        assert_eq!(m.preamble.as_deref(), Some(BACK_TO_TASK));
        assert!(!m.act.is_learning_question());
        assert!(s.log().events.is_empty());
    }

    #[test]
    fn log_round_trips_through_json() {
        let mut s = session(false);
        s.step_text("go to the kitchen").unwrap();
        let json = serde_json::to_string(s.log()).unwrap();
        let back: ConversationLog = serde_json::from_str(&json).unwrap();
        assert_eq!(&back, s.log());
    }
}
