//! Simulated user: templated commands over gold tasks and truthful answers
//! from gold world knowledge.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::agent::Agent;
use crate::data;
use crate::dialog::{ConversationLog, DialogAct, Session, SessionConfig, UserInput};
use crate::error::{Error, Result};
use crate::frame::{Action, Role, TaskFrame};
use crate::world::{ObjectRecord, WorldModel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Templates {
    pub commands: BTreeMap<String, Vec<String>>,
    pub rephrasings: BTreeMap<String, Vec<String>>,
    pub rooms: BTreeMap<String, Vec<String>>,
    pub canonical_rooms: BTreeMap<String, String>,
    pub people: BTreeMap<String, Vec<String>>,
    /// attribute → value → words.
    pub modifiers: BTreeMap<String, BTreeMap<String, Vec<String>>>,
    /// shape value → words.
    pub nouns: BTreeMap<String, Vec<String>>,
    /// Nouns true of every object.
    pub generic_nouns: Vec<String>,
    pub determiners: Vec<String>,
}

/// What a perceptual word means to the user: the attribute values it covers.
/// `None` attribute means every object.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct WordMeaning {
    pub attribute: Option<String>,
    pub values: BTreeSet<String>,
}

impl WordMeaning {
    pub fn applies_to(&self, object: &ObjectRecord) -> bool {
        match &self.attribute {
            None => true,
            Some(a) => object.latent_attributes.get(a).is_some_and(|v| self.values.contains(v)),
        }
    }
}

impl Templates {
    pub fn bundled() -> Result<Self> {
        Self::from_json(data::TEMPLATES_JSON)
    }

    pub fn from_json(json: &str) -> Result<Self> {
        Ok(serde_json::from_str(json)?)
    }

    /// The user's perceptual vocabulary.
    pub fn meanings(&self) -> BTreeMap<String, WordMeaning> {
        let mut out = BTreeMap::new();
        for (attr, values) in &self.modifiers {
            for (value, words) in values {
                for w in words {
                    out.insert(
                        w.clone(),
                        WordMeaning {
                            attribute: Some(attr.clone()),
                            values: BTreeSet::from([value.clone()]),
                        },
                    );
                }
            }
        }
        for (value, words) in &self.nouns {
            for w in words {
                out.insert(
                    w.clone(),
                    WordMeaning {
                        attribute: Some("shape".into()),
                        values: BTreeSet::from([value.clone()]),
                    },
                );
            }
        }
        for w in &self.generic_nouns {
            out.insert(
                w.clone(),
                WordMeaning {
                    attribute: None,
                    values: BTreeSet::new(),
                },
            );
        }
        out
    }
}

/// A task with the wording the user will use for it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldTask {
    pub id: String,
    pub frame: TaskFrame,
    /// Index into the command templates of the task's action.
    pub template: usize,
    /// Referring expression for each filled non-action role.
    pub refs: BTreeMap<Role, String>,
    /// Seed for the user's later choices of wording.
    pub seed: u64,
}

impl GoldTask {
    pub fn action(&self) -> Action {
        self.frame.action_kind().expect("gold frames have an action")
    }
}

fn rng_for(seed: u64, salt: &str) -> ChaCha8Rng {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in salt.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    ChaCha8Rng::seed_from_u64(seed ^ h)
}

fn pick<'a>(rng: &mut ChaCha8Rng, options: &'a [String]) -> &'a str {
    options.choose(rng).map(String::as_str).unwrap_or("")
}

/// Describes an object by its true attributes: a determiner, `modifiers`
/// modifier words, and a shape or generic noun.
pub fn describe_object(
    templates: &Templates,
    object: &ObjectRecord,
    modifiers: usize,
    rng: &mut ChaCha8Rng,
) -> String {
    let mut attrs: Vec<(&String, &Vec<String>)> = templates
        .modifiers
        .iter()
        .filter_map(|(attr, values)| {
            let v = object.latent_attributes.get(attr)?;
            values.get(v).map(|words| (attr, words))
        })
        .collect();
    let mut words = Vec::new();
    for _ in 0..modifiers.min(attrs.len()) {
        let i = rng.random_range(0..attrs.len());
        let (_, options) = attrs.remove(i);
        words.push(pick(rng, options).to_string());
    }
    let shape = object.latent_attributes.get("shape").and_then(|s| templates.nouns.get(s));
    let noun = match shape {
        Some(nouns) if rng.random_bool(0.7) => pick(rng, nouns).to_string(),
        _ => pick(rng, &templates.generic_nouns).to_string(),
    };
    let det = pick(rng, &templates.determiners);
    let mut out = vec![det.to_string()];
    out.extend(words);
    out.push(noun);
    out.join(" ")
}

fn fill(template: &str, refs: &BTreeMap<Role, String>) -> String {
    let mut s = template.to_string();
    for (role, text) in refs {
        s = s.replace(&format!("{{{}}}", role.name()), text);
    }
    s
}

/// The command a user would give for `task`.
pub fn generate_command(task: &GoldTask, templates: &Templates) -> Result<String> {
    let pool = templates
        .commands
        .get(task.action().name())
        .ok_or_else(|| Error::InvalidArgument(format!("no templates for {}", task.action().name())))?;
    let t = pool
        .get(task.template % pool.len().max(1))
        .ok_or_else(|| Error::InvalidArgument("empty template pool".into()))?;
    Ok(fill(t, &task.refs))
}

/// A plainer rewording of the command, with room numbers and names.
pub fn rephrase(task: &GoldTask, templates: &Templates, world: &WorldModel, attempt: usize) -> String {
    let pool = templates.rephrasings.get(task.action().name()).cloned().unwrap_or_default();
    if pool.is_empty() {
        return generate_command(task, templates).unwrap_or_default();
    }
    let mut refs = task.refs.clone();
    for (role, value) in task.frame.filled() {
        match role {
            Role::Source | Role::Goal => {
                if let Some(label) = templates.canonical_rooms.get(value) {
                    refs.insert(role, label.clone());
                }
            }
            Role::Recipient => {
                refs.insert(role, world.display_name(value).to_lowercase());
            }
            _ => {}
        }
    }
    fill(&pool[attempt % pool.len()], &refs)
}

/// Tasks of one action over the given objects, each with a sampled wording.
pub fn sample_tasks(
    world: &WorldModel,
    templates: &Templates,
    action: Action,
    objects: &[String],
    n: usize,
    seed: u64,
    prefix: &str,
) -> Result<Vec<GoldTask>> {
    let mut rng = rng_for(seed, &format!("{prefix}-{}", action.name()));
    let rooms: Vec<String> = world.rooms().iter().map(|r| r.id.clone()).collect();
    let people: Vec<String> = world.people().iter().map(|p| p.id.clone()).collect();
    let n_templates = templates.commands.get(action.name()).map_or(0, Vec::len);
    if n_templates == 0 || rooms.len() < 2 || people.is_empty() {
        return Err(Error::InvalidArgument(format!("cannot sample {} tasks", action.name())));
    }
    if action != Action::Walk && objects.is_empty() {
        return Err(Error::InvalidArgument("no objects to sample tasks over".into()));
    }
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let id = format!("{prefix}-{}-{i}", action.name());
        let room_ref = |r: &str, rng: &mut ChaCha8Rng| pick(rng, &templates.rooms[r]).to_string();
        let mut refs = BTreeMap::new();
        let frame = match action {
            Action::Walk => {
                let g = rooms.choose(&mut rng).unwrap().clone();
                refs.insert(Role::Goal, room_ref(&g, &mut rng));
                TaskFrame::walk(&g)
            }
            Action::Deliver => {
                let o = objects.choose(&mut rng).unwrap().clone();
                let p = people.choose(&mut rng).unwrap().clone();
                let rec = world.object(&o).ok_or_else(|| Error::UnknownObject(o.clone()))?;
                let mods = rng.random_range(1..=2);
                refs.insert(Role::Patient, describe_object(templates, rec, mods, &mut rng));
                refs.insert(Role::Recipient, pick(&mut rng, &templates.people[&p]).to_string());
                TaskFrame::deliver(&o, &p)
            }
            Action::Relocate => {
                let o = objects.choose(&mut rng).unwrap().clone();
                let s = rooms.choose(&mut rng).unwrap().clone();
                let g = loop {
                    let g = rooms.choose(&mut rng).unwrap();
                    if *g != s {
                        break g.clone();
                    }
                };
                let rec = world.object(&o).ok_or_else(|| Error::UnknownObject(o.clone()))?;
                let mods = rng.random_range(1..=2);
                refs.insert(Role::Patient, describe_object(templates, rec, mods, &mut rng));
                refs.insert(Role::Source, room_ref(&s, &mut rng));
                refs.insert(Role::Goal, room_ref(&g, &mut rng));
                TaskFrame::relocate(&o, &s, &g)
            }
        };
        out.push(GoldTask {
            id,
            frame,
            template: rng.random_range(0..n_templates),
            refs,
            seed: rng.random(),
        });
    }
    Ok(out)
}

/// Tasks split into initialization / train / test portions (10 / 70 / 20).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskSplits {
    pub init: Vec<GoldTask>,
    pub train: Vec<GoldTask>,
    pub test: Vec<GoldTask>,
}

/// The train portion draws patients from `train_objects`, the test portion
/// from `test_objects`; navigation tasks are split by position.
pub fn split_tasks(
    world: &WorldModel,
    templates: &Templates,
    train_objects: &[String],
    test_objects: &[String],
    per_action: usize,
    seed: u64,
) -> Result<TaskSplits> {
    let n_init = per_action / 10;
    let n_test = per_action / 5;
    let n_train = per_action - n_init - n_test;
    let mut s = TaskSplits {
        init: Vec::new(),
        train: Vec::new(),
        test: Vec::new(),
    };
    for action in [Action::Walk, Action::Deliver, Action::Relocate] {
        s.init.extend(sample_tasks(world, templates, action, train_objects, n_init, seed, "init")?);
        s.train.extend(sample_tasks(world, templates, action, train_objects, n_train, seed, "train")?);
        s.test.extend(sample_tasks(world, templates, action, test_objects, n_test, seed, "test")?);
    }
    Ok(s)
}

/// A truthful, cooperative user working on one task.
#[derive(Debug, Clone)]
pub struct SimUser<'a> {
    pub world: &'a WorldModel,
    pub templates: &'a Templates,
    pub meanings: BTreeMap<String, WordMeaning>,
    pub task: GoldTask,
    rng: ChaCha8Rng,
    role_asks: BTreeMap<Role, usize>,
    rephrasings: usize,
    shown: BTreeSet<(String, String)>,
}

impl<'a> SimUser<'a> {
    pub fn new(world: &'a WorldModel, templates: &'a Templates, task: GoldTask) -> Self {
        SimUser {
            world,
            templates,
            meanings: templates.meanings(),
            rng: rng_for(task.seed, "answers"),
            task,
            role_asks: BTreeMap::new(),
            rephrasings: 0,
            shown: BTreeSet::new(),
        }
    }

    pub fn command(&self) -> Result<String> {
        generate_command(&self.task, self.templates)
    }

    /// Gold truth of `word` for `object`; `None` if the word means nothing
    /// perceptual to the user.
    pub fn word_applies(&self, word: &str, object: &str) -> Option<bool> {
        let m = self.meanings.get(word)?;
        Some(self.world.object(object).is_some_and(|o| m.applies_to(o)))
    }

    fn next_rephrasing(&mut self) -> String {
        let s = rephrase(&self.task, self.templates, self.world, self.rephrasings);
        self.rephrasings += 1;
        s
    }

    /// A description of the gold value of `role`.
    fn describe(&mut self, role: Role, value: &str) -> String {
        match role {
            Role::Patient => match self.world.object(value) {
                Some(o) => describe_object(self.templates, o, 2, &mut self.rng),
                None => value.to_string(),
            },
            Role::Recipient => self
                .templates
                .people
                .get(value)
                .map(|v| pick(&mut self.rng, v).to_string())
                .unwrap_or_else(|| value.to_string()),
            Role::Source | Role::Goal => {
                // answers avoid phrases that also name another room
                let Some(all) = self.templates.rooms.get(value) else {
                    return value.to_string();
                };
                let shared = |p: &String| {
                    self.templates
                        .rooms
                        .iter()
                        .any(|(r, v)| r != value && v.contains(p))
                };
                let own: Vec<String> = all.iter().filter(|p| !shared(p)).cloned().collect();
                let options = if own.is_empty() { all.clone() } else { own };
                pick(&mut self.rng, &options).to_string()
            }
            Role::Action => self.next_rephrasing(),
        }
    }

    /// The answer to `act`; `None` for acts that are not questions.
    pub fn answer(&mut self, act: &DialogAct, local_objects: &[String]) -> Option<UserInput> {
        let gold = self.task.frame.clone();
        Some(match act {
            DialogAct::AllClarification => UserInput::Text(self.next_rephrasing()),
            DialogAct::RoleClarification { role } => {
                let asks = self.role_asks.entry(*role).or_insert(0);
                *asks += 1;
                let first = *asks == 1;
                match gold.get(*role) {
                    _ if *role == Role::Action => UserInput::Text(self.next_rephrasing()),
                    None => UserInput::Text(self.next_rephrasing()),
                    Some(v) if first => {
                        let v = v.to_string();
                        UserInput::Text(self.describe(*role, &v))
                    }
                    Some(v) => UserInput::Choice(v.to_string()),
                }
            }
            DialogAct::Confirmation { frame } => {
                if frame.filled().iter().all(|(r, v)| gold.get(*r) == Some(*v)) {
                    UserInput::Yes
                } else {
                    UserInput::No
                }
            }
            DialogAct::PropertyQuery { word } => {
                if self.meanings.contains_key(word) {
                    UserInput::Yes
                } else {
                    UserInput::No
                }
            }
            DialogAct::SynonymQuery { word, candidate } => {
                let same = matches!(
                    (self.meanings.get(word), self.meanings.get(candidate)),
                    (Some(a), Some(b)) if a == b
                );
                if same {
                    UserInput::Yes
                } else {
                    UserInput::No
                }
            }
            DialogAct::ExampleRequest { word, positive, .. } => {
                let found = local_objects.iter().find(|o| {
                    !self.shown.contains(&(word.clone(), o.to_string()))
                        && self.word_applies(word, o) == Some(*positive)
                });
                match found {
                    Some(o) => {
                        self.shown.insert((word.clone(), o.clone()));
                        UserInput::Choice(o.clone())
                    }
                    None => UserInput::NoneOfThem,
                }
            }
            DialogAct::ConceptLabelQuery { word, object, .. } => match self.word_applies(word, object) {
                Some(true) => UserInput::Yes,
                _ => UserInput::No,
            },
            DialogAct::TaskComplete { .. } | DialogAct::DialogFailed => return None,
        })
    }
}

/// Outcome of one simulated conversation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeResult {
    pub task_id: String,
    pub action: Action,
    pub success: bool,
    pub questions: usize,
    pub clarifications: usize,
    pub confirmations: usize,
    pub learning_questions: usize,
    pub turns: usize,
}

/// Runs a full conversation between `agent` and a simulated user.
pub fn run_episode(
    agent: Agent,
    task: &GoldTask,
    templates: &Templates,
    config: SessionConfig,
) -> Result<(ConversationLog, EpisodeResult)> {
    let world = agent.world.clone();
    let local = config.local_objects.clone();
    let mut user = SimUser::new(&world, templates, task.clone());
    let mut session = Session::new(task.id.clone(), agent, config);
    let mut input = UserInput::Text(user.command()?);
    loop {
        let m = session.step(input)?;
        if m.finished {
            break;
        }
        input = user
            .answer(&m.act, &local)
            .ok_or_else(|| Error::Dialog(format!("no answer to {}", m.act.kind())))?;
    }
    let log = session.into_log();
    let m = &log.metrics;
    let result = EpisodeResult {
        task_id: task.id.clone(),
        action: task.action(),
        success: log.outcome.as_ref() == Some(&task.frame),
        questions: m.questions(),
        clarifications: m.clarification_questions,
        confirmations: m.confirmations,
        learning_questions: m.learning_questions,
        turns: m.user_turns,
    };
    Ok((log, result))
}

/// Checks every user answer in a log against gold. Returns the turns that
/// disagree, as (turn index, reason).
pub fn validate_log(log: &ConversationLog, task: &GoldTask, world: &WorldModel, templates: &Templates) -> Vec<(usize, String)> {
    let user = SimUser::new(world, templates, task.clone());
    let mut bad = Vec::new();
    let mut last_act: Option<&DialogAct> = None;
    for (i, t) in log.turns.iter().enumerate() {
        if let Some(a) = &t.act {
            last_act = Some(a);
            continue;
        }
        let (Some(act), Some(input)) = (last_act, &t.input) else {
            continue;
        };
        let ok = match (act, input) {
            (DialogAct::Confirmation { frame }, UserInput::Yes) => {
                frame.filled().iter().all(|(r, v)| task.frame.get(*r) == Some(*v))
            }
            (DialogAct::Confirmation { frame }, UserInput::No) => {
                !frame.filled().iter().all(|(r, v)| task.frame.get(*r) == Some(*v))
            }
            (DialogAct::RoleClarification { role }, UserInput::Choice(c)) => task.frame.get(*role) == Some(c.as_str()),
            (DialogAct::ConceptLabelQuery { word, object, .. }, UserInput::Yes) => {
                user.word_applies(word, object) == Some(true)
            }
            (DialogAct::ConceptLabelQuery { word, object, .. }, UserInput::No) => {
                user.word_applies(word, object) != Some(true)
            }
            (DialogAct::ExampleRequest { word, positive, .. }, UserInput::Choice(o)) => {
                user.word_applies(word, o) == Some(*positive)
            }
            (DialogAct::PropertyQuery { word }, UserInput::Yes) => user.meanings.contains_key(word),
            (DialogAct::PropertyQuery { word }, UserInput::No) => !user.meanings.contains_key(word),
            _ => true,
        };
        if !ok {
            bad.push((i, format!("{} answered {}", act.kind(), input.kind())));
        }
    }
    bad
}
