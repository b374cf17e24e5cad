//! Learning from finished conversations: training pairs for the parser,
//! batch label aggregation, and versioned agent snapshots.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::sync::Arc;

use log::warn;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::agent::{role_type, Agent, LearningEvent, TRAINING_EPOCHS};
use crate::concepts::{ConceptModel, ConceptStore};
use crate::data;
use crate::dialog::{ConversationLog, Reading, SessionConfig};
use crate::error::{Error, Result};
use crate::frame::{Action, Role, TaskFrame};
use crate::grounding::{ground_entity, ground_parse};
use crate::semparse::{
    corpus_examples, parse_corpus, train_on_pairs, EmbeddingTable, Lexicon, Lf, ParserWeights, RootTarget,
    TrainingExample,
};
use crate::simuser::{run_episode, sample_tasks, EpisodeResult, GoldTask, Templates};
use crate::world::WorldModel;

/// Confidence ties within this are all treated as the maximum.
const TIE: f64 = 1e-9;

/// What an utterance was confirmed to mean.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Denotation {
    Frame { frame: TaskFrame },
    Role { role: Role, value: String },
}

impl Denotation {
    fn root(&self) -> Option<RootTarget> {
        match self {
            Denotation::Frame { .. } => Some(RootTarget::Command),
            Denotation::Role { role, .. } => role_type(*role).map(RootTarget::Entity),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainingPair {
    pub tokens: Vec<String>,
    pub target: Denotation,
    /// Patient candidates of the conversation the pair came from.
    pub scope: Vec<String>,
    /// A parse that grounds to `target`, once one has been found.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parse: Option<Lf>,
}

impl TrainingPair {
    pub fn example(&self) -> Option<TrainingExample> {
        Some(TrainingExample {
            tokens: self.tokens.clone(),
            target: self.parse.clone()?,
            root: self.target.root()?,
        })
    }
}

/// Commands paired with the confirmed frame and free-text role answers
/// paired with the confirmed value of their role. Failed conversations give
/// nothing.
pub fn harvest_pairs(log: &ConversationLog) -> Vec<TrainingPair> {
    let Some(frame) = &log.outcome else {
        return Vec::new();
    };
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for t in &log.turns {
        let pair = match &t.reading {
            Some(Reading::Command { tokens }) => TrainingPair {
                tokens: tokens.clone(),
                target: Denotation::Frame { frame: frame.clone() },
                scope: log.patient_scope.clone(),
                parse: None,
            },
            Some(Reading::RoleAnswer { role, tokens }) => match frame.get(*role) {
                Some(v) => TrainingPair {
                    tokens: tokens.clone(),
                    target: Denotation::Role {
                        role: *role,
                        value: v.to_string(),
                    },
                    scope: log.patient_scope.clone(),
                    parse: None,
                },
                None => continue,
            },
            None => continue,
        };
        if !pair.tokens.is_empty() && seen.insert((pair.tokens.clone(), pair.target.clone())) {
            out.push(pair);
        }
    }
    out
}

/// How well a parse's grounding matches a target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Match {
    None,
    /// The target ties with other readings for the highest confidence.
    Tied,
    /// The target alone has the highest confidence.
    Unique,
}

/// Where `target` stands among the most confident readings of `lf`.
pub fn match_target(agent: &Agent, lf: &Lf, target: &Denotation, scope: &[String]) -> Match {
    let ctx = agent.grounding_context(scope);
    let scored: Vec<(bool, f64)> = match target {
        Denotation::Frame { frame } => match ground_parse::<f64>(lf, &ctx) {
            Ok(d) => d.entries.iter().map(|(f, p)| (f == frame, *p)).collect(),
            Err(_) => return Match::None,
        },
        Denotation::Role { role, value } => {
            let Some(ty) = role_type(*role) else {
                return Match::None;
            };
            match ground_entity::<f64>(lf, &ty, &ctx) {
                Ok(d) => d.iter().map(|(c, p)| (c == value, *p)).collect(),
                Err(_) => return Match::None,
            }
        }
    };
    let Some(max) = scored.iter().map(|(_, p)| *p).reduce(f64::max) else {
        return Match::None;
    };
    let best: Vec<bool> = scored.iter().filter(|(_, p)| *p >= max - TIE).map(|(hit, _)| *hit).collect();
    match (best.contains(&true), best.len()) {
        (false, _) => Match::None,
        (true, 1) => Match::Unique,
        (true, _) => Match::Tied,
    }
}

/// Does `lf` ground so that `target` is among its most confident readings?
pub fn grounds_to(agent: &Agent, lf: &Lf, target: &Denotation, scope: &[String]) -> bool {
    match_target(agent, lf, target, scope) != Match::None
}

/// Parses among the top `k` whose best grounding matches the pair's target,
/// each as a resolved pair. Parses that single the target out are preferred;
/// parses that only tie it are used when there are none. Of those, the ones
/// skipping the fewest words are kept.
pub fn induce_latent_parses(agent: &Agent, pair: &TrainingPair, k: usize) -> Vec<TrainingPair> {
    let Some(root) = pair.target.root() else {
        return Vec::new();
    };
    let mut parses = agent.parser.parse_all(&pair.tokens, &root);
    parses.truncate(k);
    let graded: Vec<(Match, usize, Lf)> = parses
        .into_iter()
        .map(|p| (match_target(agent, &p.lf, &pair.target, &pair.scope), p.skipped.len(), p.lf))
        .collect();
    let Some(best) = graded.iter().map(|(m, _, _)| *m).max().filter(|m| *m != Match::None) else {
        return Vec::new();
    };
    // among equally good matches, only the ones that use the most words
    let fewest = graded
        .iter()
        .filter(|(m, _, _)| *m == best)
        .map(|(_, s, _)| *s)
        .min()
        .unwrap_or(0);
    graded
        .into_iter()
        .filter(|(m, s, _)| *m == best && *s == fewest)
        .map(|(_, _, lf)| TrainingPair {
            parse: Some(lf),
            ..pair.clone()
        })
        .collect()
}

/// Majority label per (predicate, object) over every label given in the
/// logs; ties are dropped.
pub fn aggregate_labels<'a>(logs: impl IntoIterator<Item = &'a ConversationLog>) -> BTreeMap<(String, String), i8> {
    let mut votes: BTreeMap<(String, String), i32> = BTreeMap::new();
    for log in logs {
        for e in &log.events {
            if let LearningEvent::Label {
                predicate,
                object,
                label,
            } = e
            {
                *votes.entry((predicate.clone(), object.clone())).or_insert(0) += i32::from(label.signum());
            }
        }
    }
    votes
        .into_iter()
        .filter(|(_, v)| *v != 0)
        .map(|(k, v)| (k, if v > 0 { 1 } else { -1 }))
        .collect()
}

/// Everything the agent has learned, at one version.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentSnapshot {
    pub version: usize,
    pub lexicon: Lexicon,
    pub weights: ParserWeights,
    pub concepts: BTreeMap<String, ConceptModel>,
    /// Resolved pairs gathered so far; the parser is trained on these plus
    /// the seed corpus.
    pub pairs: Vec<TrainingPair>,
    /// Ids of the conversations consumed.
    pub provenance: Vec<String>,
}

impl AgentSnapshot {
    pub fn of_agent(agent: &Agent, version: usize) -> Self {
        AgentSnapshot {
            version,
            lexicon: agent.parser.lexicon().clone(),
            weights: agent.parser.weights().clone(),
            concepts: agent.concepts.model_map().clone(),
            pairs: Vec::new(),
            provenance: Vec::new(),
        }
    }

    /// Rebuilds the agent over `base`'s world, features and embeddings.
    pub fn to_agent(&self, base: &Agent) -> Result<Agent> {
        Agent::from_parts(
            base.world.clone(),
            base.parser.embeddings_arc(),
            self.lexicon.clone(),
            self.weights.clone(),
            ConceptStore::from_models(self.concepts.clone(), base.concepts.features_arc()),
        )
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("snapshots serialize")
    }

    pub fn from_json(json: &str) -> Result<Self> {
        Ok(serde_json::from_str(json)?)
    }

    /// sha256 of the JSON form.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_json().as_bytes()))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let json = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&json)
    }
}

pub fn seed_examples() -> Result<Vec<TrainingExample>> {
    Ok(corpus_examples(&parse_corpus(data::SEED_CORPUS_JSON)?))
}

/// A_{i+1} from A_i and the conversations of phase i: vocabulary events are
/// replayed, labels aggregated by vote and concepts refit, latent parses
/// induced for the phase's pairs, and the parser retrained from its prior on
/// the seed corpus plus every resolved pair so far.
pub fn retrain_phase(prev: &AgentSnapshot, base: &Agent, logs: &[ConversationLog]) -> Result<AgentSnapshot> {
    let mut logs: Vec<&ConversationLog> = logs.iter().collect();
    logs.sort_by(|a, b| a.session_id.cmp(&b.session_id));
    let mut agent = prev.to_agent(base)?;
    for log in &logs {
        if let Err(e) = agent.apply_vocabulary(&log.events) {
            warn!("skipping vocabulary from {}: {e}", log.session_id);
        }
    }
    let mut by_predicate: BTreeMap<String, BTreeMap<String, i8>> = BTreeMap::new();
    for ((p, o), l) in aggregate_labels(logs.iter().copied()) {
        by_predicate.entry(p).or_default().insert(o, l);
    }
    for (p, labels) in by_predicate {
        let Some(model) = agent.concepts.model(&p) else {
            warn!("labels for unknown concept `{p}` dropped");
            continue;
        };
        let mut merged = model.labels.clone();
        merged.extend(labels);
        agent.concepts.set_labels(&p, merged)?;
    }

    let k = agent.parser.config().beam_width;
    let mut pairs = prev.pairs.clone();
    for log in &logs {
        for pair in harvest_pairs(log) {
            pairs.extend(induce_latent_parses(&agent, &pair, k));
        }
    }

    let mut examples = seed_examples()?;
    examples.extend(pairs.iter().filter_map(TrainingPair::example));
    agent.parser.set_weights(ParserWeights::prior());
    let weights = train_on_pairs(&agent.parser, &examples, TRAINING_EPOCHS);
    agent.parser.set_weights(weights);

    let mut snap = AgentSnapshot::of_agent(&agent, prev.version + 1);
    snap.pairs = pairs;
    snap.provenance = prev.provenance.clone();
    snap.provenance.extend(logs.iter().map(|l| l.session_id.clone()));
    Ok(snap)
}

/// One training phase: its local objects and tasks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhasePlan {
    pub phase: usize,
    pub objects: Vec<String>,
    pub tasks: Vec<GoldTask>,
}

/// Splits the train objects into `phases` equal groups and samples
/// `tasks_per_action` tasks of each action per phase over that group.
pub fn plan_phases(
    world: &WorldModel,
    templates: &Templates,
    train_objects: &[String],
    phases: usize,
    tasks_per_action: usize,
    seed: u64,
) -> Result<Vec<PhasePlan>> {
    if phases == 0 || train_objects.len() < phases {
        return Err(Error::InvalidArgument(format!(
            "cannot split {} objects into {phases} phases",
            train_objects.len()
        )));
    }
    let mut objects = train_objects.to_vec();
    objects.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let per = objects.len() / phases;
    (0..phases)
        .map(|i| {
            let mut group = objects[i * per..(i + 1) * per].to_vec();
            group.sort_by_key(|o| o.trim_start_matches('o').parse::<usize>().unwrap_or(usize::MAX));
            let mut tasks = Vec::new();
            for action in [Action::Walk, Action::Deliver, Action::Relocate] {
                let prefix = format!("phase{}", i + 1);
                tasks.extend(sample_tasks(world, templates, action, &group, tasks_per_action, seed, &prefix)?);
            }
            Ok(PhasePlan {
                phase: i + 1,
                objects: group,
                tasks,
            })
        })
        .collect()
}

/// Runs every task of a phase against fresh copies of `agent`, with the
/// phase's objects as both patient candidates and objects at hand.
pub fn run_phase(agent: &Agent, plan: &PhasePlan, templates: &Templates) -> Result<Vec<(ConversationLog, EpisodeResult)>> {
    plan.tasks
        .iter()
        .map(|t| {
            let cfg = SessionConfig::new(plan.objects.clone(), plan.objects.clone());
            run_episode(agent.clone(), t, templates, cfg)
        })
        .collect()
}

/// Output of the full training protocol.
#[derive(Debug, Clone)]
pub struct TrainingRun {
    /// A_1 (initial) through A_{phases+1}.
    pub snapshots: Vec<AgentSnapshot>,
    pub logs: Vec<Vec<ConversationLog>>,
}

/// Initial snapshot, then one retraining per phase.
pub fn train_phases(base: &Agent, plans: &[PhasePlan], templates: &Templates) -> Result<TrainingRun> {
    let mut snapshots = vec![AgentSnapshot::of_agent(base, 1)];
    let mut all_logs = Vec::new();
    for plan in plans {
        let current = snapshots.last().expect("non-empty").to_agent(base)?;
        let logs: Vec<ConversationLog> = run_phase(&current, plan, templates)?.into_iter().map(|(l, _)| l).collect();
        let next = retrain_phase(snapshots.last().expect("non-empty"), base, &logs)?;
        snapshots.push(next);
        all_logs.push(logs);
    }
    Ok(TrainingRun {
        snapshots,
        logs: all_logs,
    })
}

/// The initial parser with a later snapshot's vocabulary and concepts:
/// learned perception without learned parsing.
pub fn perception_only(initial: &AgentSnapshot, trained: &AgentSnapshot) -> AgentSnapshot {
    AgentSnapshot {
        weights: initial.weights.clone(),
        ..trained.clone()
    }
}

/// Mean, standard deviation and success rate of one agent on one action.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub agent: String,
    pub action: Action,
    pub episodes: usize,
    pub mean_questions: f64,
    pub std_questions: f64,
    pub mean_clarifications: f64,
    pub mean_confirmations: f64,
    pub mean_learning_questions: f64,
    pub success_rate: f64,
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n;
    (m, v.sqrt())
}

/// Runs each named agent on every task with the given objects as patient
/// candidates and objects at hand.
pub fn evaluate_agents(
    agents: &[(String, Agent)],
    tasks: &[GoldTask],
    objects: &[String],
    templates: &Templates,
) -> Result<(Vec<MetricsRow>, Vec<(String, EpisodeResult)>)> {
    let mut rows = Vec::new();
    let mut episodes = Vec::new();
    for (name, agent) in agents {
        let mut results = Vec::new();
        for t in tasks {
            let cfg = SessionConfig::new(objects.to_vec(), objects.to_vec());
            let (_, r) = run_episode(agent.clone(), t, templates, cfg)?;
            results.push(r);
        }
        for action in [Action::Walk, Action::Deliver, Action::Relocate] {
            let rs: Vec<&EpisodeResult> = results.iter().filter(|r| r.action == action).collect();
            if rs.is_empty() {
                continue;
            }
            let col = |f: fn(&EpisodeResult) -> usize| rs.iter().map(|r| f(r) as f64).collect::<Vec<_>>();
            let (mq, sq) = mean_std(&col(|r| r.questions));
            rows.push(MetricsRow {
                agent: name.clone(),
                action,
                episodes: rs.len(),
                mean_questions: mq,
                std_questions: sq,
                mean_clarifications: mean_std(&col(|r| r.clarifications)).0,
                mean_confirmations: mean_std(&col(|r| r.confirmations)).0,
                mean_learning_questions: mean_std(&col(|r| r.learning_questions)).0,
                success_rate: rs.iter().filter(|r| r.success).count() as f64 / rs.len() as f64,
            });
        }
        episodes.extend(results.into_iter().map(|r| (name.clone(), r)));
    }
    Ok((rows, episodes))
}

/// CSV rendering of a metrics table.
pub fn metrics_csv(rows: &[MetricsRow]) -> String {
    let mut s = String::from(
        "agent,action,episodes,mean_questions,std_questions,mean_clarifications,mean_confirmations,mean_learning_questions,success_rate\n",
    );
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{:.4},{:.4},{:.4},{:.4},{:.4},{:.4}\n",
            r.agent,
            r.action.name(),
            r.episodes,
            r.mean_questions,
            r.std_questions,
            r.mean_clarifications,
            r.mean_confirmations,
            r.mean_learning_questions,
            r.success_rate
        ));
    }
    s
}

/// Embeddings shared by every agent built from the bundled data.
pub fn bundled_embeddings() -> Result<Arc<EmbeddingTable>> {
    Ok(Arc::new(EmbeddingTable::from_json(data::EMBEDDINGS_JSON)?))
}
