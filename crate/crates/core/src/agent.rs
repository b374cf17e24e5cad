//! The agent's mutable knowledge: parser (lexicon + weights) and concept
//! models over a fixed world.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::concepts::ConceptStore;
use crate::data;
use crate::error::{Error, Result};
use crate::frame::Role;
use crate::grounding::{ground_entity, ground_parse, GroundingContext, GroundingDistribution};
use crate::semparse::{
    corpus_examples, parse_corpus, train_on_pairs, world_signature, EmbeddingTable, LexicalEntry, Lexicon, Parse,
    Parser, ParserConfig, ParserWeights, RootTarget, SemType,
};
use crate::world::{FeatureStore, WorldModel};

/// Filler words dropped before parsing.
pub const SKIP_WORDS: [&str; 8] = ["please", "hey", "robot", "could", "would", "you", "now", "thanks"];

/// Perceptron epochs used whenever the parser is trained.
pub const TRAINING_EPOCHS: usize = 10;

/// A change to the agent's knowledge made during a conversation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum LearningEvent {
    NewConcept { word: String, adjective: bool },
    Synonym { word: String, known_word: String, predicate: String },
    Label { predicate: String, object: String, label: i8 },
}

#[derive(Debug, Clone)]
pub struct Agent {
    pub world: Arc<WorldModel>,
    pub parser: Parser,
    pub concepts: ConceptStore,
}

/// Semantic type of the values of a role.
pub fn role_type(role: Role) -> Option<SemType> {
    match role {
        Role::Action => None,
        Role::Patient => Some(SemType::Object),
        Role::Recipient => Some(SemType::Person),
        Role::Source | Role::Goal => Some(SemType::Room),
    }
}

impl Agent {
    /// Untrained-concept agent over `world`, with parser weights from the
    /// prior only.
    pub fn untrained(
        world: Arc<WorldModel>,
        features: Arc<FeatureStore>,
        lexicon: Lexicon,
        embeddings: Arc<EmbeddingTable>,
    ) -> Result<Self> {
        let sig = Arc::new(world_signature(&world));
        let parser = Parser::new(lexicon, ParserWeights::prior(), embeddings, sig.clone(), ParserConfig::default())?;
        let mut preds = BTreeSet::new();
        for e in parser.lexicon().entries() {
            preds.extend(e.concept_predicates(&sig));
        }
        let concepts = ConceptStore::with_predicates(features, preds.iter().map(String::as_str));
        Ok(Agent { world, parser, concepts })
    }

    /// Agent from stored knowledge.
    pub fn from_parts(
        world: Arc<WorldModel>,
        embeddings: Arc<EmbeddingTable>,
        lexicon: Lexicon,
        weights: ParserWeights,
        concepts: ConceptStore,
    ) -> Result<Self> {
        let sig = Arc::new(world_signature(&world));
        let parser = Parser::new(lexicon, weights, embeddings, sig, ParserConfig::default())?;
        Ok(Agent { world, parser, concepts })
    }

    /// The initial agent on the bundled fixture: seed lexicon, parser
    /// trained on the seed corpus, concept models without labels.
    pub fn initial(world: Arc<WorldModel>, features: Arc<FeatureStore>) -> Result<Self> {
        let mut agent = Self::untrained(
            world,
            features,
            Lexicon::from_json(data::LEXICON_JSON)?,
            Arc::new(EmbeddingTable::from_json(data::EMBEDDINGS_JSON)?),
        )?;
        let seed = corpus_examples(&parse_corpus(data::SEED_CORPUS_JSON)?);
        let w = train_on_pairs(&agent.parser, &seed, TRAINING_EPOCHS);
        agent.parser.set_weights(w);
        Ok(agent)
    }

    /// Fixture world with generated objects plus the initial agent.
    pub fn fixture(seed: u64) -> Result<Self> {
        let (world, features) = crate::world::standard_fixture(seed)?;
        Self::initial(Arc::new(world), Arc::new(features))
    }

    pub fn grounding_context<'a>(&'a self, scope: &'a [String]) -> GroundingContext<'a> {
        GroundingContext::new(&self.world, &self.concepts).with_scope(scope)
    }

    /// Beam of command parses, each grounded over `scope`. Parses whose
    /// grounding fails keep an empty distribution.
    pub fn ground_command(
        &self,
        tokens: &[String],
        ignore: &BTreeSet<String>,
        scope: &[String],
    ) -> Vec<(Parse, GroundingDistribution<f64>)> {
        let ctx = self.grounding_context(scope);
        let mut parses = self.parser.parse_filtered(tokens, &RootTarget::Command, ignore);
        parses.truncate(self.parser.config().beam_width);
        parses
            .into_iter()
            .map(|p| {
                let d = ground_parse(&p.lf, &ctx).unwrap_or(GroundingDistribution { entries: Vec::new() });
                (p, d)
            })
            .collect()
    }

    /// Beam of noun-phrase parses for an answer about `role`, each grounded
    /// to a distribution over that role's constants.
    pub fn ground_role_answer(
        &self,
        role: Role,
        tokens: &[String],
        ignore: &BTreeSet<String>,
        scope: &[String],
    ) -> Vec<(Parse, Vec<(String, f64)>)> {
        let Some(ty) = role_type(role) else {
            return Vec::new();
        };
        let ctx = self.grounding_context(scope);
        let mut parses = self.parser.parse_filtered(tokens, &RootTarget::Entity(ty.clone()), ignore);
        parses.truncate(self.parser.config().beam_width);
        parses
            .into_iter()
            .map(|p| {
                let d = ground_entity(&p.lf, &ty, &ctx).unwrap_or_default();
                (p, d)
            })
            .collect()
    }

    /// Does `word` have an entry that mentions a perceptual concept?
    pub fn is_concept_word(&self, word: &str) -> bool {
        self.parser.lexicon().is_perceptual_word(word, self.parser.signature())
    }

    /// Single words with perceptual entries.
    pub fn concept_words(&self) -> Vec<String> {
        self.parser
            .lexicon()
            .single_words()
            .filter(|w| self.is_concept_word(w))
            .map(str::to_string)
            .collect()
    }

    /// Concept predicates named by the words of an utterance.
    pub fn concepts_in(&self, tokens: &[String]) -> BTreeMap<String, String> {
        let sig = self.parser.signature();
        let mut out = BTreeMap::new();
        for t in tokens {
            for p in self.parser.lexicon().concept_predicates_of(t, sig) {
                if self.concepts.contains(&p) {
                    out.entry(p).or_insert_with(|| t.clone());
                }
            }
        }
        out
    }

    /// New concept model named after `word`, with a modifier (N/N) or noun
    /// (N) entry.
    pub fn create_concept_word(&mut self, word: &str, adjective: bool) -> Result<()> {
        if self.parser.signature().contains(word) || self.parser.lexicon().knows(word) {
            return Err(Error::Concept(format!("`{word}` is already a known word")));
        }
        self.concepts.create_concept(word)?;
        let entry = if adjective {
            LexicalEntry::new(
                &[word],
                "N/N",
                &format!("(lambda P (-> object t) (lambda x object (and ({word} x) (P x))))"),
            )?
        } else {
            LexicalEntry::new(&[word], "N", &format!("(lambda x object ({word} x))"))?
        };
        self.parser.add_entry(entry)?;
        Ok(())
    }

    /// Makes `word` behave like `known_word`: copies its entries and shares
    /// its concept model.
    pub fn add_synonym_word(&mut self, word: &str, known_word: &str) -> Result<String> {
        let sig = self.parser.signature_arc();
        let preds = self.parser.lexicon().concept_predicates_of(known_word, &sig);
        let predicate = preds
            .into_iter()
            .next()
            .ok_or_else(|| Error::Concept(format!("`{known_word}` is not a concept word")))?;
        self.concepts.add_synonym(word, &predicate)?;
        let copies: Vec<LexicalEntry> = self
            .parser
            .lexicon()
            .lookup(&[known_word.to_string()])
            .map(|e| LexicalEntry {
                tokens: vec![word.to_string()],
                ..e.as_ref().clone()
            })
            .collect();
        for e in copies {
            self.parser.add_entry(e)?;
        }
        Ok(predicate)
    }

    /// Replays one learning event.
    pub fn apply_event(&mut self, event: &LearningEvent) -> Result<()> {
        match event {
            LearningEvent::NewConcept { word, adjective } => {
                if !self.concepts.contains(word) {
                    self.create_concept_word(word, *adjective)?;
                }
            }
            LearningEvent::Synonym { word, known_word, .. } => {
                if self.concepts.predicate_of(word).is_none() {
                    self.add_synonym_word(word, known_word)?;
                }
            }
            LearningEvent::Label { predicate, object, label } => {
                self.concepts.add_label(predicate, object, *label)?;
            }
        }
        Ok(())
    }

    /// Replays only the vocabulary events (new concepts and synonyms).
    pub fn apply_vocabulary(&mut self, events: &[LearningEvent]) -> Result<()> {
        for e in events {
            if !matches!(e, LearningEvent::Label { .. }) {
                self.apply_event(e)?;
            }
        }
        Ok(())
    }
}
