//! CCG semantic parsing: lexicon, logical forms, chart parser, OOV recovery
//! through word embeddings, and perceptron training.

pub mod category;
pub mod chart;
pub mod embeddings;
pub mod lexicon;
pub mod lf;
pub mod perceptron;
pub mod sexpr;
pub mod tokenize;
pub mod types;

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use category::Category;
pub use chart::{Derivation, OovUse, Parse, RootTarget};
pub use embeddings::{oov_candidates, EmbeddingTable, OovCandidate};
pub use lexicon::{LexicalEntry, Lexicon};
pub use lf::{Lf, Quant, Signature};
pub use perceptron::{train_on_pairs, Features, ParserWeights, TrainingExample};
pub use tokenize::{is_punctuation, tokenize};
pub use types::SemType;

use crate::error::Result;
use crate::world::{WorldModel, ROOM_TYPES};

pub const ACTIONS: [&str; 3] = ["walk", "deliver", "relocate"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParserConfig {
    pub beam_width: usize,
    pub max_skips: usize,
    pub oov_threshold: f64,
    /// Items kept per chart cell.
    pub cell_cap: usize,
    /// Training also updates when the target wins by less than this.
    pub train_margin: f64,
}

impl Default for ParserConfig {
    fn default() -> Self {
        ParserConfig {
            beam_width: 10,
            max_skips: 3,
            oov_threshold: 0.40,
            cell_cap: 48,
            train_margin: 1.0,
        }
    }
}

/// Constant types for a world: its rooms, people and objects, the three
/// actions, room-type predicates and the map relations. Undeclared
/// constants are concept predicates over objects.
pub fn world_signature(world: &WorldModel) -> Signature {
    use SemType::*;
    let mut sig = Signature::default();
    for r in world.rooms() {
        sig.insert(r.id.clone(), Room);
    }
    for p in world.people() {
        sig.insert(p.id.clone(), Person);
    }
    for o in world.objects() {
        sig.insert(o.id.clone(), Object);
    }
    sig.insert("walk", SemType::func(Room, Action));
    sig.insert("deliver", SemType::func(Object, SemType::func(Person, Action)));
    sig.insert(
        "relocate",
        SemType::func(Object, SemType::func(Room, SemType::func(Room, Action))),
    );
    for t in ROOM_TYPES {
        sig.insert(t, SemType::pred(Room));
    }
    sig.insert("adjacent", SemType::func(Room, SemType::pred(Room)));
    sig.insert("possesses", SemType::func(Person, SemType::pred(Room)));
    sig.insert("item", SemType::pred(Object));
    sig
}

/// Chart parser over a lexicon with linear scoring.
#[derive(Debug, Clone)]
pub struct Parser {
    lexicon: Lexicon,
    weights: ParserWeights,
    embeddings: Arc<EmbeddingTable>,
    config: ParserConfig,
    sig: Arc<Signature>,
    entry_types: BTreeMap<String, SemType>,
}

impl Parser {
    /// Fails if any lexical entry is ill-typed under `sig`.
    pub fn new(
        lexicon: Lexicon,
        weights: ParserWeights,
        embeddings: Arc<EmbeddingTable>,
        sig: Arc<Signature>,
        config: ParserConfig,
    ) -> Result<Self> {
        lexicon.validate(&sig)?;
        let mut p = Parser {
            lexicon,
            weights,
            embeddings,
            config,
            sig,
            entry_types: BTreeMap::new(),
        };
        p.rebuild_types()?;
        Ok(p)
    }

    fn rebuild_types(&mut self) -> Result<()> {
        let typer = self.sig.typer();
        let mut types = BTreeMap::new();
        for e in self.lexicon.entries() {
            types.insert(e.key(), e.lf.type_of(&typer)?);
        }
        self.entry_types = types;
        Ok(())
    }

    pub(crate) fn entry_type(&self, key: &str) -> Option<&SemType> {
        self.entry_types.get(key)
    }

    pub fn lexicon(&self) -> &Lexicon {
        &self.lexicon
    }

    pub fn weights(&self) -> &ParserWeights {
        &self.weights
    }

    pub fn set_weights(&mut self, weights: ParserWeights) {
        self.weights = weights;
    }

    pub fn embeddings(&self) -> &EmbeddingTable {
        &self.embeddings
    }

    pub fn embeddings_arc(&self) -> Arc<EmbeddingTable> {
        self.embeddings.clone()
    }

    pub fn signature(&self) -> &Signature {
        &self.sig
    }

    pub fn signature_arc(&self) -> Arc<Signature> {
        self.sig.clone()
    }

    pub fn config(&self) -> &ParserConfig {
        &self.config
    }

    /// Adds a validated entry; returns false if it was already present.
    pub fn add_entry(&mut self, entry: LexicalEntry) -> Result<bool> {
        entry.validate(&self.sig)?;
        let ty = entry.lf.type_of(&self.sig.typer())?;
        let key = entry.key();
        let added = self.lexicon.add(entry);
        self.entry_types.insert(key, ty);
        Ok(added)
    }

    pub fn remove_word(&mut self, word: &str) -> Result<()> {
        self.lexicon.remove_word(word);
        self.rebuild_types()
    }

    /// Top-`k` command parses, best first.
    pub fn parse_beam(&self, tokens: &[String], k: usize) -> Vec<Parse> {
        let mut all = self.parse_all(tokens, &RootTarget::Command);
        all.truncate(k);
        all
    }

    pub fn features(&self, parse: &Parse) -> Features {
        parse.features()
    }

    pub fn score(&self, parse: &Parse) -> f64 {
        self.weights.dot(&parse.features())
    }
}

/// One annotated utterance of a corpus file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusItem {
    pub utterance: String,
    pub lf: Lf,
}

pub fn parse_corpus(json: &str) -> Result<Vec<CorpusItem>> {
    Ok(serde_json::from_str(json)?)
}

/// Command training examples for corpus items.
pub fn corpus_examples(items: &[CorpusItem]) -> Vec<TrainingExample> {
    items
        .iter()
        .map(|c| TrainingExample {
            tokens: tokenize(&c.utterance),
            target: c.lf.clone(),
            root: RootTarget::Command,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data;

    fn parser() -> Parser {
        let (world, _) = crate::world::standard_fixture(7).unwrap();
        Parser::new(
            Lexicon::from_json(data::LEXICON_JSON).unwrap(),
            ParserWeights::prior(),
            Arc::new(EmbeddingTable::from_json(data::EMBEDDINGS_JSON).unwrap()),
            Arc::new(world_signature(&world)),
            ParserConfig::default(),
        )
        .unwrap()
    }

    fn top(p: &Parser, s: &str) -> Option<String> {
        p.parse_beam(&tokenize(s), 10).first().map(|x| x.lf.to_string())
    }

    #[test]
    fn seed_examples() {
        let p = parser();
        assert_eq!(top(&p, "go to the lounge").unwrap(), "walk(the(λx.lounge(x)))");
        assert_eq!(
            top(&p, "Bring a red can to Bob").unwrap(),
            "deliver(a(λx.(red(x) ∧ can(x))), bob)"
        );
        assert!(top(&p, "xyzzy qwfp").is_none());
    }

    #[test]
    fn every_seed_target_is_derivable() {
        let p = parser();
        for c in parse_corpus(data::SEED_CORPUS_JSON).unwrap() {
            let all = p.parse_all(&tokenize(&c.utterance), &RootTarget::Command);
            assert!(all.iter().any(|x| x.lf == c.lf), "{} -> {}", c.utterance, c.lf);
        }
    }

    #[test]
    fn trained_on_seed_corpus() {
        let p = parser();
        let items = parse_corpus(data::SEED_CORPUS_JSON).unwrap();
        assert_eq!(items.len(), 44);
        let ex = corpus_examples(&items);
        let w = train_on_pairs(&p, &ex, 10);
        let mut q = p.clone();
        q.set_weights(w);
        let correct = ex
            .iter()
            .filter(|e| q.parse_beam(&e.tokens, 1).first().is_some_and(|x| x.lf == e.target))
            .count();
        assert!(correct as f64 / ex.len() as f64 >= 0.9, "{correct}/44");
    }
}
