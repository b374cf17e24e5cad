use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::category::Category;
use super::lf::{Lf, Signature};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LexicalEntry {
    pub tokens: Vec<String>,
    pub category: Category,
    pub lf: Lf,
}

impl LexicalEntry {
    pub fn new(tokens: &[&str], category: &str, lf: &str) -> Result<Self> {
        Ok(LexicalEntry {
            tokens: tokens.iter().map(|t| t.to_string()).collect(),
            category: Category::parse(category)?,
            lf: Lf::parse(lf)?,
        })
    }

    /// Stable identifier, used as the weight-feature name.
    pub fn key(&self) -> String {
        format!("{}|{}|{}", self.tokens.join(" "), self.category, self.lf.to_sexpr())
    }

    pub fn validate(&self, sig: &Signature) -> Result<()> {
        if self.tokens.is_empty() {
            return Err(Error::Lexicon("entry with no tokens".into()));
        }
        if !self.lf.is_closed() {
            return Err(Error::Lexicon(format!("open logical form in `{}`", self.key())));
        }
        let ty = self
            .lf
            .type_of(&sig.typer())
            .map_err(|e| Error::Lexicon(format!("`{}`: {e}", self.key())))?;
        if !self.category.matches_type(&ty) {
            return Err(Error::Lexicon(format!(
                "category {} does not fit type {ty} in `{}`",
                self.category,
                self.key()
            )));
        }
        Ok(())
    }

    /// Predicates in this entry that are perceptual concepts rather than map
    /// or action constants.
    pub fn concept_predicates(&self, sig: &Signature) -> BTreeSet<String> {
        self.lf
            .constants()
            .into_iter()
            .filter(|c| !sig.contains(c))
            .collect()
    }
}

/// The parser's word list.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Lexicon {
    entries: Vec<Arc<LexicalEntry>>,
    by_tokens: BTreeMap<Vec<String>, Vec<usize>>,
    vocabulary: BTreeSet<String>,
    max_len: usize,
}

impl Serialize for Lexicon {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let plain: Vec<&LexicalEntry> = self.entries.iter().map(|e| e.as_ref()).collect();
        plain.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Lexicon {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let entries = Vec::<LexicalEntry>::deserialize(d)?;
        Ok(Lexicon::from_entries(entries))
    }
}

impl Lexicon {
    pub fn from_entries(entries: impl IntoIterator<Item = LexicalEntry>) -> Self {
        let mut lex = Lexicon::default();
        for e in entries {
            lex.add(e);
        }
        lex
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let entries: Vec<LexicalEntry> =
            serde_json::from_str(json).map_err(|e| Error::Lexicon(format!("lexicon file: {e}")))?;
        Ok(Self::from_entries(entries))
    }

    pub fn validate(&self, sig: &Signature) -> Result<()> {
        self.entries.iter().try_for_each(|e| e.validate(sig))
    }

    /// Adds an entry; returns false if an identical one already exists.
    pub fn add(&mut self, entry: LexicalEntry) -> bool {
        let slot = self.by_tokens.entry(entry.tokens.clone()).or_default();
        if slot.iter().any(|&i| *self.entries[i] == entry) {
            return false;
        }
        slot.push(self.entries.len());
        self.vocabulary.extend(entry.tokens.iter().cloned());
        self.max_len = self.max_len.max(entry.tokens.len());
        self.entries.push(Arc::new(entry));
        true
    }

    /// Drops every single-token entry for `word`.
    pub fn remove_word(&mut self, word: &str) {
        let kept: Vec<LexicalEntry> = self
            .entries
            .iter()
            .filter(|e| !(e.tokens.len() == 1 && e.tokens[0] == word))
            .map(|e| e.as_ref().clone())
            .collect();
        *self = Lexicon::from_entries(kept);
    }

    pub fn entries(&self) -> &[Arc<LexicalEntry>] {
        &self.entries
    }

    pub fn lookup(&self, tokens: &[String]) -> impl Iterator<Item = &Arc<LexicalEntry>> {
        self.by_tokens
            .get(tokens)
            .into_iter()
            .flatten()
            .map(|&i| &self.entries[i])
    }

    pub fn knows(&self, word: &str) -> bool {
        self.vocabulary.contains(word)
    }

    /// Words that have at least one single-token entry.
    pub fn single_words(&self) -> impl Iterator<Item = &str> {
        self.by_tokens
            .keys()
            .filter(|k| k.len() == 1)
            .map(|k| k[0].as_str())
    }

    pub fn max_phrase_len(&self) -> usize {
        self.max_len
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Does any single-token entry of `word` mention a concept predicate?
    pub fn is_perceptual_word(&self, word: &str, sig: &Signature) -> bool {
        self.lookup(&[word.to_string()])
            .any(|e| !e.concept_predicates(sig).is_empty())
    }

    /// Concept predicates that `word` denotes through its entries.
    pub fn concept_predicates_of(&self, word: &str, sig: &Signature) -> BTreeSet<String> {
        self.lookup(&[word.to_string()])
            .flat_map(|e| e.concept_predicates(sig))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semparse::types::SemType;

    fn sig() -> Signature {
        let mut s = Signature::default();
        s.insert("walk", SemType::func(SemType::Room, SemType::Action));
        s.insert("lounge", SemType::pred(SemType::Room));
        s
    }

    #[test]
    fn dedupes_and_indexes() {
        let mut lex = Lexicon::default();
        let e = LexicalEntry::new(&["go"], "S/PPto", "(lambda x room (walk x))").unwrap();
        assert!(lex.add(e.clone()));
        assert!(!lex.add(e));
        assert!(lex.knows("go"));
        assert_eq!(lex.lookup(&["go".to_string()]).count(), 1);
    }

    #[test]
    fn validation_catches_arity_mismatch() {
        let bad = LexicalEntry::new(&["go"], "S", "(lambda x room (walk x))").unwrap();
        assert!(bad.validate(&sig()).is_err());
        let good = LexicalEntry::new(&["lounge"], "N", "(lambda x room (lounge x))").unwrap();
        good.validate(&sig()).unwrap();
    }

    #[test]
    fn perceptual_words() {
        let lex = Lexicon::from_entries([
            LexicalEntry::new(&["red"], "N/N", "(lambda P (-> object t) (lambda x object (and (red x) (P x))))").unwrap(),
            LexicalEntry::new(&["lounge"], "N", "(lambda x room (lounge x))").unwrap(),
        ]);
        assert!(lex.is_perceptual_word("red", &sig()));
        assert!(!lex.is_perceptual_word("lounge", &sig()));
    }

    #[test]
    fn remove_word_keeps_others() {
        let mut lex = Lexicon::from_entries([
            LexicalEntry::new(&["go"], "S/PPto", "(lambda x room (walk x))").unwrap(),
            LexicalEntry::new(&["walk"], "S/PPto", "(lambda x room (walk x))").unwrap(),
        ]);
        lex.remove_word("go");
        assert!(!lex.knows("go"));
        assert!(lex.knows("walk"));
    }
}
