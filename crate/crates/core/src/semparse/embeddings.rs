use std::collections::BTreeMap;
use std::path::Path;

use super::lexicon::{LexicalEntry, Lexicon};
use crate::error::{Error, Result};

/// Word vectors, stored unit-normalized.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    vectors: BTreeMap<String, Vec<f64>>,
}

impl EmbeddingTable {
    pub fn new(raw: BTreeMap<String, Vec<f64>>) -> Result<Self> {
        let mut dim = None;
        let mut vectors = BTreeMap::new();
        for (word, v) in raw {
            match dim {
                None => dim = Some(v.len()),
                Some(d) if d != v.len() => {
                    return Err(Error::InvalidArgument(format!(
                        "embedding for `{word}` has dimension {}, expected {d}",
                        v.len()
                    )))
                }
                _ => {}
            }
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm == 0.0 || !norm.is_finite() {
                return Err(Error::InvalidArgument(format!("degenerate embedding for `{word}`")));
            }
            vectors.insert(word, v.into_iter().map(|x| x / norm).collect());
        }
        Ok(EmbeddingTable {
            dim: dim.unwrap_or(0),
            vectors,
        })
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let raw: BTreeMap<String, Vec<f64>> = serde_json::from_str(json)?;
        Self::new(raw)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, word: &str) -> Option<&[f64]> {
        self.vectors.get(word).map(|v| v.as_slice())
    }

    pub fn contains(&self, word: &str) -> bool {
        self.vectors.contains_key(word)
    }

    pub fn cosine(&self, a: &str, b: &str) -> Option<f64> {
        let (x, y) = (self.get(a)?, self.get(b)?);
        Some(x.iter().zip(y).map(|(p, q)| p * q).sum())
    }

    /// `candidates` ranked by cosine to `word`, most similar first; words
    /// without vectors are dropped.
    pub fn rank<'a>(&self, word: &str, candidates: impl IntoIterator<Item = &'a str>) -> Vec<(String, f64)> {
        let mut out: Vec<(String, f64)> = candidates
            .into_iter()
            .filter(|c| *c != word)
            .filter_map(|c| self.cosine(word, c).map(|s| (c.to_string(), s)))
            .collect();
        out.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        out
    }
}

/// A lexical entry borrowed from a known word for an unseen one.
#[derive(Debug, Clone, PartialEq)]
pub struct OovCandidate {
    pub known_word: String,
    /// The known word's entry rebranded with the unseen surface token.
    pub entry: LexicalEntry,
    /// Key of the original entry.
    pub source_key: String,
    pub similarity: f64,
}

/// Entries of every known word whose embedding is within `threshold` cosine
/// of `token`, most similar first. Empty when `token` is already in the
/// lexicon or has no vector.
pub fn oov_candidates(
    token: &str,
    lexicon: &Lexicon,
    embeddings: &EmbeddingTable,
    threshold: f64,
) -> Vec<OovCandidate> {
    if lexicon.knows(token) || !embeddings.contains(token) {
        return Vec::new();
    }
    let mut out = Vec::new();
    for (word, sim) in embeddings.rank(token, lexicon.single_words()) {
        if sim < threshold {
            break;
        }
        for entry in lexicon.lookup(&[word.clone()]) {
            let mut rebranded = entry.as_ref().clone();
            rebranded.tokens = vec![token.to_string()];
            out.push(OovCandidate {
                known_word: word.clone(),
                entry: rebranded,
                source_key: entry.key(),
                similarity: sim,
            });
        }
    }
    out
}
