//! Linear parse scoring and averaged structured perceptron training.

use std::collections::BTreeMap;

use log::warn;
use serde::{Deserialize, Serialize};

use super::chart::RootTarget;
use super::lf::Lf;
use super::Parser;

pub type Features = BTreeMap<String, f64>;

pub const SKIP_FEATURE: &str = "skip";
pub const OOV_FEATURE: &str = "oov";
pub const OOV_SIM_FEATURE: &str = "oov_sim";

/// Sparse weight vector. Score of a derivation = dot(features, weights).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ParserWeights {
    pub weights: BTreeMap<String, f64>,
}

impl ParserWeights {
    /// Untrained weights: penalties for skipped tokens and embedding
    /// substitutions, softened by substitution similarity.
    pub fn prior() -> Self {
        let mut weights = BTreeMap::new();
        weights.insert(SKIP_FEATURE.to_string(), -2.0);
        weights.insert(OOV_FEATURE.to_string(), -1.0);
        weights.insert(OOV_SIM_FEATURE.to_string(), 2.0);
        ParserWeights { weights }
    }

    pub fn get(&self, feature: &str) -> f64 {
        self.weights.get(feature).copied().unwrap_or(0.0)
    }

    pub fn dot(&self, features: &Features) -> f64 {
        features.iter().map(|(f, v)| self.get(f) * v).sum()
    }

    pub fn add_scaled(&mut self, features: &Features, scale: f64) {
        for (f, v) in features {
            let w = self.weights.entry(f.clone()).or_insert(0.0);
            *w += scale * v;
        }
        self.weights.retain(|_, w| *w != 0.0);
    }
}

pub fn lexical_feature(entry_key: &str) -> String {
    format!("lex|{entry_key}")
}

pub fn oov_lexical_feature(token: &str, source_key: &str) -> String {
    format!("lex|{token}|{source_key}")
}

/// One supervised example: tokens and the logical form they should parse to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingExample {
    pub tokens: Vec<String>,
    pub target: Lf,
    pub root: RootTarget,
}

fn difference(a: &Features, b: &Features) -> Features {
    let mut out = a.clone();
    for (f, v) in b {
        *out.entry(f.clone()).or_insert(0.0) -= v;
    }
    out.retain(|_, v| *v != 0.0);
    out
}

/// Averaged structured perceptron starting from `parser`'s weights. For
/// each example whose top parse has the wrong logical form, or whose target
/// beats the best wrong form by less than the configured margin, the weights
/// move by features(best target derivation) − features(that rival). Examples
/// whose target cannot be derived are skipped with a warning.
pub fn train_on_pairs(parser: &Parser, examples: &[TrainingExample], epochs: usize) -> ParserWeights {
    let mut work = parser.clone();
    let start = parser.weights().clone();
    let mut current = start.clone();
    // Daumé's trick: averaged = w − u / c.
    let mut u = ParserWeights::default();
    let mut c = 1.0f64;
    let mut warned = vec![false; examples.len()];
    for _ in 0..epochs {
        for (i, ex) in examples.iter().enumerate() {
            work.set_weights(current.clone());
            let parses = work.parse_all(&ex.tokens, &ex.root);
            let Some(target) = parses.iter().find(|p| p.lf == ex.target) else {
                if !warned[i] {
                    warn!(
                        "training target not derivable for `{}`: {}",
                        ex.tokens.join(" "),
                        ex.target
                    );
                    warned[i] = true;
                }
                c += 1.0;
                continue;
            };
            let margin = work.config().train_margin;
            let rival = parses.iter().find(|p| p.lf != ex.target);
            let violator = if parses[0].lf != ex.target {
                Some(&parses[0])
            } else {
                rival.filter(|r| target.score - r.score < margin)
            };
            if let Some(predicted) = violator {
                let delta = difference(&work.features(target), &work.features(predicted));
                current.add_scaled(&delta, 1.0);
                u.add_scaled(&delta, c);
            }
            c += 1.0;
        }
    }
    let mut averaged = current;
    for (f, v) in &u.weights {
        let w = averaged.weights.entry(f.clone()).or_insert(0.0);
        *w -= v / c;
    }
    averaged.weights.retain(|_, w| w.abs() > 1e-12);
    averaged
}
