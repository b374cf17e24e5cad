//! Perceptual concept models: one ridge classifier per behavior-modality
//! context, combined by leave-one-out accuracy.

pub mod ridge;

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grounding::ConceptOracle;
use crate::world::{Context, FeatureStore};
use ridge::fit_ridge;

pub const RIDGE_LAMBDA: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextClassifier {
    pub coef: Vec<f64>,
    pub bias: f64,
}

impl ContextClassifier {
    /// Raw prediction clamped to [−1, 1].
    pub fn margin(&self, x: &[f64]) -> f64 {
        let raw: f64 = self.bias + self.coef.iter().zip(x).map(|(w, v)| w * v).sum::<f64>();
        raw.clamp(-1.0, 1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConceptModel {
    #[serde(skip)]
    pub predicate: String,
    /// Surface words bound to this model.
    pub words: BTreeSet<String>,
    /// Object id → +1 / −1.
    pub labels: BTreeMap<String, i8>,
    #[serde(default)]
    pub classifiers: BTreeMap<Context, ContextClassifier>,
    #[serde(default)]
    pub weights: BTreeMap<Context, f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub decision: i8,
    pub confidence: f64,
    pub score: f64,
}

impl ConceptModel {
    pub fn new(predicate: &str) -> Self {
        ConceptModel {
            predicate: predicate.to_string(),
            words: BTreeSet::from([predicate.to_string()]),
            labels: BTreeMap::new(),
            classifiers: BTreeMap::new(),
            weights: BTreeMap::new(),
        }
    }

    pub fn counts(&self) -> (usize, usize) {
        let pos = self.labels.values().filter(|&&l| l > 0).count();
        (pos, self.labels.len() - pos)
    }

    /// Needs at least one positive and one negative label.
    pub fn is_trained(&self) -> bool {
        !self.classifiers.is_empty()
    }

    pub fn weight_total(&self) -> f64 {
        self.weights.values().sum()
    }
}

fn fit_context(xs: &[Vec<f64>], ys: &[f64]) -> Result<ContextClassifier> {
    let fit = fit_ridge(xs, ys, RIDGE_LAMBDA)?;
    Ok(ContextClassifier {
        coef: fit.coef,
        bias: fit.bias,
    })
}

fn sign(v: f64) -> f64 {
    if v >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// Refits every context classifier on the model's labels and recomputes the
/// context weights max(0, 2·acc − 1) from class-balanced leave-one-out
/// sign accuracy.
pub fn train_concept(model: &ConceptModel, features: &FeatureStore) -> Result<ConceptModel> {
    let mut out = model.clone();
    out.classifiers.clear();
    out.weights.clear();
    for obj in model.labels.keys() {
        if !features.contains(obj) {
            return Err(Error::Concept(format!(
                "labeled object `{obj}` has no features (concept `{}`)",
                model.predicate
            )));
        }
    }
    let (pos, neg) = model.counts();
    if pos == 0 || neg == 0 {
        return Ok(out);
    }
    let objects: Vec<&String> = model.labels.keys().collect();
    let ys: Vec<f64> = model.labels.values().map(|&l| f64::from(l)).collect();
    for ctx in Context::all() {
        let xs: Vec<Vec<f64>> = objects
            .iter()
            .map(|o| features.get(o, ctx).expect("checked above").to_vec())
            .collect();
        let clf = fit_context(&xs, &ys)?;
        // Leave-one-out accuracy, averaged over the two classes so that a
        // context predicting the majority label everywhere scores 0.5.
        let (mut hit_pos, mut hit_neg) = (0usize, 0usize);
        for i in 0..xs.len() {
            let (mut rest_x, mut rest_y) = (xs.clone(), ys.clone());
            rest_x.remove(i);
            rest_y.remove(i);
            let held = fit_context(&rest_x, &rest_y)?;
            if sign(held.margin(&xs[i])) == ys[i] {
                if ys[i] > 0.0 {
                    hit_pos += 1;
                } else {
                    hit_neg += 1;
                }
            }
        }
        let acc = 0.5 * (hit_pos as f64 / pos as f64 + hit_neg as f64 / neg as f64);
        out.weights.insert(ctx, (2.0 * acc - 1.0).max(0.0));
        out.classifiers.insert(ctx, clf);
    }
    Ok(out)
}

/// Decision, confidence (S+1)/2 and ensemble score S for one object.
pub fn predict(model: &ConceptModel, features: &FeatureStore, object: &str) -> Result<Prediction> {
    if !features.contains(object) {
        return Err(Error::UnknownObject(object.to_string()));
    }
    let total = model.weight_total();
    let score = if !model.is_trained() || total <= 0.0 {
        0.0
    } else {
        let mut acc = 0.0;
        for (ctx, clf) in &model.classifiers {
            let w = model.weights.get(ctx).copied().unwrap_or(0.0);
            if w > 0.0 {
                acc += w * clf.margin(features.get(object, *ctx).expect("object has all contexts"));
            }
        }
        (acc / total).clamp(-1.0, 1.0)
    };
    Ok(Prediction {
        decision: if score >= 0.0 { 1 } else { -1 },
        confidence: (score + 1.0) / 2.0,
        score,
    })
}

/// The unlabeled candidate the model is least sure about (smallest |S|),
/// ties to the smallest id; `None` when every candidate is labeled.
pub fn select_query_object(model: &ConceptModel, features: &FeatureStore, candidates: &[String]) -> Result<Option<String>> {
    if candidates.is_empty() {
        return Err(Error::InvalidArgument("no candidate objects to query".into()));
    }
    let mut best: Option<(f64, &String)> = None;
    for c in candidates {
        if model.labels.contains_key(c) {
            continue;
        }
        let s = predict(model, features, c)?.score.abs();
        best = match best {
            Some((bs, bc)) if bs < s || (bs == s && bc <= c) => Some((bs, bc)),
            _ => Some((s, c)),
        };
    }
    Ok(best.map(|(_, c)| c.clone()))
}

/// All concept models plus the word → predicate binding.
#[derive(Debug, Clone)]
pub struct ConceptStore {
    models: BTreeMap<String, ConceptModel>,
    features: Arc<FeatureStore>,
}

impl ConceptStore {
    pub fn new(features: Arc<FeatureStore>) -> Self {
        ConceptStore {
            models: BTreeMap::new(),
            features,
        }
    }

    /// Untrained models for each predicate.
    pub fn with_predicates<'a>(features: Arc<FeatureStore>, predicates: impl IntoIterator<Item = &'a str>) -> Self {
        let mut s = Self::new(features);
        for p in predicates {
            s.models.insert(p.to_string(), ConceptModel::new(p));
        }
        s
    }

    /// Models with their labels and fitted classifiers.
    pub fn from_models(models: BTreeMap<String, ConceptModel>, features: Arc<FeatureStore>) -> Self {
        let mut s = ConceptStore { models, features };
        for (p, m) in s.models.iter_mut() {
            m.predicate = p.clone();
        }
        s
    }

    pub fn model_map(&self) -> &BTreeMap<String, ConceptModel> {
        &self.models
    }

    pub fn features(&self) -> &FeatureStore {
        &self.features
    }

    pub fn features_arc(&self) -> Arc<FeatureStore> {
        self.features.clone()
    }

    pub fn models(&self) -> impl Iterator<Item = &ConceptModel> {
        self.models.values()
    }

    pub fn model(&self, predicate: &str) -> Option<&ConceptModel> {
        self.models.get(predicate)
    }

    pub fn contains(&self, predicate: &str) -> bool {
        self.models.contains_key(predicate)
    }

    /// Predicate a surface word is bound to.
    pub fn predicate_of(&self, word: &str) -> Option<&str> {
        self.models
            .values()
            .find(|m| m.words.contains(word))
            .map(|m| m.predicate.as_str())
    }

    /// New untrained model whose predicate is `word`.
    pub fn create_concept(&mut self, word: &str) -> Result<&ConceptModel> {
        if self.predicate_of(word).is_some() || self.models.contains_key(word) {
            return Err(Error::Concept(format!("`{word}` is already bound to a concept")));
        }
        self.models.insert(word.to_string(), ConceptModel::new(word));
        Ok(&self.models[word])
    }

    /// Binds `word` to the existing model of `predicate`.
    pub fn add_synonym(&mut self, word: &str, predicate: &str) -> Result<&ConceptModel> {
        if self.predicate_of(word).is_some() {
            return Err(Error::Concept(format!("`{word}` is already bound to a concept")));
        }
        let m = self
            .models
            .get_mut(predicate)
            .ok_or_else(|| Error::UnknownPredicate(predicate.to_string()))?;
        m.words.insert(word.to_string());
        Ok(m)
    }

    /// Records a label and refits the model.
    pub fn add_label(&mut self, predicate: &str, object: &str, label: i8) -> Result<()> {
        let m = self
            .models
            .get(predicate)
            .ok_or_else(|| Error::UnknownPredicate(predicate.to_string()))?;
        let mut m = m.clone();
        m.labels.insert(object.to_string(), if label > 0 { 1 } else { -1 });
        let trained = train_concept(&m, &self.features)?;
        self.models.insert(predicate.to_string(), trained);
        Ok(())
    }

    /// Replaces all labels of a model and refits it.
    pub fn set_labels(&mut self, predicate: &str, labels: BTreeMap<String, i8>) -> Result<()> {
        let m = self
            .models
            .get_mut(predicate)
            .ok_or_else(|| Error::UnknownPredicate(predicate.to_string()))?;
        m.labels = labels;
        let trained = train_concept(m, &self.features)?;
        *m = trained;
        Ok(())
    }

    pub fn retrain_all(&mut self) -> Result<()> {
        for m in self.models.values_mut() {
            *m = train_concept(m, &self.features)?;
        }
        Ok(())
    }

    pub fn predict(&self, predicate: &str, object: &str) -> Result<Prediction> {
        let m = self
            .models
            .get(predicate)
            .ok_or_else(|| Error::UnknownPredicate(predicate.to_string()))?;
        predict(m, &self.features, object)
    }

    pub fn select_query_object(&self, predicate: &str, candidates: &[String]) -> Result<Option<String>> {
        let m = self
            .models
            .get(predicate)
            .ok_or_else(|| Error::UnknownPredicate(predicate.to_string()))?;
        select_query_object(m, &self.features, candidates)
    }

    /// `concepts.json` layout: predicate → model.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.models).expect("concept models serialize")
    }

    pub fn from_json(json: &str, features: Arc<FeatureStore>) -> Result<Self> {
        let mut models: BTreeMap<String, ConceptModel> = serde_json::from_str(json)?;
        for (p, m) in models.iter_mut() {
            m.predicate = p.clone();
        }
        Ok(ConceptStore { models, features })
    }
}

impl ConceptOracle for ConceptStore {
    fn knows(&self, predicate: &str) -> bool {
        self.models.contains_key(predicate)
    }

    fn confidence(&self, predicate: &str, object: &str) -> Result<f64> {
        Ok(self.predict(predicate, object)?.confidence)
    }
}

impl PartialEq for ConceptStore {
    fn eq(&self, other: &Self) -> bool {
        self.models == other.models
    }
}
