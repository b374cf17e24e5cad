//! Evaluating logical forms against the world.
//!
//! Map predicates (room types, adjacency, office ownership) are certain and
//! act as hard filters. Perceptual predicates are scored by concept models.
//! A description contributes every constant of its type with weight equal to
//! the product of its predicate confidences; a description nested inside a
//! predicate argument takes the best-scoring referent.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::{Action, TaskFrame};
use crate::num::{sum, Scalar};
use crate::semparse::{Lf, SemType};
use crate::world::{WorldModel, ROOM_TYPES};

/// Source of perceptual predicate confidences.
pub trait ConceptOracle {
    /// Is there a model for `predicate`?
    fn knows(&self, predicate: &str) -> bool;

    /// Confidence in [0, 1] that `predicate` holds of `object`.
    fn confidence(&self, predicate: &str, object: &str) -> Result<f64>;
}

impl ConceptOracle for BTreeMap<(String, String), f64> {
    fn knows(&self, predicate: &str) -> bool {
        self.keys().any(|(p, _)| p == predicate)
    }

    fn confidence(&self, predicate: &str, object: &str) -> Result<f64> {
        self.get(&(predicate.to_string(), object.to_string()))
            .copied()
            .ok_or_else(|| Error::UnknownPredicate(predicate.to_string()))
    }
}

/// What grounding may refer to.
#[derive(Clone, Copy)]
pub struct GroundingContext<'a> {
    pub world: &'a WorldModel,
    pub concepts: &'a dyn ConceptOracle,
    /// Objects descriptions may denote; `None` means every object.
    pub object_scope: Option<&'a [String]>,
}

impl<'a> GroundingContext<'a> {
    pub fn new(world: &'a WorldModel, concepts: &'a dyn ConceptOracle) -> Self {
        GroundingContext {
            world,
            concepts,
            object_scope: None,
        }
    }

    pub fn with_scope(mut self, scope: &'a [String]) -> Self {
        self.object_scope = Some(scope);
        self
    }

    /// Constants of an entity type, in id order of the world file.
    pub fn constants_of(&self, ty: &SemType) -> Vec<String> {
        match ty {
            SemType::Room => self.world.rooms().iter().map(|r| r.id.clone()).collect(),
            SemType::Person => self.world.people().iter().map(|p| p.id.clone()).collect(),
            SemType::Object => match self.object_scope {
                Some(scope) => scope.to_vec(),
                None => self.world.objects().iter().map(|o| o.id.clone()).collect(),
            },
            _ => Vec::new(),
        }
    }
}

/// Normalized distribution over candidate frames.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar + Serialize + serde::de::DeserializeOwned")]
pub struct GroundingDistribution<S> {
    pub entries: Vec<(TaskFrame, S)>,
}

impl<S: Scalar> GroundingDistribution<S> {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn total(&self) -> S {
        sum(self.entries.iter().map(|(_, p)| p.clone()))
    }

    pub fn probability(&self, frame: &TaskFrame) -> S {
        self.entries
            .iter()
            .find(|(f, _)| f == frame)
            .map(|(_, p)| p.clone())
            .unwrap_or_else(S::zero)
    }

    /// Frames with the highest confidence.
    pub fn argmax(&self) -> Vec<&TaskFrame> {
        let Some(best) = self.entries.iter().map(|(_, p)| p.clone()).reduce(S::max_of) else {
            return Vec::new();
        };
        self.entries
            .iter()
            .filter(|(_, p)| p.approx_eq(&best))
            .map(|(f, _)| f)
            .collect()
    }
}

/// Confidence of a predicate over constants. Map predicates give exactly 0
/// or 1, unary predicates on objects go to the concept models.
pub fn eval_predicate(pred: &str, args: &[&str], ctx: &GroundingContext) -> Result<f64> {
    let w = ctx.world;
    let certain = |b: bool| Ok(if b { 1.0 } else { 0.0 });
    match (pred, args) {
        (p, [c]) if ROOM_TYPES.contains(&p) => certain(w.room_has_type(c, p)),
        ("adjacent", [a, b]) => certain(w.adjacent(a, b)),
        ("possesses", [p, r]) => certain(w.possesses(p, r)),
        ("item", [o]) => certain(w.object(o).is_some()),
        (p, [o]) if w.object(o).is_some() => {
            let c = ctx.concepts.confidence(p, o)?;
            Ok(c.clamp(0.0, 1.0))
        }
        (p, [_]) if ctx.concepts.knows(p) => Ok(0.0),
        _ => Err(Error::UnknownPredicate(pred.to_string())),
    }
}

type Env = Vec<(String, String)>;

fn lookup<'e>(env: &'e Env, var: &str) -> Option<&'e str> {
    env.iter().rev().find(|(v, _)| v == var).map(|(_, c)| c.as_str())
}

/// Candidate referents of a description with their unnormalized weights.
fn description_candidates<S: Scalar>(pred: &Lf, ctx: &GroundingContext, env: &mut Env) -> Result<Vec<(String, S)>> {
    let Lf::Lambda { var, ty, body } = pred else {
        return Err(Error::Grounding(format!("description over a non-lambda `{pred}`")));
    };
    let mut out = Vec::new();
    for c in ctx.constants_of(ty) {
        env.push((var.clone(), c.clone()));
        let w = truth::<S>(body, ctx, env);
        env.pop();
        let w = w?;
        if w > S::zero() {
            out.push((c, w));
        }
    }
    Ok(out)
}

/// Possible values of an entity-typed argument.
fn entity_candidates<S: Scalar>(lf: &Lf, ctx: &GroundingContext, env: &mut Env) -> Result<Vec<(String, S)>> {
    match lf {
        Lf::Const(c) => Ok(vec![(c.clone(), S::one())]),
        Lf::Var(v) => lookup(env, v)
            .map(|c| vec![(c.to_string(), S::one())])
            .ok_or_else(|| Error::Grounding(format!("unbound variable `{v}`"))),
        Lf::Desc(_, pred) => description_candidates(pred, ctx, env),
        other => Err(Error::Grounding(format!("cannot denote an entity: `{other}`"))),
    }
}

/// Confidence of a truth-valued form under `env`.
fn truth<S: Scalar>(lf: &Lf, ctx: &GroundingContext, env: &mut Env) -> Result<S> {
    match lf {
        Lf::And(parts) => {
            let mut acc = S::one();
            for p in parts {
                acc = acc * truth::<S>(p, ctx, env)?;
                if acc.is_zero() {
                    break;
                }
            }
            Ok(acc)
        }
        Lf::App(..) => {
            let (head, args) = lf.spine();
            let Lf::Const(pred) = head else {
                return Err(Error::Grounding(format!("non-constant predicate in `{lf}`")));
            };
            let mut options: Vec<Vec<(String, S)>> = Vec::new();
            for a in &args {
                options.push(entity_candidates::<S>(a, ctx, env)?);
            }
            // Best assignment of any nested descriptions.
            let mut best = S::zero();
            let mut idx = vec![0usize; options.len()];
            if options.iter().any(|o| o.is_empty()) {
                return Ok(best);
            }
            loop {
                let consts: Vec<&str> = idx.iter().zip(&options).map(|(&i, o)| o[i].0.as_str()).collect();
                let mut w = S::from_f64_lossy(eval_predicate(pred, &consts, ctx)?);
                for (&i, o) in idx.iter().zip(&options) {
                    w = w * o[i].1.clone();
                }
                best = best.max_of(w);
                let mut k = 0;
                loop {
                    if k == idx.len() {
                        return Ok(best);
                    }
                    idx[k] += 1;
                    if idx[k] < options[k].len() {
                        break;
                    }
                    idx[k] = 0;
                    k += 1;
                }
            }
        }
        other => Err(Error::Grounding(format!("not a truth-valued form: `{other}`"))),
    }
}

fn normalize<S: Scalar, T>(raw: Vec<(T, S)>) -> Vec<(T, S)> {
    let total = sum(raw.iter().map(|(_, w)| w.clone()));
    if total.is_zero() {
        return Vec::new();
    }
    raw.into_iter()
        .filter(|(_, w)| !w.is_zero())
        .map(|(t, w)| (t, w / total.clone()))
        .collect()
}

/// Grounds an action-typed logical form to a distribution over frames.
pub fn ground_parse<S: Scalar>(lf: &Lf, ctx: &GroundingContext) -> Result<GroundingDistribution<S>> {
    let (head, args) = lf.spine();
    let action = match head {
        Lf::Const(a) => Action::from_name(a),
        _ => None,
    }
    .ok_or_else(|| Error::Grounding(format!("not an action: `{lf}`")))?;
    if args.len() != action.roles().len() {
        return Err(Error::Grounding(format!("wrong number of arguments in `{lf}`")));
    }
    let mut env = Env::new();
    let mut options = Vec::new();
    for a in &args {
        let c = entity_candidates::<S>(a, ctx, &mut env)?;
        if c.is_empty() {
            return Ok(GroundingDistribution { entries: Vec::new() });
        }
        options.push(c);
    }
    let mut raw = Vec::new();
    let mut idx = vec![0usize; options.len()];
    'outer: loop {
        let mut frame = TaskFrame {
            action: Some(action.name().to_string()),
            ..Default::default()
        };
        let mut w = S::one();
        for ((&i, o), role) in idx.iter().zip(&options).zip(action.roles()) {
            frame.set(*role, Some(o[i].0.clone()));
            w = w * o[i].1.clone();
        }
        raw.push((frame, w));
        let mut k = 0;
        loop {
            if k == idx.len() {
                break 'outer;
            }
            idx[k] += 1;
            if idx[k] < options[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
    Ok(GroundingDistribution { entries: normalize(raw) })
}

/// Grounds an entity-denoting form (a role answer) to a distribution over
/// constants of `ty`.
pub fn ground_entity<S: Scalar>(lf: &Lf, ty: &SemType, ctx: &GroundingContext) -> Result<Vec<(String, S)>> {
    let mut env = Env::new();
    let raw = entity_candidates::<S>(lf, ctx, &mut env)?;
    let known = ctx.constants_of(ty);
    let raw: Vec<(String, S)> = raw.into_iter().filter(|(c, _)| known.contains(c)).collect();
    Ok(normalize(raw))
}
