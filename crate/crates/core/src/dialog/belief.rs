//! Belief over semantic roles and its update rule
//! B(r, a) ← (1 − ρ)·B(r, a) + ρ·B_x(r, a).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::{Role, TaskFrame, EMPTY};
use crate::grounding::GroundingDistribution;
use crate::num::{ratio, sum, Scalar};
use crate::semparse::ACTIONS;
use crate::world::WorldModel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar + Serialize + serde::de::DeserializeOwned")]
pub struct RoleBelief<S> {
    /// Probability of every value in the role's support, ∅ included.
    pub dist: BTreeMap<String, S>,
    pub confirmed: bool,
}

impl<S: Scalar> RoleBelief<S> {
    /// Most probable value; ties go to ∅, then to the smallest id.
    pub fn top(&self) -> (&str, S) {
        let mut best: Option<(&str, &S)> = None;
        for (v, p) in &self.dist {
            best = match best {
                None => Some((v, p)),
                Some((bv, bp)) => {
                    let tie = p.approx_eq(bp);
                    if (!tie && p > bp) || (tie && v == EMPTY && bv != EMPTY) {
                        Some((v, p))
                    } else {
                        Some((bv, bp))
                    }
                }
            };
        }
        let (v, p) = best.expect("role support is never empty");
        (v, p.clone())
    }

    pub fn max(&self) -> S {
        self.top().1
    }

    pub fn get(&self, value: &str) -> S {
        self.dist.get(value).cloned().unwrap_or_else(S::zero)
    }

    pub fn total(&self) -> S {
        sum(self.dist.values().cloned())
    }

    pub fn is_normalized(&self) -> bool {
        self.total().approx_eq(&S::one())
    }
}

/// B: one distribution per role plus confirmation flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar + Serialize + serde::de::DeserializeOwned")]
pub struct BeliefState<S> {
    pub roles: BTreeMap<Role, RoleBelief<S>>,
}

/// B_x: the evidence of one utterance, only for roles it mentions.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar + Serialize + serde::de::DeserializeOwned")]
pub struct UtteranceBelief<S> {
    pub roles: BTreeMap<Role, BTreeMap<String, S>>,
}

impl<S: Scalar> UtteranceBelief<S> {
    pub fn single(role: Role, dist: BTreeMap<String, S>) -> Self {
        UtteranceBelief {
            roles: BTreeMap::from([(role, dist)]),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.roles.is_empty()
    }
}

/// Values each role ranges over, without ∅.
pub fn role_supports(world: &WorldModel, patient_scope: &[String]) -> BTreeMap<Role, Vec<String>> {
    let rooms: Vec<String> = world.rooms().iter().map(|r| r.id.clone()).collect();
    BTreeMap::from([
        (Role::Action, ACTIONS.iter().map(|a| a.to_string()).collect()),
        (Role::Patient, patient_scope.to_vec()),
        (Role::Recipient, world.people().iter().map(|p| p.id.clone()).collect()),
        (Role::Source, rooms.clone()),
        (Role::Goal, rooms),
    ])
}

/// Uniform action prior over the three actions and ∅; every other role puts
/// half its mass on ∅ and spreads the rest evenly.
pub fn init_belief<S: Scalar>(world: &WorldModel, patient_scope: &[String]) -> BeliefState<S> {
    let mut roles = BTreeMap::new();
    for (role, support) in role_supports(world, patient_scope) {
        let mut dist = BTreeMap::new();
        if role == Role::Action {
            let n = support.len() + 1;
            for v in support {
                dist.insert(v, ratio(1, n));
            }
            dist.insert(EMPTY.to_string(), ratio(1, n));
        } else {
            let n = support.len();
            for v in support {
                dist.insert(v, ratio(1, 2 * n));
            }
            dist.insert(EMPTY.to_string(), if n == 0 { S::one() } else { ratio(1, 2) });
        }
        roles.insert(role, RoleBelief { dist, confirmed: false });
    }
    BeliefState { roles }
}

impl<S: Scalar> BeliefState<S> {
    pub fn role(&self, role: Role) -> &RoleBelief<S> {
        &self.roles[&role]
    }

    pub fn is_confirmed(&self, role: Role) -> bool {
        self.roles[&role].confirmed
    }

    pub fn top(&self, role: Role) -> (&str, S) {
        self.roles[&role].top()
    }

    /// Frame made of each role's top value (∅ → `None`).
    pub fn top_frame(&self) -> TaskFrame {
        let mut f = TaskFrame::default();
        for r in Role::ALL {
            let (v, _) = self.top(r);
            f.set(r, (v != EMPTY).then(|| v.to_string()));
        }
        f
    }

    pub fn is_normalized(&self) -> bool {
        self.roles.values().all(RoleBelief::is_normalized)
    }

    /// Marks `value` certain for `role`.
    pub fn confirm(&mut self, role: Role, value: &str) -> Result<()> {
        let rb = self.roles.get_mut(&role).expect("all roles present");
        if !rb.dist.contains_key(value) {
            return Err(Error::Belief(format!("`{value}` is not a possible {role}")));
        }
        for (v, p) in rb.dist.iter_mut() {
            *p = if v == value { S::one() } else { S::zero() };
        }
        rb.confirmed = true;
        Ok(())
    }
}

/// Applies the update rule to every role present in `bx`; other roles and
/// confirmed roles are left alone.
pub fn update_belief<S: Scalar>(b: &BeliefState<S>, bx: &UtteranceBelief<S>, rho: S) -> Result<BeliefState<S>> {
    if rho < S::zero() || rho > S::one() {
        return Err(Error::Belief(format!("ρ = {rho:?} outside [0, 1]")));
    }
    let mut out = b.clone();
    for (role, evidence) in &bx.roles {
        let rb = out
            .roles
            .get_mut(role)
            .ok_or_else(|| Error::Belief(format!("role {role} not in belief")))?;
        if !sum(evidence.values().cloned()).approx_eq(&S::one()) {
            return Err(Error::Belief(format!("evidence for {role} is not normalized")));
        }
        if let Some(v) = evidence.keys().find(|v| !rb.dist.contains_key(*v)) {
            return Err(Error::Belief(format!("`{v}` is not a possible {role}")));
        }
        if rb.confirmed {
            continue;
        }
        let keep = S::one() - rho.clone();
        for (v, p) in rb.dist.iter_mut() {
            let x = evidence.get(v).cloned().unwrap_or_else(S::zero);
            *p = keep.clone() * p.clone() + rho.clone() * x;
        }
    }
    Ok(out)
}

/// Softmax of parse scores, computed stably in f64.
pub fn softmax(scores: &[f64]) -> Vec<f64> {
    let Some(m) = scores.iter().copied().reduce(f64::max) else {
        return Vec::new();
    };
    let e: Vec<f64> = scores.iter().map(|s| (s - m).exp()).collect();
    let z: f64 = e.iter().sum();
    e.into_iter().map(|v| v / z).collect()
}

/// B_x from a beam of (parse score, grounding). Each frame's mass is the
/// parse's softmax weight times its grounding confidence; every filled role
/// value accrues that mass, then each role is normalized.
pub fn belief_from_groundings<S: Scalar>(beam: &[(f64, GroundingDistribution<S>)]) -> Result<UtteranceBelief<S>> {
    let weights = softmax(&beam.iter().map(|(s, _)| *s).collect::<Vec<_>>());
    let mut roles: BTreeMap<Role, BTreeMap<String, S>> = BTreeMap::new();
    for ((_, dist), w) in beam.iter().zip(weights) {
        let w = S::from_f64_lossy(w);
        for (frame, p) in &dist.entries {
            let mass = w.clone() * p.clone();
            for (role, value) in frame.filled() {
                let slot = roles.entry(role).or_default().entry(value.to_string()).or_insert_with(S::zero);
                *slot = slot.clone() + mass.clone();
            }
        }
    }
    roles.retain(|_, d| d.values().any(|p| !p.is_zero()));
    if roles.is_empty() {
        return Err(Error::Belief("no grounding for any parse".into()));
    }
    for d in roles.values_mut() {
        let total = sum(d.values().cloned());
        d.retain(|_, p| !p.is_zero());
        for p in d.values_mut() {
            *p = p.clone() / total.clone();
        }
    }
    Ok(UtteranceBelief { roles })
}

/// Yes: each asserted value takes the whole mass of its role and the role
/// is confirmed. No: evidence zero on the denied values and uniform over the
/// rest of each role's support, applied with `rho_deny`.
pub fn apply_confirmation_answer<S: Scalar>(
    b: &BeliefState<S>,
    asserted: &[(Role, String)],
    yes: bool,
    rho_deny: S,
) -> Result<BeliefState<S>> {
    if yes {
        let mut out = b.clone();
        for (r, v) in asserted {
            out.confirm(*r, v)?;
        }
        return Ok(out);
    }
    let mut bx = UtteranceBelief { roles: BTreeMap::new() };
    for (r, v) in asserted {
        let support: Vec<&String> = b.role(*r).dist.keys().filter(|k| *k != v).collect();
        if support.is_empty() {
            continue;
        }
        let n = support.len();
        bx.roles.insert(*r, support.into_iter().map(|k| (k.clone(), ratio(1, n))).collect());
    }
    update_belief(b, &bx, rho_deny)
}

/// Plain f64 view of a belief for logs and the API.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeliefSummary {
    pub roles: BTreeMap<Role, RoleSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoleSummary {
    pub top: String,
    pub probability: f64,
    pub confirmed: bool,
    pub distribution: BTreeMap<String, f64>,
}

impl<S: Scalar> From<&BeliefState<S>> for BeliefSummary {
    fn from(b: &BeliefState<S>) -> Self {
        BeliefSummary {
            roles: b
                .roles
                .iter()
                .map(|(r, rb)| {
                    let (top, p) = rb.top();
                    (
                        *r,
                        RoleSummary {
                            top: top.to_string(),
                            probability: p.to_f64_lossy(),
                            confirmed: rb.confirmed,
                            distribution: rb.dist.iter().map(|(k, v)| (k.clone(), v.to_f64_lossy())).collect(),
                        },
                    )
                })
                .collect(),
        }
    }
}
