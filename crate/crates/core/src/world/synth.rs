//! Deterministic synthetic object generator.
//!
//! Each latent attribute value owns a prototype vector in the contexts it
//! influences; an object's features are the sum of its attribute prototypes
//! plus Gaussian noise. Some contexts carry no signal at all.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::features::{Behavior, Context, FeatureStore, Modality, ObjectContextFeatures, FEATURE_DIM};
use super::{ObjectRecord, Split, WorldModel};
use crate::error::{Error, Result};

/// Attribute names with the value pattern used to fill each split. Values
/// repeat in pattern order, so `contents` is half rattly.
pub const ATTRIBUTE_VALUES: [(&str, &[&str]); 5] = [
    ("color", &["red", "blue", "green", "yellow"]),
    ("contents", &["rattly", "rattly", "empty", "liquid"]),
    ("weight", &["heavy", "light"]),
    ("material", &["metal", "plastic", "glass", "paper"]),
    ("shape", &["can", "bottle", "jar", "box"]),
];

/// Per-dimension noise standard deviation.
pub const NOISE_STD: f64 = 0.35;

fn influences(ctx: Context) -> &'static [(&'static str, f64)] {
    use Behavior::*;
    use Modality::*;
    match (ctx.behavior, ctx.modality) {
        (Look, Vision) => &[("color", 1.0), ("shape", 1.0)],
        (Grasp, Haptic) => &[("shape", 1.0)],
        (Grasp, Audio) => &[],
        (Lift, Haptic) => &[("weight", 1.0)],
        (Lift, Audio) => &[("contents", 0.1)],
        (Lower, Haptic) => &[("weight", 0.8)],
        (Lower, Audio) => &[],
        (Drop, Audio) => &[("contents", 1.2), ("material", 0.3)],
        (Drop, Haptic) => &[("weight", 0.5)],
        (Press, Haptic) => &[("material", 1.0), ("shape", 0.4)],
        (Press, Audio) => &[("material", 0.6)],
        (Push, Audio) => &[("contents", 0.15), ("material", 0.5)],
        (Push, Haptic) => &[("weight", 0.6), ("shape", 0.3)],
        _ => &[],
    }
}

fn distinct_values(pattern: &[&'static str]) -> Vec<&'static str> {
    let mut out: Vec<&str> = Vec::new();
    for v in pattern {
        if !out.contains(v) {
            out.push(v);
        }
    }
    out
}

/// Generates `n_objects` objects (ids `o1`..`oN`, a quarter of them in the
/// test split) and their features. Same seed, same output.
pub fn generate_synthetic_objects(
    seed: u64,
    n_objects: usize,
) -> Result<(Vec<ObjectRecord>, Vec<ObjectContextFeatures>)> {
    if n_objects < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 objects, got {n_objects}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let unit = Normal::new(0.0, 1.0).expect("valid normal");
    let noise = Normal::new(0.0, NOISE_STD).expect("valid normal");

    // Prototypes, drawn in a fixed order.
    let mut prototypes: BTreeMap<(Context, &str, &str), Vec<f64>> = BTreeMap::new();
    for ctx in Context::all() {
        for &(attr, amp) in influences(ctx) {
            let pattern = ATTRIBUTE_VALUES.iter().find(|(a, _)| *a == attr).unwrap().1;
            for value in distinct_values(pattern) {
                let v = (0..FEATURE_DIM).map(|_| amp * unit.sample(&mut rng)).collect();
                prototypes.insert((ctx, attr, value), v);
            }
        }
    }

    let n_test = (n_objects / 4).max(1);
    let mut order: Vec<usize> = (0..n_objects).collect();
    order.shuffle(&mut rng);
    let mut split = vec![Split::Train; n_objects];
    for &i in &order[..n_test] {
        split[i] = Split::Test;
    }

    let mut attrs: Vec<BTreeMap<String, String>> = vec![BTreeMap::new(); n_objects];
    for group in [Split::Train, Split::Test] {
        let members: Vec<usize> = (0..n_objects).filter(|&i| split[i] == group).collect();
        for (attr, pattern) in ATTRIBUTE_VALUES {
            let mut values: Vec<&str> = pattern.iter().cycle().take(members.len()).copied().collect();
            values.shuffle(&mut rng);
            for (&i, v) in members.iter().zip(values) {
                attrs[i].insert(attr.to_string(), v.to_string());
            }
        }
    }

    let mut records = Vec::with_capacity(n_objects);
    let mut features = Vec::with_capacity(n_objects);
    for i in 0..n_objects {
        let id = format!("o{}", i + 1);
        let mut per_ctx = BTreeMap::new();
        for ctx in Context::all() {
            let mut v: Vec<f64> = (0..FEATURE_DIM).map(|_| noise.sample(&mut rng)).collect();
            for &(attr, _) in influences(ctx) {
                let value = attrs[i][attr].as_str();
                let proto = &prototypes[&(ctx, attr, value)];
                for (x, p) in v.iter_mut().zip(proto) {
                    *x += p;
                }
            }
            per_ctx.insert(ctx, v);
        }
        records.push(ObjectRecord {
            id: id.clone(),
            split: split[i],
            latent_attributes: attrs[i].clone(),
        });
        features.push(ObjectContextFeatures {
            object_id: id,
            features: per_ctx,
        });
    }
    Ok((records, features))
}

/// The bundled map (five rooms, two people) populated with 32 generated
/// objects.
pub fn standard_fixture(seed: u64) -> Result<(WorldModel, FeatureStore)> {
    let map = super::parse_world(crate::data::MAP_JSON)?;
    let (objects, features) = generate_synthetic_objects(seed, 32)?;
    Ok((map.with_objects(objects)?, FeatureStore::new(features)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_for_seed() {
        let a = generate_synthetic_objects(7, 32).unwrap();
        let b = generate_synthetic_objects(7, 32).unwrap();
        assert_eq!(a, b);
        let c = generate_synthetic_objects(8, 32).unwrap();
        assert_ne!(a.1, c.1);
    }

    #[test]
    fn too_few_objects() {
        assert!(matches!(
            generate_synthetic_objects(7, 1),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn split_and_balance() {
        let (objs, feats) = generate_synthetic_objects(7, 32).unwrap();
        let test: Vec<_> = objs.iter().filter(|o| o.split == Split::Test).collect();
        assert_eq!(test.len(), 8);
        let rattly_train = objs
            .iter()
            .filter(|o| o.split == Split::Train && o.latent_attributes["contents"] == "rattly")
            .count();
        assert_eq!(rattly_train, 12);
        for f in &feats {
            assert_eq!(f.features.len(), 13);
            assert!(f.features.values().all(|v| v.len() == FEATURE_DIM));
        }
    }

    #[test]
    fn rattly_shifts_drop_audio() {
        let (objs, feats) = generate_synthetic_objects(7, 32).unwrap();
        let ctx = Context::new(Behavior::Drop, Modality::Audio);
        let mean = |contents: &str| {
            let rows: Vec<&Vec<f64>> = objs
                .iter()
                .zip(&feats)
                .filter(|(o, _)| o.latent_attributes["contents"] == contents)
                .map(|(_, f)| &f.features[&ctx])
                .collect();
            (0..FEATURE_DIM)
                .map(|d| rows.iter().map(|r| r[d]).sum::<f64>() / rows.len() as f64)
                .collect::<Vec<f64>>()
        };
        let (a, b) = (mean("rattly"), mean("empty"));
        let dist = a.iter().zip(&b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
        assert!(dist > 2.0 * NOISE_STD, "separation {dist}");
    }
}
