use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Length of every per-context feature vector.
pub const FEATURE_DIM: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Behavior {
    Grasp,
    Lift,
    Lower,
    Drop,
    Press,
    Push,
    Look,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Modality {
    Audio,
    Haptic,
    Vision,
}

impl Behavior {
    pub const ALL: [Behavior; 7] = [
        Behavior::Grasp,
        Behavior::Lift,
        Behavior::Lower,
        Behavior::Drop,
        Behavior::Press,
        Behavior::Push,
        Behavior::Look,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Behavior::Grasp => "grasp",
            Behavior::Lift => "lift",
            Behavior::Lower => "lower",
            Behavior::Drop => "drop",
            Behavior::Press => "press",
            Behavior::Push => "push",
            Behavior::Look => "look",
        }
    }
}

impl Modality {
    pub fn name(self) -> &'static str {
        match self {
            Modality::Audio => "audio",
            Modality::Haptic => "haptic",
            Modality::Vision => "vision",
        }
    }
}

/// A behavior-modality pair such as `drop-audio`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Context {
    pub behavior: Behavior,
    pub modality: Modality,
}

impl Context {
    pub const fn new(behavior: Behavior, modality: Modality) -> Self {
        Context { behavior, modality }
    }

    /// The 13 valid contexts: `look` only with vision, the six manipulation
    /// behaviors with audio and haptic.
    pub fn all() -> Vec<Context> {
        let mut out = Vec::with_capacity(13);
        for b in Behavior::ALL {
            if b == Behavior::Look {
                out.push(Context::new(b, Modality::Vision));
            } else {
                out.push(Context::new(b, Modality::Audio));
                out.push(Context::new(b, Modality::Haptic));
            }
        }
        out
    }

    pub fn is_valid(self) -> bool {
        match self.behavior {
            Behavior::Look => self.modality == Modality::Vision,
            _ => self.modality != Modality::Vision,
        }
    }
}

impl fmt::Display for Context {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.behavior.name(), self.modality.name())
    }
}

impl FromStr for Context {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (b, m) = s
            .split_once('-')
            .ok_or_else(|| Error::WorldLoad(format!("bad context key `{s}`")))?;
        let behavior = Behavior::ALL
            .into_iter()
            .find(|x| x.name() == b)
            .ok_or_else(|| Error::WorldLoad(format!("unknown behavior `{b}`")))?;
        let modality = [Modality::Audio, Modality::Haptic, Modality::Vision]
            .into_iter()
            .find(|x| x.name() == m)
            .ok_or_else(|| Error::WorldLoad(format!("unknown modality `{m}`")))?;
        let ctx = Context::new(behavior, modality);
        if !ctx.is_valid() {
            return Err(Error::WorldLoad(format!("invalid context `{s}`")));
        }
        Ok(ctx)
    }
}

impl Serialize for Context {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Context {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObjectContextFeatures {
    pub object_id: String,
    pub features: BTreeMap<Context, Vec<f64>>,
}

/// All objects' features, keyed by object id.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FeatureStore {
    objects: BTreeMap<String, BTreeMap<Context, Vec<f64>>>,
}

impl FeatureStore {
    pub fn new(features: Vec<ObjectContextFeatures>) -> Result<Self> {
        let mut objects = BTreeMap::new();
        for f in features {
            objects.insert(f.object_id, f.features);
        }
        let store = FeatureStore { objects };
        store.validate()?;
        Ok(store)
    }

    fn validate(&self) -> Result<()> {
        let contexts = Context::all();
        let mut dims: Option<BTreeMap<Context, usize>> = None;
        for (id, feats) in &self.objects {
            if feats.len() != contexts.len() || contexts.iter().any(|c| !feats.contains_key(c)) {
                return Err(Error::WorldLoad(format!(
                    "object `{id}` does not have exactly the 13 valid contexts"
                )));
            }
            let these: BTreeMap<Context, usize> =
                feats.iter().map(|(c, v)| (*c, v.len())).collect();
            match &dims {
                None => dims = Some(these),
                Some(d) if *d != these => {
                    return Err(Error::WorldLoad(format!(
                        "object `{id}` has mismatched context vector lengths"
                    )))
                }
                _ => {}
            }
        }
        Ok(())
    }

    pub fn get(&self, object: &str, context: Context) -> Option<&[f64]> {
        self.objects
            .get(object)
            .and_then(|m| m.get(&context))
            .map(|v| v.as_slice())
    }

    pub fn contains(&self, object: &str) -> bool {
        self.objects.contains_key(object)
    }

    pub fn object_ids(&self) -> impl Iterator<Item = &str> {
        self.objects.keys().map(|s| s.as_str())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let raw: BTreeMap<String, BTreeMap<Context, Vec<f64>>> = serde_json::from_str(json)
            .map_err(|e| Error::WorldLoad(format!("features schema violation: {e}")))?;
        let store = FeatureStore { objects: raw };
        store.validate()?;
        Ok(store)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.objects).expect("features serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thirteen_valid_contexts() {
        let all = Context::all();
        assert_eq!(all.len(), 13);
        assert!(all.iter().all(|c| c.is_valid()));
        assert!(!Context::new(Behavior::Look, Modality::Audio).is_valid());
        assert!(!Context::new(Behavior::Drop, Modality::Vision).is_valid());
    }

    #[test]
    fn context_names_round_trip() {
        for c in Context::all() {
            assert_eq!(c.to_string().parse::<Context>().unwrap(), c);
        }
        assert_eq!(
            "drop-audio".parse::<Context>().unwrap(),
            Context::new(Behavior::Drop, Modality::Audio)
        );
        assert!("look-haptic".parse::<Context>().is_err());
    }
}
