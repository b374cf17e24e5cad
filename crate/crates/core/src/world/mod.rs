//! Static environment: rooms, people, objects and their behavior-modality
//! feature vectors.

mod features;
mod synth;

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use features::{Behavior, Context, FeatureStore, Modality, ObjectContextFeatures, FEATURE_DIM};
pub use synth::{generate_synthetic_objects, standard_fixture, ATTRIBUTE_VALUES};

pub type RoomId = String;
pub type PersonId = String;
pub type ObjectId = String;

/// Room-type predicates the map knows about.
pub const ROOM_TYPES: [&str; 4] = ["office", "kitchen", "lounge", "conference_room"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Room {
    pub id: RoomId,
    pub label: String,
    pub types: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Person {
    pub id: PersonId,
    pub name: String,
    pub office: RoomId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObjectRecord {
    pub id: ObjectId,
    pub split: Split,
    /// Ground-truth attributes. Only the feature generator and the simulated
    /// user read these; the agent never does.
    pub latent_attributes: BTreeMap<String, String>,
}

/// On-disk layout of `world.json`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WorldFile {
    pub rooms: Vec<Room>,
    pub people: Vec<Person>,
    #[serde(default)]
    pub adjacency: Vec<(RoomId, RoomId)>,
    #[serde(default)]
    pub objects: Vec<ObjectRecord>,
}

/// Validated, immutable world.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WorldModel {
    rooms: Vec<Room>,
    people: Vec<Person>,
    objects: Vec<ObjectRecord>,
    adjacency: BTreeSet<(RoomId, RoomId)>,
}

impl WorldModel {
    pub fn from_file(file: WorldFile) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for id in file
            .rooms
            .iter()
            .map(|r| &r.id)
            .chain(file.people.iter().map(|p| &p.id))
            .chain(file.objects.iter().map(|o| &o.id))
        {
            if !seen.insert(id.as_str()) {
                return Err(Error::WorldLoad(format!("duplicate id `{id}`")));
            }
        }
        for room in &file.rooms {
            if room.types.is_empty() {
                return Err(Error::WorldLoad(format!("room `{}` has no types", room.id)));
            }
            if let Some(t) = room.types.iter().find(|t| !ROOM_TYPES.contains(&t.as_str())) {
                return Err(Error::WorldLoad(format!(
                    "room `{}` has unknown type `{t}`",
                    room.id
                )));
            }
        }
        let room_of = |id: &str| file.rooms.iter().find(|r| r.id == id);
        for person in &file.people {
            match room_of(&person.office) {
                None => {
                    return Err(Error::WorldLoad(format!(
                        "person `{}` has office `{}` which is not a room",
                        person.id, person.office
                    )))
                }
                Some(room) if !room.types.contains("office") => {
                    return Err(Error::WorldLoad(format!(
                        "person `{}` has office `{}` which is not typed office",
                        person.id, person.office
                    )))
                }
                Some(_) => {}
            }
        }
        let mut adjacency = BTreeSet::new();
        for (a, b) in &file.adjacency {
            if a == b {
                return Err(Error::WorldLoad(format!("room `{a}` adjacent to itself")));
            }
            for id in [a, b] {
                if room_of(id).is_none() {
                    return Err(Error::WorldLoad(format!("adjacency names unknown room `{id}`")));
                }
            }
            adjacency.insert((a.clone(), b.clone()));
            adjacency.insert((b.clone(), a.clone()));
        }
        Ok(WorldModel {
            rooms: file.rooms,
            people: file.people,
            objects: file.objects,
            adjacency,
        })
    }

    pub fn to_file(&self) -> WorldFile {
        let adjacency = self
            .adjacency
            .iter()
            .filter(|(a, b)| a < b)
            .cloned()
            .collect();
        WorldFile {
            rooms: self.rooms.clone(),
            people: self.people.clone(),
            adjacency,
            objects: self.objects.clone(),
        }
    }

    pub fn rooms(&self) -> &[Room] {
        &self.rooms
    }

    pub fn people(&self) -> &[Person] {
        &self.people
    }

    pub fn objects(&self) -> &[ObjectRecord] {
        &self.objects
    }

    pub fn room(&self, id: &str) -> Option<&Room> {
        self.rooms.iter().find(|r| r.id == id)
    }

    pub fn person(&self, id: &str) -> Option<&Person> {
        self.people.iter().find(|p| p.id == id)
    }

    pub fn object(&self, id: &str) -> Option<&ObjectRecord> {
        self.objects.iter().find(|o| o.id == id)
    }

    pub fn adjacent(&self, a: &str, b: &str) -> bool {
        self.adjacency.contains(&(a.to_string(), b.to_string()))
    }

    pub fn room_has_type(&self, room: &str, ty: &str) -> bool {
        self.room(room).is_some_and(|r| r.types.contains(ty))
    }

    /// Does `person` own room `room`?
    pub fn possesses(&self, person: &str, room: &str) -> bool {
        self.person(person).is_some_and(|p| p.office == room)
    }

    pub fn objects_in(&self, split: Split) -> Vec<ObjectId> {
        self.objects
            .iter()
            .filter(|o| o.split == split)
            .map(|o| o.id.clone())
            .collect()
    }

    /// Human-readable name for any constant: room label, person name or
    /// object id.
    pub fn display_name(&self, id: &str) -> String {
        if let Some(r) = self.room(id) {
            r.label.clone()
        } else if let Some(p) = self.person(id) {
            p.name.clone()
        } else {
            id.to_string()
        }
    }

    /// Replaces the object list (used when attaching generated objects to a
    /// hand-written map).
    pub fn with_objects(mut self, objects: Vec<ObjectRecord>) -> Result<Self> {
        let mut file = self.to_file();
        file.objects = objects;
        self = WorldModel::from_file(file)?;
        Ok(self)
    }
}

pub fn load_world(path: impl AsRef<Path>) -> Result<WorldModel> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_world(&text)
}

pub fn parse_world(json: &str) -> Result<WorldModel> {
    let file: WorldFile =
        serde_json::from_str(json).map_err(|e| Error::WorldLoad(format!("schema violation: {e}")))?;
    WorldModel::from_file(file)
}
