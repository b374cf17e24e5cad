//! On-disk agent state under one data directory:
//!
//! ```text
//! world.json, features.json     the world and its perceptual features
//! snapshots/v{N}.json           published agent snapshots, never rewritten
//! logs/phase{N}/{id}.json       finished conversations held with snapshot N
//! sessions/{id}.jsonl           append-only event log of each API session
//! metrics.json                  last evaluation table
//! ```

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use grounded_dialog::agent::Agent;
use grounded_dialog::dialog::ConversationLog;
use grounded_dialog::learning::{perception_only, retrain_phase, AgentSnapshot, MetricsRow};
use grounded_dialog::world::{standard_fixture, FeatureStore, Split, WorldModel};
use log::info;

use crate::error::{Result, ServiceError};

/// World seed used when the data directory has no world yet.
pub const DEFAULT_WORLD_SEED: u64 = 7;

pub struct Store {
    dir: PathBuf,
    base: Agent,
    /// Held while a snapshot is being published.
    writer: Mutex<()>,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| ServiceError::io(path, e))
}

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| ServiceError::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| ServiceError::io(path, e))
}

/// Writes the fixture world for `seed` into `dir`. Refuses to replace an
/// existing world unless `force` is set, since snapshots refer to its objects.
pub fn generate_world(dir: &Path, seed: u64, force: bool) -> Result<()> {
    let world_path = dir.join("world.json");
    if world_path.exists() && !force {
        return Err(ServiceError::Conflict(format!(
            "{} already exists; pass --force to replace it",
            world_path.display()
        )));
    }
    let (world, features) = standard_fixture(seed)?;
    write(&world_path, &serde_json::to_string_pretty(&world.to_file())?)?;
    write(&dir.join("features.json"), &features.to_json())?;
    Ok(())
}

impl Store {
    /// Opens `dir`, creating the default world and the initial snapshot
    /// when missing.
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        if !dir.join("world.json").exists() {
            info!("no world in {}, generating seed {DEFAULT_WORLD_SEED}", dir.display());
            generate_world(&dir, DEFAULT_WORLD_SEED, false)?;
        }
        let world = grounded_dialog::world::parse_world(&read(&dir.join("world.json"))?)?;
        let features = FeatureStore::from_json(&read(&dir.join("features.json"))?)?;
        let base = Agent::initial(Arc::new(world), Arc::new(features))?;
        let store = Store {
            dir,
            base,
            writer: Mutex::new(()),
        };
        if store.versions()?.is_empty() {
            store.publish(&AgentSnapshot::of_agent(&store.base, 1))?;
        }
        Ok(store)
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn world(&self) -> &WorldModel {
        &self.base.world
    }

    pub fn base(&self) -> &Agent {
        &self.base
    }

    /// Objects API sessions talk about: the held-out objects.
    pub fn session_objects(&self) -> Vec<String> {
        self.world().objects_in(Split::Test)
    }

    fn snapshot_path(&self, version: usize) -> PathBuf {
        self.dir.join("snapshots").join(format!("v{version}.json"))
    }

    pub fn versions(&self) -> Result<Vec<usize>> {
        let dir = self.dir.join("snapshots");
        if !dir.exists() {
            return Ok(Vec::new());
        }
        let mut out: Vec<usize> = fs::read_dir(&dir)
            .map_err(|e| ServiceError::io(&dir, e))?
            .filter_map(|e| e.ok())
            .filter_map(|e| {
                let name = e.file_name().into_string().ok()?;
                name.strip_prefix('v')?.strip_suffix(".json")?.parse().ok()
            })
            .collect();
        out.sort();
        Ok(out)
    }

    pub fn latest(&self) -> Result<usize> {
        self.versions()?
            .last()
            .copied()
            .ok_or_else(|| ServiceError::NotFound("no snapshots".into()))
    }

    pub fn snapshot(&self, version: usize) -> Result<AgentSnapshot> {
        let path = self.snapshot_path(version);
        if !path.exists() {
            return Err(ServiceError::NotFound(format!("no snapshot v{version}")));
        }
        Ok(AgentSnapshot::from_json(&read(&path)?)?)
    }

    pub fn agent(&self, version: usize) -> Result<Agent> {
        Ok(self.snapshot(version)?.to_agent(&self.base)?)
    }

    /// Agent for a name such as `A3`, `3` or `A4*`. A trailing `*` pairs the
    /// first snapshot's parser weights with that snapshot's vocabulary and
    /// concepts.
    pub fn named_agent(&self, name: &str) -> Result<Agent> {
        let trimmed = name.trim().trim_start_matches(['A', 'a']);
        let (num, perception) = match trimmed.strip_suffix('*') {
            Some(n) => (n, true),
            None => (trimmed, false),
        };
        let version: usize = num
            .parse()
            .map_err(|_| ServiceError::BadRequest(format!("bad snapshot name `{name}`")))?;
        let snap = self.snapshot(version)?;
        let snap = if perception {
            perception_only(&self.snapshot(1)?, &snap)
        } else {
            snap
        };
        Ok(snap.to_agent(&self.base)?)
    }

    /// Writes a snapshot under its version. Publishing the same content
    /// again is a no-op; different content for an existing version is a
    /// conflict.
    pub fn publish(&self, snap: &AgentSnapshot) -> Result<String> {
        let _guard = self.writer.lock().expect("writer lock");
        let path = self.snapshot_path(snap.version);
        let hash = snap.hash();
        if path.exists() {
            let existing = AgentSnapshot::from_json(&read(&path)?)?;
            if existing.hash() == hash {
                return Ok(hash);
            }
            return Err(ServiceError::Conflict(format!(
                "snapshot v{} already exists with different content",
                snap.version
            )));
        }
        write(&path, &snap.to_json())?;
        info!("published v{} {hash}", snap.version);
        Ok(hash)
    }

    pub fn phase_logs_dir(&self, phase: usize) -> PathBuf {
        self.dir.join("logs").join(format!("phase{phase}"))
    }

    pub fn save_log(&self, phase: usize, log: &ConversationLog) -> Result<()> {
        let path = self.phase_logs_dir(phase).join(format!("{}.json", log.session_id));
        write(&path, &serde_json::to_string(log)?)
    }

    /// Every conversation log in `dir`, in file name order. A missing
    /// directory holds no logs.
    pub fn read_logs(dir: &Path) -> Result<Vec<ConversationLog>> {
        if !dir.exists() {
            return Ok(Vec::new());
        }
        let mut paths: Vec<PathBuf> = fs::read_dir(dir)
            .map_err(|e| ServiceError::io(dir, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        paths.sort();
        paths
            .iter()
            .map(|p| Ok(serde_json::from_str(&read(p)?)?))
            .collect()
    }

    /// Retrains snapshot `phase` on the conversations in `logs` (default:
    /// the ones held with it) and publishes the result as the next version.
    pub fn train_phase(&self, phase: usize, logs: Option<&Path>) -> Result<(AgentSnapshot, String)> {
        let prev = self.snapshot(phase)?;
        let dir = logs.map(Path::to_path_buf).unwrap_or_else(|| self.phase_logs_dir(phase));
        let logs = Self::read_logs(&dir)?;
        info!("training phase {phase} on {} conversations", logs.len());
        let next = retrain_phase(&prev, &self.base, &logs)?;
        let hash = self.publish(&next)?;
        Ok((next, hash))
    }

    pub fn sessions_dir(&self) -> PathBuf {
        self.dir.join("sessions")
    }

    pub fn save_metrics(&self, rows: &[MetricsRow]) -> Result<()> {
        write(&self.dir.join("metrics.json"), &serde_json::to_string_pretty(rows)?)
    }

    pub fn metrics(&self) -> Result<Vec<MetricsRow>> {
        let path = self.dir.join("metrics.json");
        if !path.exists() {
            return Ok(Vec::new());
        }
        Ok(serde_json::from_str(&read(&path)?)?)
    }
}
