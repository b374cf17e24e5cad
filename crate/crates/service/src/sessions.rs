use std::collections::BTreeMap;
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::PathBuf;
use std::sync::{Arc, Mutex, RwLock};
use std::time::{SystemTime, UNIX_EPOCH};

use grounded_dialog::dialog::{AgentMove, ConversationLog, Session, SessionConfig, UserInput};
use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Result, ServiceError};
use crate::store::Store;

/// One line of a session's event file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum SessionEvent {
    Open { snapshot: usize, at: u64 },
    Input { input: UserInput, at: u64 },
}

pub struct SessionRecord {
    pub id: String,
    pub snapshot: usize,
    pub created: u64,
    pub updated: u64,
    pub session: Session,
}

/// Full state of a session as the API reports it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SessionView {
    pub session_id: String,
    pub snapshot: usize,
    pub created: u64,
    pub updated: u64,
    pub finished: bool,
    pub current: AgentMove,
    pub log: ConversationLog,
}

impl SessionRecord {
    pub fn view(&self) -> SessionView {
        SessionView {
            session_id: self.id.clone(),
            snapshot: self.snapshot,
            created: self.created,
            updated: self.updated,
            finished: self.session.is_finished(),
            current: self.session.current(),
            log: self.session.log().clone(),
        }
    }
}

/// A reply to the pending act: typed text, or an already structured answer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InputBody {
    Text { text: String },
    Answer { answer: UserInput },
}

fn now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

type Handle = Arc<Mutex<SessionRecord>>;

/// Live sessions over a store. Inputs to one session are serialized by its
/// lock; retraining takes the gate exclusively so no session moves while a
/// snapshot is written.
pub struct Sessions {
    pub store: Arc<Store>,
    map: Mutex<BTreeMap<String, Handle>>,
    gate: RwLock<()>,
}

impl Sessions {
    /// Loads every session recorded in the store by replaying its events.
    pub fn load(store: Arc<Store>) -> Result<Self> {
        let sessions = Sessions {
            store,
            map: Mutex::new(BTreeMap::new()),
            gate: RwLock::new(()),
        };
        let dir = sessions.store.sessions_dir();
        if dir.exists() {
            let mut paths: Vec<PathBuf> = fs::read_dir(&dir)
                .map_err(|e| ServiceError::io(&dir, e))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
                .collect();
            paths.sort();
            for path in paths {
                match sessions.replay(&path) {
                    Ok(rec) => {
                        sessions.map.lock().unwrap().insert(rec.id.clone(), Arc::new(Mutex::new(rec)));
                    }
                    Err(e) => warn!("cannot resume {}: {e}", path.display()),
                }
            }
        }
        Ok(sessions)
    }

    fn replay(&self, path: &PathBuf) -> Result<SessionRecord> {
        let id = path
            .file_stem()
            .and_then(|s| s.to_str())
            .ok_or_else(|| ServiceError::BadRequest(format!("bad session file {}", path.display())))?
            .to_string();
        let text = fs::read_to_string(path).map_err(|e| ServiceError::io(path, e))?;
        let mut rec: Option<SessionRecord> = None;
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            match (serde_json::from_str::<SessionEvent>(line)?, rec.as_mut()) {
                (SessionEvent::Open { snapshot, at }, None) => rec = Some(self.fresh(&id, snapshot, at)?),
                (SessionEvent::Input { input, at }, Some(r)) => {
                    r.session.step(input)?;
                    r.updated = at;
                }
                _ => return Err(ServiceError::BadRequest(format!("malformed session file {}", path.display()))),
            }
        }
        rec.ok_or_else(|| ServiceError::BadRequest(format!("empty session file {}", path.display())))
    }

    fn fresh(&self, id: &str, snapshot: usize, at: u64) -> Result<SessionRecord> {
        let agent = self.store.agent(snapshot)?;
        let objects = self.store.session_objects();
        let session = Session::new(id, agent, SessionConfig::new(objects.clone(), objects));
        Ok(SessionRecord {
            id: id.to_string(),
            snapshot,
            created: at,
            updated: at,
            session,
        })
    }

    fn append(&self, id: &str, event: &SessionEvent) -> Result<()> {
        let dir = self.store.sessions_dir();
        fs::create_dir_all(&dir).map_err(|e| ServiceError::io(&dir, e))?;
        let path = dir.join(format!("{id}.jsonl"));
        let mut f = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(|e| ServiceError::io(&path, e))?;
        writeln!(f, "{}", serde_json::to_string(event)?).map_err(|e| ServiceError::io(&path, e))
    }

    fn handle(&self, id: &str) -> Result<Handle> {
        self.map
            .lock()
            .unwrap()
            .get(id)
            .cloned()
            .ok_or_else(|| ServiceError::NotFound(format!("no session `{id}`")))
    }

    /// Opens a session against `snapshot`, the latest one by default.
    pub fn create(&self, snapshot: Option<usize>) -> Result<(String, AgentMove)> {
        let _gate = self.gate.read().unwrap();
        let snapshot = match snapshot {
            Some(v) => v,
            None => self.store.latest()?,
        };
        let id = uuid::Uuid::new_v4().simple().to_string();
        let at = now();
        let rec = self.fresh(&id, snapshot, at)?;
        self.append(&id, &SessionEvent::Open { snapshot, at })?;
        let first = rec.session.current();
        self.map.lock().unwrap().insert(id.clone(), Arc::new(Mutex::new(rec)));
        Ok((id, first))
    }

    pub fn input(&self, id: &str, body: InputBody) -> Result<AgentMove> {
        let _gate = self.gate.read().unwrap();
        let handle = self.handle(id)?;
        let mut rec = handle.lock().unwrap();
        if rec.session.is_finished() {
            return Err(ServiceError::Conflict(format!("session `{id}` has finished")));
        }
        let input = match body {
            InputBody::Text { text } => rec.session.interpret(&text),
            InputBody::Answer { answer } => answer,
        };
        let m = rec.session.step(input.clone())?;
        let at = now();
        rec.updated = at;
        self.append(id, &SessionEvent::Input { input, at })?;
        if m.finished {
            self.store.save_log(rec.snapshot, rec.session.log())?;
        }
        Ok(m)
    }

    pub fn view(&self, id: &str) -> Result<SessionView> {
        Ok(self.handle(id)?.lock().unwrap().view())
    }

    pub fn open_ids(&self) -> Vec<String> {
        let map = self.map.lock().unwrap();
        map.iter()
            .filter(|(_, h)| !h.lock().unwrap().session.is_finished())
            .map(|(id, _)| id.clone())
            .collect()
    }

    /// Retrains snapshot `phase` on its finished conversations. Refused
    /// while any session is still open.
    pub fn train_phase(&self, phase: usize) -> Result<(usize, String)> {
        let _gate = self.gate.write().unwrap();
        let open = self.open_ids();
        if !open.is_empty() {
            return Err(ServiceError::Conflict(format!("{} sessions are still open", open.len())));
        }
        let (snap, hash) = self.store.train_phase(phase, None)?;
        Ok((snap.version, hash))
    }
}
