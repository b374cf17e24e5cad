use std::sync::Arc;

use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use grounded_dialog::concepts::ConceptModel;
use grounded_dialog::dialog::AgentMove;
use grounded_dialog::learning::MetricsRow;
use grounded_dialog::world::{Person, Room, Split};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Result, ServiceError};
use crate::sessions::{InputBody, SessionView, Sessions};

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let status = match &self {
            ServiceError::NotFound(_) => StatusCode::NOT_FOUND,
            ServiceError::Conflict(_) => StatusCode::CONFLICT,
            ServiceError::BadRequest(_) | ServiceError::Json(_) => StatusCode::BAD_REQUEST,
            ServiceError::Agent(grounded_dialog::Error::Dialog(_)) => StatusCode::CONFLICT,
            ServiceError::Agent(_) | ServiceError::Io { .. } => StatusCode::INTERNAL_SERVER_ERROR,
        };
        (status, Json(json!({ "error": self.to_string() }))).into_response()
    }
}

#[derive(Debug, Default, Serialize, Deserialize)]
pub struct CreateSession {
    #[serde(default)]
    pub snapshot: Option<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Created {
    pub session_id: String,
    pub act: AgentMove,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ObjectCard {
    pub id: String,
    pub name: String,
    pub split: Split,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct WorldView {
    pub rooms: Vec<Room>,
    pub people: Vec<Person>,
    pub adjacency: Vec<(String, String)>,
    pub objects: Vec<ObjectCard>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ConceptSummary {
    pub predicate: String,
    pub words: Vec<String>,
    pub positives: usize,
    pub negatives: usize,
    pub trained: bool,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ObjectConfidence {
    pub object: String,
    pub decision: i8,
    pub confidence: f64,
    pub score: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ConceptDetail {
    #[serde(flatten)]
    pub summary: ConceptSummary,
    pub snapshot: usize,
    /// Context name to ensemble weight.
    pub weights: Vec<(String, f64)>,
    pub objects: Vec<ObjectConfidence>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct TrainPhase {
    pub phase: usize,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Trained {
    pub snapshot: usize,
    pub hash: String,
}

fn summary(predicate: &str, m: &ConceptModel) -> ConceptSummary {
    let (positives, negatives) = m.counts();
    ConceptSummary {
        predicate: predicate.to_string(),
        words: m.words.iter().cloned().collect(),
        positives,
        negatives,
        trained: m.is_trained(),
    }
}

type AppState = Arc<Sessions>;

/// Runs store and dialog work off the async workers.
async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T> + Send + 'static) -> Result<T> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ServiceError::BadRequest(format!("worker failed: {e}")))?
}

async fn create_session(State(s): State<AppState>, body: Option<Json<CreateSession>>) -> Result<Json<Created>> {
    let snapshot = body.and_then(|Json(b)| b.snapshot);
    let (session_id, act) = blocking(move || s.create(snapshot)).await?;
    Ok(Json(Created { session_id, act }))
}

async fn post_input(
    State(s): State<AppState>,
    Path(id): Path<String>,
    Json(body): Json<InputBody>,
) -> Result<Json<AgentMove>> {
    Ok(Json(blocking(move || s.input(&id, body)).await?))
}

async fn get_session(State(s): State<AppState>, Path(id): Path<String>) -> Result<Json<SessionView>> {
    Ok(Json(s.view(&id)?))
}

async fn get_world(State(s): State<AppState>) -> Json<WorldView> {
    let w = s.store.world();
    let file = w.to_file();
    Json(WorldView {
        rooms: file.rooms,
        people: file.people,
        adjacency: file.adjacency,
        objects: w
            .objects()
            .iter()
            .map(|o| ObjectCard {
                id: o.id.clone(),
                name: w.display_name(&o.id),
                split: o.split,
            })
            .collect(),
    })
}

async fn list_concepts(State(s): State<AppState>) -> Result<Json<Vec<ConceptSummary>>> {
    let snap = s.store.snapshot(s.store.latest()?)?;
    Ok(Json(snap.concepts.iter().map(|(p, m)| summary(p, m)).collect()))
}

async fn get_concept(State(s): State<AppState>, Path(name): Path<String>) -> Result<Json<ConceptDetail>> {
    let version = s.store.latest()?;
    let agent = s.store.agent(version)?;
    let predicate = agent
        .concepts
        .predicate_of(&name)
        .ok_or_else(|| ServiceError::NotFound(format!("no concept `{name}`")))?
        .to_string();
    let model = agent.concepts.model(&predicate).expect("predicate has a model");
    let objects = agent
        .world
        .objects()
        .iter()
        .filter_map(|o| {
            let p = agent.concepts.predict(&predicate, &o.id).ok()?;
            Some(ObjectConfidence {
                object: o.id.clone(),
                decision: p.decision,
                confidence: p.confidence,
                score: p.score,
            })
        })
        .collect();
    Ok(Json(ConceptDetail {
        summary: summary(&predicate, model),
        snapshot: version,
        weights: model.weights.iter().map(|(c, w)| (c.to_string(), *w)).collect(),
        objects,
    }))
}

async fn train_phase(State(s): State<AppState>, Json(body): Json<TrainPhase>) -> Result<Json<Trained>> {
    let (snapshot, hash) = blocking(move || s.train_phase(body.phase)).await?;
    Ok(Json(Trained { snapshot, hash }))
}

async fn get_metrics(State(s): State<AppState>) -> Result<Json<Vec<MetricsRow>>> {
    Ok(Json(s.store.metrics()?))
}

pub fn router(sessions: Arc<Sessions>) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/input", post(post_input))
        .route("/world", get(get_world))
        .route("/concepts", get(list_concepts))
        .route("/concepts/{name}", get(get_concept))
        .route("/admin/train_phase", post(train_phase))
        .route("/metrics", get(get_metrics))
        .with_state(sessions)
}

pub async fn serve(sessions: Arc<Sessions>, port: u16) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(("0.0.0.0", port)).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(sessions))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
