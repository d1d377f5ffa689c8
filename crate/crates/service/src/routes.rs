use std::path::PathBuf;

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{FromRequest, FromRequestParts, Path, Query, Request, State};
use axum::http::request::Parts;
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::{Json, Router};
use graphscene_core::lanegraph::LaneGraph;
use graphscene_core::persist::{
    document_to_scenario, graphs_to_graphml, read_document, scenario_to_document, IngestParams, MapCatalogEntry,
};
use graphscene_core::realize::{realize_scenario, timeline_to_jsonl, DEFAULT_DT};
use graphscene_core::regions::{eligible_extensions, expand_roi, induced_subgraph, Roi};
use graphscene_core::scenario::{
    new_scenario, sample_batch, ActorSpec, EnvironmentConfig, SamplerConfig, Scenario, TimeOfDay,
};
use graphscene_core::{ActorCategory, Error};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;

use crate::error::{ApiError, ApiResult};
use crate::state::AppState;

/// Upper bound on `/generate` batch size.
pub const MAX_BATCH: usize = 1000;

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/health", get(|| async { "ok" }))
        .route("/maps", get(list_maps))
        .route("/maps/ingest", post(ingest))
        .route("/maps/{map_id}/regions", get(regions))
        .route("/maps/{map_id}/graph", get(graph))
        .route("/catalog/assets", get(assets))
        .route("/scenarios", get(list_scenarios).post(create_scenario))
        .route("/scenarios/import", post(import))
        .route("/scenarios/{id}", get(show))
        .route("/scenarios/{id}/roi/expand", post(expand))
        .route("/scenarios/{id}/environment", put(set_environment))
        .route("/scenarios/{id}/spawn-candidates", get(spawn_candidates))
        .route("/scenarios/{id}/goal-candidates", get(goal_candidates))
        .route("/scenarios/{id}/actors", post(place_actor))
        .route("/scenarios/{id}/actors/{actor_id}", axum::routing::delete(remove_actor))
        .route("/scenarios/{id}/ego", post(designate_ego))
        .route("/scenarios/{id}/realize", post(realize))
        .route("/scenarios/{id}/export", get(export))
        .route("/scenarios/{id}/undo", post(undo))
        .route("/scenarios/{id}/simulator", post(simulator_bridge))
        .route("/generate", post(generate))
        .with_state(state)
}

/// `Json` with rejections rendered as structured error bodies.
pub struct Body<T>(pub T);

impl<S: Send + Sync, T: DeserializeOwned> FromRequest<S> for Body<T> {
    type Rejection = ApiError;

    async fn from_request(req: Request, state: &S) -> Result<Self, ApiError> {
        Json::<T>::from_request(req, state)
            .await
            .map(|Json(v)| Body(v))
            .map_err(|r: JsonRejection| ApiError::new(r.status(), "bad_request", r.body_text()))
    }
}

/// `Query` with structured rejections.
pub struct Params<T>(pub T);

impl<S: Send + Sync, T: DeserializeOwned> FromRequestParts<S> for Params<T> {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, state: &S) -> Result<Self, ApiError> {
        Query::<T>::from_request_parts(parts, state)
            .await
            .map(|Query(v)| Params(v))
            .map_err(|r: QueryRejection| ApiError::new(r.status(), "bad_request", r.body_text()))
    }
}

/// What every scenario-returning endpoint sends back.
#[derive(Debug, Serialize, Deserialize)]
pub struct ScenarioView {
    pub scenario_id: String,
    pub map_id: String,
    pub map_digest: String,
    pub roi: Roi,
    pub eligible_extensions: Vec<String>,
    pub environment: EnvironmentConfig,
    pub offset_margin: f64,
    pub actors: Vec<ActorSpec>,
    pub ego: Option<String>,
    pub max_allowable_actors: usize,
    pub can_undo: bool,
}

fn view(state: &AppState, s: &Scenario, can_undo: bool) -> ScenarioView {
    let maps = state.maps();
    let eligible = maps
        .bundle(&s.map_id)
        .and_then(|b| eligible_extensions(&b.partition, &s.roi).ok())
        .map(|set| set.into_iter().collect())
        .unwrap_or_default();
    ScenarioView {
        scenario_id: s.scenario_id.clone(),
        map_id: s.map_id.clone(),
        map_digest: s.map_digest.clone(),
        roi: s.roi.clone(),
        eligible_extensions: eligible,
        environment: s.environment.clone(),
        offset_margin: s.offset_margin,
        actors: s.actors.clone(),
        ego: s.ego().map(str::to_string),
        max_allowable_actors: s.max_allowable_actors(),
        can_undo,
    }
}

async fn current(state: &AppState, id: &str) -> ApiResult<(Scenario, bool)> {
    let session = state.session(id).ok_or_else(|| ApiError::not_found("scenario", id))?;
    let guard = session.lock().await;
    Ok((guard.scenario.clone(), guard.can_undo()))
}

async fn apply<F>(state: &AppState, id: &str, change: F) -> ApiResult<Json<ScenarioView>>
where
    F: FnOnce(&Scenario) -> graphscene_core::Result<Scenario>,
{
    let (s, can_undo) = state
        .mutate(id, change)
        .await?
        .ok_or_else(|| ApiError::not_found("scenario", id))?;
    Ok(Json(view(state, &s, can_undo)))
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> T + Send + 'static) -> ApiResult<T> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))
}

async fn list_maps(State(state): State<AppState>) -> Json<Vec<MapCatalogEntry>> {
    Json(state.maps().entries.clone())
}

#[derive(Deserialize)]
struct IngestRequest {
    path: PathBuf,
    #[serde(default)]
    spacing: Option<f64>,
    #[serde(default)]
    target_length: Option<f64>,
}

#[derive(Serialize)]
struct IngestResponse {
    entry: MapCatalogEntry,
    rebuilt: bool,
}

async fn ingest(State(state): State<AppState>, Body(req): Body<IngestRequest>) -> ApiResult<Json<IngestResponse>> {
    let defaults = IngestParams::default();
    let params = IngestParams {
        spacing: req.spacing.unwrap_or(defaults.spacing),
        target_length: req.target_length.unwrap_or(defaults.target_length),
    };
    let outcome = blocking(move || state.ingest(&req.path, params)).await??;
    Ok(Json(IngestResponse {
        entry: outcome.entry,
        rebuilt: outcome.rebuilt,
    }))
}

async fn regions(State(state): State<AppState>, Path(map_id): Path<String>) -> ApiResult<Response> {
    let maps = state.maps();
    let b = maps.bundle(&map_id).ok_or_else(|| ApiError::not_found("map", &map_id))?;
    Ok(Json(&b.partition).into_response())
}

#[derive(Deserialize)]
struct GraphQuery {
    /// Comma-separated region ids; the whole map when absent.
    #[serde(default)]
    roi: Option<String>,
    #[serde(default)]
    format: Option<String>,
}

#[derive(Serialize)]
struct GraphResponse<'a> {
    map_id: &'a str,
    roi: Option<Roi>,
    road: &'a LaneGraph,
    pedestrian: &'a LaneGraph,
}

async fn graph(
    State(state): State<AppState>,
    Path(map_id): Path<String>,
    Params(q): Params<GraphQuery>,
) -> ApiResult<Response> {
    let maps = state.maps();
    let b = maps.bundle(&map_id).ok_or_else(|| ApiError::not_found("map", &map_id))?;
    let roi = match q.roi.as_deref().filter(|r| !r.trim().is_empty()) {
        Some(list) => {
            let ids: Vec<String> = list.split(',').map(|s| s.trim().to_string()).collect();
            Some(Roi::from_set(&b.partition, &ids)?)
        }
        None => None,
    };
    let (road, ped) = match &roi {
        Some(roi) => (
            induced_subgraph(&b.road_graph, &b.partition, roi)?,
            induced_subgraph(&b.pedestrian_graph, &b.partition, roi)?,
        ),
        None => (b.road_graph.clone(), b.pedestrian_graph.clone()),
    };
    match q.format.as_deref() {
        None | Some("json") => Ok(Json(GraphResponse {
            map_id: &map_id,
            roi,
            road: &road,
            pedestrian: &ped,
        })
        .into_response()),
        Some("graphml") => Ok(graphml_response(graphs_to_graphml(&[&road, &ped]))),
        Some(other) => Err(ApiError::bad_request(format!("unknown format {other}"))),
    }
}

fn graphml_response(text: String) -> Response {
    ([(header::CONTENT_TYPE, "application/graphml+xml")], text).into_response()
}

async fn assets(State(state): State<AppState>) -> Response {
    Json(state.catalog()).into_response()
}

async fn list_scenarios(State(state): State<AppState>) -> Json<Vec<String>> {
    Json(state.session_ids())
}

#[derive(Deserialize)]
struct CreateScenario {
    #[serde(alias = "map")]
    map_id: String,
    roi: Vec<String>,
    #[serde(default)]
    environment: Option<EnvironmentConfig>,
}

fn default_environment() -> EnvironmentConfig {
    EnvironmentConfig {
        weather_preset: "ClearNoon".to_string(),
        time_of_day: TimeOfDay::Noon,
    }
}

async fn create_scenario(
    State(state): State<AppState>,
    Body(req): Body<CreateScenario>,
) -> ApiResult<(StatusCode, Json<ScenarioView>)> {
    let maps = state.maps();
    let b = maps.bundle(&req.map_id).ok_or_else(|| ApiError::not_found("map", &req.map_id))?;
    let roi = Roi::from_regions(&b.partition, req.roi)?;
    let env = req.environment.unwrap_or_else(default_environment);
    let s = new_scenario("pending", b, roi, env, state.catalog())?;
    let s = state.insert(s)?;
    Ok((StatusCode::CREATED, Json(view(&state, &s, false))))
}

async fn show(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<ScenarioView>> {
    let (s, can_undo) = current(&state, &id).await?;
    Ok(Json(view(&state, &s, can_undo)))
}

#[derive(Deserialize)]
struct ExpandRequest {
    region: String,
}

async fn expand(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Body(req): Body<ExpandRequest>,
) -> ApiResult<Json<ScenarioView>> {
    let maps = state.maps();
    let catalog = state.catalog().clone();
    apply(&state, &id, |s| {
        let b = maps
            .bundle(&s.map_id)
            .ok_or_else(|| Error::domain(format!("map {} is no longer cached", s.map_id)))?;
        let roi = expand_roi(&b.partition, &s.roi, &req.region)?;
        s.with_roi(b, roi, &catalog)
    })
    .await
}

async fn set_environment(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Body(env): Body<EnvironmentConfig>,
) -> ApiResult<Json<ScenarioView>> {
    let catalog = state.catalog().clone();
    apply(&state, &id, |s| s.set_environment(env, &catalog)).await
}

#[derive(Serialize)]
struct SpawnCandidates {
    road: Vec<String>,
    pedestrian: Vec<String>,
}

async fn spawn_candidates(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<SpawnCandidates>> {
    let (s, _) = current(&state, &id).await?;
    Ok(Json(SpawnCandidates {
        road: s.eligible_spawn_nodes(),
        pedestrian: s.eligible_pedestrian_nodes(),
    }))
}

#[derive(Deserialize)]
struct SpawnQuery {
    spawn: String,
}

#[derive(Serialize)]
struct GoalCandidates {
    spawn: String,
    candidates: Vec<String>,
}

async fn goal_candidates(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Params(q): Params<SpawnQuery>,
) -> ApiResult<Json<GoalCandidates>> {
    let (s, _) = current(&state, &id).await?;
    if !s.road_graph.contains(&q.spawn) && !s.pedestrian_graph.contains(&q.spawn) {
        return Err(ApiError::not_found("node", &q.spawn));
    }
    let candidates = s.goal_candidates(&q.spawn)?.into_iter().collect();
    Ok(Json(GoalCandidates {
        spawn: q.spawn,
        candidates,
    }))
}

/// An actor spec whose id may be left for the service to choose.
#[derive(Deserialize)]
struct PlaceActor {
    #[serde(default)]
    actor_id: Option<String>,
    category: ActorCategory,
    #[serde(default)]
    model: Option<String>,
    spawn_node: String,
    goal_node: String,
    desired_velocity: f64,
    #[serde(default)]
    lateral_offset: f64,
    #[serde(default)]
    is_ego: bool,
}

#[derive(Serialize, Deserialize)]
pub struct PlacedActor {
    pub actor_id: String,
    pub scenario: ScenarioView,
}

fn free_actor_id(s: &Scenario) -> String {
    (1..)
        .map(|k| format!("actor-{k:03}"))
        .find(|id| s.actor(id).is_none())
        .unwrap()
}

async fn place_actor(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Body(req): Body<PlaceActor>,
) -> ApiResult<(StatusCode, Json<PlacedActor>)> {
    let catalog = state.catalog().clone();
    let mut assigned = String::new();
    let Json(view) = apply(&state, &id, |s| {
        assigned = req.actor_id.clone().unwrap_or_else(|| free_actor_id(s));
        let spec = ActorSpec {
            actor_id: assigned.clone(),
            category: req.category,
            model: req.model,
            spawn_node: req.spawn_node,
            goal_node: req.goal_node,
            desired_velocity: req.desired_velocity,
            lateral_offset: req.lateral_offset,
            is_ego: req.is_ego,
        };
        s.place_actor(spec, &catalog)
    })
    .await?;
    Ok((
        StatusCode::CREATED,
        Json(PlacedActor {
            actor_id: assigned,
            scenario: view,
        }),
    ))
}

async fn require_actor(state: &AppState, id: &str, actor_id: &str) -> ApiResult<()> {
    let (s, _) = current(state, id).await?;
    match s.actor(actor_id) {
        Some(_) => Ok(()),
        None => Err(ApiError::not_found("actor", actor_id)),
    }
}

async fn remove_actor(
    State(state): State<AppState>,
    Path((id, actor_id)): Path<(String, String)>,
) -> ApiResult<Json<ScenarioView>> {
    require_actor(&state, &id, &actor_id).await?;
    apply(&state, &id, |s| s.remove_actor(&actor_id)).await
}

#[derive(Deserialize)]
struct EgoRequest {
    #[serde(alias = "aid")]
    actor_id: String,
}

async fn designate_ego(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Body(req): Body<EgoRequest>,
) -> ApiResult<Json<ScenarioView>> {
    require_actor(&state, &id, &req.actor_id).await?;
    apply(&state, &id, |s| s.designate_ego(&req.actor_id)).await
}

#[derive(Deserialize, Default)]
struct RealizeRequest {
    #[serde(default)]
    dt: Option<f64>,
}

#[derive(Deserialize)]
struct FormatQuery {
    #[serde(default)]
    format: Option<String>,
}

async fn realize(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Params(q): Params<FormatQuery>,
    text: String,
) -> ApiResult<Response> {
    let req: RealizeRequest = if text.trim().is_empty() {
        RealizeRequest::default()
    } else {
        serde_json::from_str(&text).map_err(|e| ApiError::bad_request(e.to_string()))?
    };
    let (s, _) = current(&state, &id).await?;
    let dt = req.dt.unwrap_or(DEFAULT_DT);
    let timeline = blocking(move || realize_scenario(&s, dt)).await??;
    match q.format.as_deref() {
        None | Some("json") => Ok(Json(timeline).into_response()),
        Some("jsonl") => Ok(([(header::CONTENT_TYPE, "application/jsonl")], timeline_to_jsonl(&timeline)).into_response()),
        Some(other) => Err(ApiError::bad_request(format!("unknown format {other}"))),
    }
}

#[derive(Deserialize)]
struct ExportQuery {
    /// Strip actors and goal edges and return GraphML.
    #[serde(default)]
    empty: bool,
}

async fn export(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Params(q): Params<ExportQuery>,
) -> ApiResult<Response> {
    let (s, _) = current(&state, &id).await?;
    if q.empty {
        return Ok(graphml_response(graphs_to_graphml(&[
            &s.road_graph.stripped(),
            &s.pedestrian_graph.stripped(),
        ])));
    }
    Ok(([(header::CONTENT_TYPE, "application/json")], scenario_to_document(&s)).into_response())
}

async fn import(State(state): State<AppState>, text: String) -> ApiResult<(StatusCode, Json<ScenarioView>)> {
    let doc = read_document(&text)?;
    let maps = state.maps();
    let b = maps.bundle(&doc.map_id).ok_or_else(|| ApiError::not_found("map", &doc.map_id))?;
    let s = document_to_scenario(&text, b, state.catalog())?;
    let s = state.insert(s)?;
    Ok((StatusCode::CREATED, Json(view(&state, &s, false))))
}

async fn undo(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<ScenarioView>> {
    let (s, can_undo) = state.undo(&id).await?.ok_or_else(|| ApiError::not_found("scenario", &id))?;
    Ok(Json(view(&state, &s, can_undo)))
}

/// Reserved for a live simulator connection.
async fn simulator_bridge(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<()> {
    current(&state, &id).await?;
    Err(ApiError::new(
        StatusCode::NOT_IMPLEMENTED,
        "not_implemented",
        "no simulator bridge is available in this build",
    ))
}

#[derive(Deserialize)]
struct GenerateRequest {
    #[serde(default)]
    config: SamplerConfig,
    #[serde(default = "one")]
    count: usize,
    /// Restricts sampling to these maps; all cached maps when absent.
    #[serde(default)]
    maps: Option<Vec<String>>,
}

fn one() -> usize {
    1
}

#[derive(Serialize)]
struct GenerateResponse {
    scenarios: Vec<Box<RawValue>>,
}

async fn generate(State(state): State<AppState>, Body(req): Body<GenerateRequest>) -> ApiResult<Json<GenerateResponse>> {
    if req.count == 0 || req.count > MAX_BATCH {
        return Err(Error::validation(format!("count must be between 1 and {MAX_BATCH}")).into());
    }
    let store = state.maps();
    let maps = match &req.maps {
        None => store.bundles.clone(),
        Some(ids) => {
            let mut picked = Vec::new();
            for id in ids {
                picked.push(store.bundle(id).ok_or_else(|| ApiError::not_found("map", id))?.clone());
            }
            picked.sort_by(|a, b| a.map_id.cmp(&b.map_id));
            picked.dedup_by(|a, b| a.map_id == b.map_id);
            picked
        }
    };
    let catalog = state.catalog().clone();
    let batch = blocking(move || sample_batch(&maps, &catalog, &req.config, req.count)).await??;
    let scenarios = batch
        .iter()
        .map(|s| RawValue::from_string(scenario_to_document(s)).expect("documents are valid json"))
        .collect();
    Ok(Json(GenerateResponse { scenarios }))
}
