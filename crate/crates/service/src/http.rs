//! HTTP/JSON API for live trial conduct.

use std::net::SocketAddr;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use uuid::Uuid;

use crate::conduct::{self, CohortSubmission, CompletePhase1, CreateTrial, Phase2Submission};
use crate::error::ServiceError;
use crate::events::{
    Assignment, DecisionView, EventBody, Graduated, Phase, PosteriorSummary, Randomized, Recommended, TrialEvent,
    TrialState,
};
use crate::store::Store;

#[derive(Debug, Clone)]
pub struct AppState {
    pub store: Arc<Store>,
}

pub fn router(store: Arc<Store>) -> Router {
    Router::new()
        .route("/trials", post(create_trial))
        .route("/trials/{id}", get(get_trial))
        .route("/trials/{id}/posterior", get(get_posterior))
        .route("/trials/{id}/phase1/cohorts", post(submit_cohort))
        .route("/trials/{id}/phase1/complete", post(complete_phase1))
        .route("/trials/{id}/phase2/outcomes", post(submit_phase2))
        .with_state(AppState { store })
}

pub async fn serve(store: Arc<Store>, addr: SocketAddr) -> Result<(), ServiceError> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(store)).await?;
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
    pub message: String,
}

pub struct ApiError(ServiceError);

impl From<ServiceError> for ApiError {
    fn from(e: ServiceError) -> Self {
        ApiError(e)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, code) = match &self.0 {
            ServiceError::NotFound(_) => (StatusCode::NOT_FOUND, "not_found"),
            ServiceError::Conflict(_) => (StatusCode::CONFLICT, "out_of_order"),
            ServiceError::Invalid(_) | ServiceError::Config(_) => (StatusCode::UNPROCESSABLE_ENTITY, "invalid"),
            ServiceError::Engine(pedoop::Error::Domain(_) | pedoop::Error::Config(_)) => {
                (StatusCode::UNPROCESSABLE_ENTITY, "invalid")
            }
            _ => (StatusCode::INTERNAL_SERVER_ERROR, "internal"),
        };
        (status, Json(ErrorBody { error: code.into(), message: self.0.to_string() })).into_response()
    }
}

fn parse_body<T: DeserializeOwned>(body: &Bytes) -> Result<T, ServiceError> {
    serde_json::from_slice(body).map_err(|e| ServiceError::Invalid(format!("request body: {e}")))
}

/// Runs `f` on the current state under the trial's lock and persists the
/// events it returns.
async fn mutate<F>(app: &AppState, id: &str, f: F) -> Result<(TrialState, Vec<TrialEvent>), ServiceError>
where
    F: FnOnce(&TrialState) -> Result<Vec<EventBody>, ServiceError> + Send + 'static,
{
    let lock = app.store.lock(id);
    let _guard = lock.lock().await;
    let store = app.store.clone();
    let id = id.to_string();
    tokio::task::spawn_blocking(move || {
        let state = store.load(&id)?;
        let bodies = f(&state)?;
        store.append(&id, Some(state), bodies)
    })
    .await
    .map_err(|e| ServiceError::Io(format!("worker failed: {e}")))?
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CreateResponse {
    pub trial_id: String,
    pub assignment: Option<Assignment>,
    pub events: Vec<TrialEvent>,
    pub state: TrialState,
}

async fn create_trial(State(app): State<AppState>, body: Bytes) -> Result<(StatusCode, Json<CreateResponse>), ApiError> {
    let req: CreateTrial = parse_body(&body)?;
    let id = Uuid::new_v4().to_string();
    let bodies = conduct::create(&id, &req)?;
    let lock = app.store.lock(&id);
    let _guard = lock.lock().await;
    let (state, events) = app.store.append(&id, None, bodies)?;
    Ok((StatusCode::CREATED, Json(CreateResponse { trial_id: id, assignment: state.next_cohort, events, state })))
}

async fn get_trial(State(app): State<AppState>, Path(id): Path<String>) -> Result<Json<TrialState>, ApiError> {
    let id = Store::canonical_id(&id)?;
    Ok(Json(app.store.load(&id)?))
}

async fn get_posterior(
    State(app): State<AppState>,
    Path(id): Path<String>,
) -> Result<Json<PosteriorSummary>, ApiError> {
    let id = Store::canonical_id(&id)?;
    let state = app.store.load(&id)?;
    state
        .posterior
        .map(Json)
        .ok_or_else(|| ApiError(ServiceError::Conflict("no posterior has been computed yet".into())))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CohortResponse {
    pub phase: Phase,
    pub decision: Option<DecisionView>,
    pub next_cohort: Option<Assignment>,
    pub posterior: Option<PosteriorSummary>,
    pub events: Vec<TrialEvent>,
    pub state: TrialState,
}

fn fresh<T>(events: &[TrialEvent], pick: impl Fn(&EventBody) -> Option<&T>) -> Option<T>
where
    T: Clone,
{
    events.iter().rev().find_map(|e| pick(&e.body)).cloned()
}

async fn submit_cohort(
    State(app): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Json<CohortResponse>, ApiError> {
    let id = Store::canonical_id(&id)?;
    let req: CohortSubmission = parse_body(&body)?;
    let (state, events) = mutate(&app, &id, move |s| conduct::submit_cohort(s, &req)).await?;
    let decision = fresh(&events, |b| match b {
        EventBody::CohortAssigned(a) => a.decision.as_ref(),
        EventBody::Terminated(t) => t.decision.as_ref(),
        _ => None,
    });
    let posterior = fresh(&events, |b| match b {
        EventBody::PosteriorComputed(p) => Some(p),
        _ => None,
    });
    Ok(Json(CohortResponse { phase: state.phase, decision, next_cohort: state.next_cohort, posterior, events, state }))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CompleteResponse {
    pub phase: Phase,
    pub graduation: Option<Graduated>,
    pub allocation: Option<Randomized>,
    pub recommendation: Option<Recommended>,
    pub events: Vec<TrialEvent>,
    pub state: TrialState,
}

async fn complete_phase1(
    State(app): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Json<CompleteResponse>, ApiError> {
    let id = Store::canonical_id(&id)?;
    let req: CompletePhase1 = if body.is_empty() { CompletePhase1::default() } else { parse_body(&body)? };
    let (state, events) = mutate(&app, &id, move |s| conduct::complete_phase1(s, &req)).await?;
    Ok(Json(CompleteResponse {
        phase: state.phase,
        graduation: state.graduation.clone(),
        allocation: state.allocation.clone(),
        recommendation: state.recommendation.clone(),
        events,
        state,
    }))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Phase2Response {
    pub phase: Phase,
    pub xi: Option<Vec<f64>>,
    pub allocation: Option<Randomized>,
    pub recommendation: Option<Recommended>,
    pub events: Vec<TrialEvent>,
    pub state: TrialState,
}

async fn submit_phase2(
    State(app): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Json<Phase2Response>, ApiError> {
    let id = Store::canonical_id(&id)?;
    let req: Phase2Submission = parse_body(&body)?;
    let (state, events) = mutate(&app, &id, move |s| conduct::submit_phase2(s, &req)).await?;
    let xi = state
        .allocation
        .as_ref()
        .and_then(|a| a.xi.clone())
        .or_else(|| state.recommendation.as_ref().and_then(|r| r.xi.clone()));
    Ok(Json(Phase2Response {
        phase: state.phase,
        xi,
        allocation: state.allocation.clone(),
        recommendation: state.recommendation.clone(),
        events,
        state,
    }))
}
