//! HTTP service exposing affordance queries, manipulability projections,
//! co-occurrence table builds, ConceptNet lookups, experiment jobs, Q-table
//! replay, and scripted environment sessions over JSON.
//!
//! Embedding stores load once and serve unlimited concurrent readers;
//! experiments run as background jobs polled by id; each environment
//! session is owned by one client at a time.

mod state;

use std::net::SocketAddr;
use std::sync::atomic::Ordering;
use std::sync::{Arc, Mutex};

use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};

use affordance_api::types::*;
use affordance_core::action_space::head_token;
use affordance_core::affordance::{
    manipulability_score, project_2d, rank_manipulable, ProjectionAxis,
};
use affordance_core::conceptnet::{ConceptNetClient, ConceptNetConfig};
use affordance_core::cooccurrence::CooccurrenceTable;
use affordance_core::embedding::Lexicon;
use affordance_core::env::{Environment, ScriptedEnv, ScriptedWorld};
use affordance_core::harness;

pub use state::AppState;
use state::{ExperimentJob, JobState, StoreBundle};

/// Service error: an HTTP status plus a message rendered as
/// `{"error": "..."}`.
pub struct ApiError(StatusCode, String);

impl ApiError {
    fn not_found(message: impl Into<String>) -> Self {
        ApiError(StatusCode::NOT_FOUND, message.into())
    }

    fn bad_request(message: impl Into<String>) -> Self {
        ApiError(StatusCode::UNPROCESSABLE_ENTITY, message.into())
    }

    fn internal(message: impl Into<String>) -> Self {
        ApiError(StatusCode::INTERNAL_SERVER_ERROR, message.into())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = Json(ErrorBody { error: self.1 });
        (self.0, body).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/healthz", get(health))
        .route("/api/v1/stores", post(create_store).get(list_stores))
        .route("/api/v1/stores/{id}/affordances", post(affordances))
        .route("/api/v1/stores/{id}/manipulability", post(manipulability))
        .route("/api/v1/stores/{id}/project2d", post(project2d))
        .route("/api/v1/cooc/build", post(cooc_build))
        .route("/api/v1/conceptnet/capableof", post(capable_of))
        .route(
            "/api/v1/experiments",
            post(submit_experiment).get(list_experiments),
        )
        .route("/api/v1/experiments/{id}", get(experiment_status))
        .route("/api/v1/replay", post(replay))
        .route("/api/v1/envs", post(env_create))
        .route("/api/v1/envs/{id}/step", post(env_step))
        .route("/api/v1/envs/{id}/reset", post(env_reset))
        .route("/api/v1/envs/{id}", axum::routing::delete(env_delete))
        .with_state(state)
}

async fn health() -> Json<Health> {
    Json(Health {
        status: "ok".to_string(),
    })
}

async fn create_store(
    State(state): State<Arc<AppState>>,
    Json(spec): Json<StoreSpec>,
) -> ApiResult<StoreInfo> {
    let bundle = tokio::task::spawn_blocking(move || StoreBundle::load(&spec))
        .await
        .map_err(|e| ApiError::internal(e.to_string()))?
        .map_err(|e| ApiError::bad_request(e.to_string()))?;
    let id = state.next_store_id.fetch_add(1, Ordering::SeqCst);
    let info = bundle.info(id);
    state.stores.write().unwrap().insert(id, Arc::new(bundle));
    tracing::info!(id, tokens = info.tokens, "store loaded");
    Ok(Json(info))
}

async fn list_stores(State(state): State<Arc<AppState>>) -> ApiResult<Vec<StoreInfo>> {
    let stores = state.stores.read().unwrap();
    let mut out: Vec<StoreInfo> = stores.iter().map(|(id, b)| b.info(*id)).collect();
    out.sort_by_key(|s| s.id);
    Ok(Json(out))
}

fn store_of(state: &AppState, id: u64) -> Result<Arc<StoreBundle>, ApiError> {
    state
        .stores
        .read()
        .unwrap()
        .get(&id)
        .cloned()
        .ok_or_else(|| ApiError::not_found(format!("no store with id {id}")))
}

async fn affordances(
    State(state): State<Arc<AppState>>,
    Path(id): Path<u64>,
    Json(request): Json<AffordancesRequest>,
) -> ApiResult<AffordancesResponse> {
    let bundle = store_of(&state, id)?;
    let candidates: &[String] = if request.manipulation_only {
        bundle.inventory.manipulation()
    } else {
        bundle.lexicon.verbs()
    };
    let ranked = bundle
        .model
        .affordant_verbs(
            &bundle.store,
            head_token(&request.noun),
            request.n,
            candidates,
        )
        .map_err(|e| ApiError::bad_request(e.to_string()))?;
    Ok(Json(AffordancesResponse {
        noun: request.noun,
        verbs: ranked
            .matches
            .into_iter()
            .map(|(token, similarity)| RankedVerb { token, similarity })
            .collect(),
        skipped_candidates: ranked.skipped,
    }))
}

async fn manipulability(
    State(state): State<Arc<AppState>>,
    Path(id): Path<u64>,
    Json(request): Json<ManipulabilityRequest>,
) -> ApiResult<ManipulabilityResponse> {
    let bundle = store_of(&state, id)?;
    let axis = match &request.axis {
        Some([positive, negative]) => ProjectionAxis::new(&bundle.store, positive, negative)
            .map_err(|e| ApiError::bad_request(e.to_string()))?,
        None => bundle
            .axis
            .as_ref()
            .ok_or_else(|| {
                ApiError::bad_request(
                    "this store has no default manipulability axis; pass one explicitly",
                )
            })?
            .as_ref()
            .clone(),
    };
    let ranked = rank_manipulable(&bundle.store, &axis, &request.nouns, request.nouns.len());
    Ok(Json(ManipulabilityResponse {
        axis: [axis.positive().to_string(), axis.negative().to_string()],
        nouns: ranked
            .ranked
            .into_iter()
            .map(|(token, score)| ScoredNoun { token, score })
            .collect(),
        skipped: ranked.skipped,
    }))
}

async fn project2d(
    State(state): State<Arc<AppState>>,
    Path(id): Path<u64>,
    Json(request): Json<Project2dRequest>,
) -> ApiResult<Project2dResponse> {
    let bundle = store_of(&state, id)?;
    let make_axis = |pair: &[String; 2]| {
        ProjectionAxis::new(&bundle.store, &pair[0], &pair[1])
            .map_err(|e| ApiError::bad_request(e.to_string()))
    };
    let axis_x = make_axis(&request.xaxis)?;
    let axis_y = make_axis(&request.yaxis)?;
    let projection = project_2d(&bundle.store, &axis_x, &axis_y, &request.words);
    Ok(Json(Project2dResponse {
        rows: projection
            .rows
            .into_iter()
            .map(|row| ProjectedWord {
                token: row.token,
                x: row.x,
                y: row.y,
            })
            .collect(),
        skipped: projection.skipped,
    }))
}

async fn cooc_build(Json(request): Json<CoocBuildRequest>) -> ApiResult<CoocBuildResponse> {
    let response = tokio::task::spawn_blocking(move || -> Result<CoocBuildResponse, String> {
        let lexicon = Lexicon::load(&request.verbs, &request.nouns, None)
            .map_err(|e| e.to_string())?;
        let table = CooccurrenceTable::build(
            &request.corpus,
            &lexicon,
            request.verb_k,
            request.noun_k,
            request.radius,
        )
        .map_err(|e| e.to_string())?;
        if let Some(parent) = request.out.parent() {
            if !parent.as_os_str().is_empty() {
                std::fs::create_dir_all(parent).map_err(|e| e.to_string())?;
            }
        }
        table.save_csv(&request.out).map_err(|e| e.to_string())?;
        Ok(CoocBuildResponse {
            pairs: table.len(),
            total: table.total(),
            out: request.out,
        })
    })
    .await
    .map_err(|e| ApiError::internal(e.to_string()))?
    .map_err(ApiError::bad_request)?;
    Ok(Json(response))
}

async fn capable_of(Json(request): Json<CapableOfRequest>) -> ApiResult<CapableOfResponse> {
    let response = tokio::task::spawn_blocking(move || -> Result<CapableOfResponse, String> {
        let mut config = ConceptNetConfig::new(request.cache_dir.clone());
        config.offline = request.offline;
        let client = ConceptNetClient::new(config);
        let verbs = client.capable_of(&request.noun).map_err(|e| e.to_string())?;
        Ok(CapableOfResponse {
            noun: request.noun,
            verbs: verbs.into_iter().collect(),
            network_calls: client.network_calls(),
        })
    })
    .await
    .map_err(|e| ApiError::internal(e.to_string()))?
    .map_err(ApiError::bad_request)?;
    Ok(Json(response))
}

async fn submit_experiment(
    State(state): State<Arc<AppState>>,
    Json(config): Json<ExperimentConfig>,
) -> ApiResult<ExperimentSubmitted> {
    config
        .validate()
        .map_err(|e| ApiError::bad_request(e.to_string()))?;
    let id = state.next_experiment_id.fetch_add(1, Ordering::SeqCst);
    let job = Arc::new(ExperimentJob {
        out: config.out.clone(),
        state: Mutex::new(JobState::Queued),
    });
    state.experiments.write().unwrap().insert(id, Arc::clone(&job));

    tokio::task::spawn_blocking(move || {
        *job.state.lock().unwrap() = JobState::Running;
        tracing::info!(id, "experiment started");
        match harness::compare(&config) {
            Ok(output) => {
                let failed_runs = output
                    .runs
                    .iter()
                    .filter_map(|r| {
                        r.failed.as_ref().map(|reason| {
                            format!("{} run {}: {reason}", r.strategy, r.run)
                        })
                    })
                    .collect();
                *job.state.lock().unwrap() = JobState::Completed {
                    summaries: output.summaries,
                    failed_runs,
                };
                tracing::info!(id, "experiment completed");
            }
            Err(e) => {
                tracing::warn!(id, error = %e, "experiment failed");
                *job.state.lock().unwrap() = JobState::Failed(e.to_string());
            }
        }
    });
    Ok(Json(ExperimentSubmitted { id }))
}

async fn experiment_status(
    State(state): State<Arc<AppState>>,
    Path(id): Path<u64>,
) -> ApiResult<ExperimentStatus> {
    let job = state
        .experiments
        .read()
        .unwrap()
        .get(&id)
        .cloned()
        .ok_or_else(|| ApiError::not_found(format!("no experiment with id {id}")))?;
    Ok(Json(job.status(id)))
}

async fn list_experiments(State(state): State<Arc<AppState>>) -> ApiResult<Vec<ExperimentStatus>> {
    let experiments = state.experiments.read().unwrap();
    let mut out: Vec<ExperimentStatus> = experiments
        .iter()
        .map(|(id, job)| job.status(*id))
        .collect();
    out.sort_by_key(|s| s.id);
    Ok(Json(out))
}

async fn replay(Json(request): Json<ReplayRequest>) -> ApiResult<ReplayTranscript> {
    let transcript = tokio::task::spawn_blocking(move || {
        harness::replay_qtable(&request.qtable, &request.world, request.max_steps)
    })
    .await
    .map_err(|e| ApiError::internal(e.to_string()))?
    .map_err(|e| ApiError::bad_request(e.to_string()))?;
    Ok(Json(transcript))
}

async fn env_create(
    State(state): State<Arc<AppState>>,
    Json(request): Json<EnvCreateRequest>,
) -> ApiResult<EnvCreated> {
    let world = tokio::task::spawn_blocking(move || ScriptedWorld::load(&request.world))
        .await
        .map_err(|e| ApiError::internal(e.to_string()))?
        .map_err(|e| ApiError::bad_request(e.to_string()))?;
    let mut env = ScriptedEnv::new(Arc::new(world));
    let observation = env
        .reset()
        .map_err(|e| ApiError::internal(e.to_string()))?;
    let id = state.next_env_id.fetch_add(1, Ordering::SeqCst);
    state
        .envs
        .write()
        .unwrap()
        .insert(id, Arc::new(Mutex::new(env)));
    Ok(Json(EnvCreated { id, observation }))
}

fn env_of(state: &AppState, id: u64) -> Result<Arc<Mutex<ScriptedEnv>>, ApiError> {
    state
        .envs
        .read()
        .unwrap()
        .get(&id)
        .cloned()
        .ok_or_else(|| ApiError::not_found(format!("no environment with id {id}")))
}

async fn env_step(
    State(state): State<Arc<AppState>>,
    Path(id): Path<u64>,
    Json(request): Json<EnvStepRequest>,
) -> ApiResult<EnvObservation> {
    let env = env_of(&state, id)?;
    let observation = env
        .lock()
        .unwrap()
        .step(&request.command)
        .map_err(|e| ApiError::internal(e.to_string()))?;
    Ok(Json(observation))
}

async fn env_reset(
    State(state): State<Arc<AppState>>,
    Path(id): Path<u64>,
) -> ApiResult<EnvObservation> {
    let env = env_of(&state, id)?;
    let observation = env
        .lock()
        .unwrap()
        .reset()
        .map_err(|e| ApiError::internal(e.to_string()))?;
    Ok(Json(observation))
}

async fn env_delete(
    State(state): State<Arc<AppState>>,
    Path(id): Path<u64>,
) -> Result<StatusCode, ApiError> {
    match state.envs.write().unwrap().remove(&id) {
        Some(_) => Ok(StatusCode::NO_CONTENT),
        None => Err(ApiError::not_found(format!("no environment with id {id}"))),
    }
}

/// Serve until the process is stopped.
pub async fn serve(addr: SocketAddr) -> anyhow::Result<()> {
    let state = Arc::new(AppState::default());
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(state)).await?;
    Ok(())
}

/// Start the service on an ephemeral localhost port in a background
/// thread, returning the bound address. Used by the CLI (which talks to
/// the service it embeds) and by tests.
pub fn spawn_background() -> std::io::Result<SocketAddr> {
    let (tx, rx) = std::sync::mpsc::channel();
    std::thread::Builder::new()
        .name("affordance-service".to_string())
        .spawn(move || {
            let runtime = tokio::runtime::Builder::new_multi_thread()
                .worker_threads(2)
                .enable_all()
                .build()
                .expect("tokio runtime");
            runtime.block_on(async move {
                let state = Arc::new(AppState::default());
                let listener = tokio::net::TcpListener::bind("127.0.0.1:0")
                    .await
                    .expect("bind ephemeral port");
                let addr = listener.local_addr().expect("local addr");
                tx.send(addr).expect("report addr");
                axum::serve(listener, router(state))
                    .await
                    .expect("serve");
            });
        })?;
    Ok(rx.recv().expect("service thread reports its address"))
}

/// Aggregate error helper used by the binary.
pub fn init_tracing() {
    use tracing_subscriber::EnvFilter;
    let filter = EnvFilter::try_from_default_env()
        .unwrap_or_else(|_| EnvFilter::new("info,affordance_service=info"));
    tracing_subscriber::fmt().with_env_filter(filter).init();
}
