//! HTTP service over the store: upload corpora, run analyses, fetch maps,
//! convergence reports and sequence posts, and run simulations.

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};

use crate::artifacts::{MAP_DOT, MAP_STRUCTURED};
use crate::config::{sim_config_from_json, sim_config_from_toml, AnalysisConfig};
use crate::corpus::{parse_corpus, Post, Reject};
use crate::error::Error;
use crate::mapgen::{
    compare_graphs, posts_containing, reconstruct_environment, ExportFormat, GraphComparison, ReconstructedGraph,
};
use crate::pipeline::counted_sequence_posts;
use crate::sim::{posts_to_corpus, run_simulation, Environment, RegimeReport};
use crate::store::{AnalysisRun, RunStatus, Store};

/// Largest corpus accepted for upload unless configured otherwise.
pub const DEFAULT_MAX_POSTS: usize = 100_000;

#[derive(Debug, Clone)]
pub struct ServerConfig {
    pub addr: SocketAddr,
    pub store_dir: PathBuf,
    pub max_posts: usize,
}

#[derive(Debug)]
pub struct AppState {
    pub store: Store,
    pub max_posts: usize,
}

/// Error body: `{code, message, details[]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
    pub details: Vec<String>,
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    body: ErrorBody,
}

impl ApiError {
    fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            body: ErrorBody {
                code: code.to_string(),
                message: message.into(),
                details: Vec::new(),
            },
        }
    }

    fn details(mut self, details: Vec<String>) -> Self {
        self.body.details = details;
        self
    }

    fn not_found(what: impl Into<String>) -> Self {
        ApiError::new(StatusCode::NOT_FOUND, "not_found", what)
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let message = e.to_string();
        match e {
            Error::InvalidConfig(fields) => ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid_config", message)
                .details(fields.iter().map(ToString::to_string).collect()),
            Error::MissingKey(key) => {
                ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "missing_key", message).details(vec![key])
            }
            Error::Config(_) => ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid_config", message),
            Error::CorpusIntegrity { lines, .. } => ApiError::new(StatusCode::BAD_REQUEST, "corpus_integrity", message)
                .details(lines.iter().map(|l| format!("line {l}")).collect()),
            Error::Usage(_) => ApiError::new(StatusCode::BAD_REQUEST, "usage", message),
            _ => ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T, Error> + Send + 'static) -> ApiResult<T> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))?
        .map_err(ApiError::from)
}

fn is_json(headers: &HeaderMap, body: &str) -> bool {
    let declared = headers
        .get(header::CONTENT_TYPE)
        .and_then(|v| v.to_str().ok())
        .is_some_and(|v| v.contains("json"));
    declared || body.trim_start().starts_with('{')
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusCounts {
    pub groups: usize,
    pub posts: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusCreated {
    pub corpus_id: String,
    pub groups: Vec<String>,
    pub counts: CorpusCounts,
    pub post_counts: std::collections::BTreeMap<String, usize>,
    pub rejects: Vec<Reject>,
}

async fn create_corpus(
    State(state): State<Arc<AppState>>,
    body: String,
) -> ApiResult<(StatusCode, Json<CorpusCreated>)> {
    let report = parse_corpus(&body)?;
    let corpus = report.corpus;
    if corpus.len() > state.max_posts {
        return Err(ApiError::new(
            StatusCode::PAYLOAD_TOO_LARGE,
            "corpus_too_large",
            format!("{} posts exceed the limit of {}", corpus.len(), state.max_posts),
        ));
    }
    let groups: Vec<String> = corpus.groups().into_iter().collect();
    let created = CorpusCreated {
        counts: CorpusCounts {
            groups: groups.len(),
            posts: corpus.len(),
        },
        post_counts: corpus.post_counts(),
        groups,
        rejects: report.rejects,
        corpus_id: String::new(),
    };
    let st = state.clone();
    let corpus_id = blocking(move || st.store.put_corpus(&corpus)).await?;
    Ok((StatusCode::CREATED, Json(CorpusCreated { corpus_id, ..created })))
}

/// Parses an analysis config body, TOML or JSON. An empty body means the
/// default configuration.
pub fn parse_analysis_body(headers: &HeaderMap, body: &str) -> Result<AnalysisConfig, Error> {
    if body.trim().is_empty() {
        Ok(AnalysisConfig::default())
    } else if is_json(headers, body) {
        AnalysisConfig::from_json(body)
    } else {
        AnalysisConfig::from_toml(body)
    }
}

async fn create_analysis(
    State(state): State<Arc<AppState>>,
    Path(corpus_id): Path<String>,
    headers: HeaderMap,
    body: String,
) -> ApiResult<(StatusCode, Json<AnalysisRun>)> {
    let st = state.clone();
    let id = corpus_id.clone();
    if blocking(move || st.store.corpus(&id)).await?.is_none() {
        return Err(ApiError::not_found(format!("unknown corpus {corpus_id}")));
    }
    let config = parse_analysis_body(&headers, &body)?;
    let st = state.clone();
    let (run, fresh) = blocking(move || st.store.analyze(&corpus_id, &config))
        .await?
        .ok_or_else(|| ApiError::not_found("unknown corpus"))?;
    let status = if fresh { StatusCode::CREATED } else { StatusCode::OK };
    Ok((status, Json(run)))
}

async fn finished_run(state: &Arc<AppState>, run_id: &str) -> ApiResult<AnalysisRun> {
    let st = state.clone();
    let id = run_id.to_string();
    let run = blocking(move || st.store.run(&id))
        .await?
        .ok_or_else(|| ApiError::not_found(format!("unknown run {run_id}")))?;
    match run.status {
        RunStatus::Done => Ok(run),
        _ => Err(ApiError::new(
            StatusCode::CONFLICT,
            "run_failed",
            run.error.clone().unwrap_or_else(|| "the run did not finish".into()),
        )
        .details(run.diagnostics.clone())),
    }
}

#[derive(Debug, Deserialize)]
pub struct MapQuery {
    pub format: Option<String>,
}

async fn get_map(
    State(state): State<Arc<AppState>>,
    Path(run_id): Path<String>,
    Query(q): Query<MapQuery>,
) -> ApiResult<Response> {
    let format: ExportFormat = q.format.as_deref().unwrap_or("dot").parse()?;
    finished_run(&state, &run_id).await?;
    let name = match format {
        ExportFormat::Dot => MAP_DOT,
        ExportFormat::Structured => MAP_STRUCTURED,
    };
    let st = state.clone();
    let bytes = blocking(move || st.store.artifact(&run_id, name))
        .await?
        .ok_or_else(|| ApiError::not_found("map artifact missing"))?;
    Ok(([(header::CONTENT_TYPE, format.content_type())], bytes).into_response())
}

async fn get_convergence(State(state): State<Arc<AppState>>, Path(run_id): Path<String>) -> ApiResult<Response> {
    let run = finished_run(&state, &run_id).await?;
    let out = run.outputs.expect("done runs carry outputs");
    Ok(Json(out.convergence).into_response())
}

#[derive(Debug, Deserialize)]
pub struct PostsQuery {
    pub group: Option<String>,
    pub contains: Option<String>,
}

async fn get_sequence_posts(
    State(state): State<Arc<AppState>>,
    Path((run_id, sequence)): Path<(String, usize)>,
    Query(q): Query<PostsQuery>,
) -> ApiResult<Json<Vec<Post>>> {
    let run = finished_run(&state, &run_id).await?;
    let out = run.outputs.as_ref().expect("done runs carry outputs");
    if sequence >= out.sequence_count() {
        return Err(ApiError::not_found(format!(
            "sequence {sequence} is out of range (the run has {})",
            out.sequence_count()
        )));
    }
    let groups: Vec<String> = match &q.group {
        Some(g) if out.groups.contains(g) => vec![g.clone()],
        Some(g) => return Err(ApiError::not_found(format!("unknown group {g}"))),
        None => out.groups.clone(),
    };
    let terms: Vec<String> = q
        .contains
        .as_deref()
        .unwrap_or("")
        .split(',')
        .map(|t| t.trim().to_lowercase())
        .filter(|t| !t.is_empty())
        .collect();
    let st = state.clone();
    let corpus_id = run.corpus_id.clone();
    let corpus = blocking(move || st.store.corpus(&corpus_id))
        .await?
        .ok_or_else(|| ApiError::not_found("the run's corpus is missing"))?;
    let include_dm = run.config.counts.include_dm;
    let window: Vec<&Post> = groups
        .iter()
        .flat_map(|g| counted_sequence_posts(&corpus, &out.slicing, g, sequence, include_dm))
        .collect();
    let listed = posts_containing(window, &terms).into_iter().cloned().collect();
    Ok(Json(listed))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationResponse {
    pub posts_corpus_id: String,
    pub regime: RegimeReport,
    pub reconstruction: ReconstructedGraph,
    pub comparison: GraphComparison,
}

async fn create_simulation(
    State(state): State<Arc<AppState>>,
    headers: HeaderMap,
    body: String,
) -> ApiResult<(StatusCode, Json<SimulationResponse>)> {
    let cfg = if is_json(&headers, &body) {
        sim_config_from_json(&body)?
    } else {
        sim_config_from_toml(&body)?
    };
    let st = state.clone();
    let response = blocking(move || {
        let env = Environment::for_config(&cfg);
        let out = run_simulation(&cfg, &env)?;
        let reconstruction = reconstruct_environment(&out.posts);
        let comparison = compare_graphs(&reconstruction, &env);
        let posts_corpus_id = st.store.put_corpus(&posts_to_corpus(&out.posts))?;
        Ok(SimulationResponse {
            posts_corpus_id,
            regime: out.report,
            reconstruction,
            comparison,
        })
    })
    .await?;
    Ok((StatusCode::CREATED, Json(response)))
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/corpora", post(create_corpus))
        .route("/corpora/{id}/analyses", post(create_analysis))
        .route("/analyses/{run}/map", get(get_map))
        .route("/analyses/{run}/convergence", get(get_convergence))
        .route("/analyses/{run}/sequences/{s}/posts", get(get_sequence_posts))
        .route("/simulations", post(create_simulation))
        .with_state(state)
}

pub fn app(store: Store, max_posts: usize) -> Router {
    router(Arc::new(AppState { store, max_posts }))
}

/// Binds and serves until the process stops.
pub async fn serve(config: ServerConfig) -> crate::Result<()> {
    let store = Store::open(&config.store_dir)?;
    let listener = tokio::net::TcpListener::bind(config.addr)
        .await
        .map_err(|e| Error::Usage(format!("cannot bind {}: {e}", config.addr)))?;
    axum::serve(listener, app(store, config.max_posts))
        .await
        .map_err(|e| Error::io(&config.store_dir, e))
}
