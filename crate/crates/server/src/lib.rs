//! HTTP JSON API for exploring persistence thresholds on uploaded fields.
//!
//! Datasets are uploaded as SFG or SFGB bodies and addressed by a content
//! hash. Simplified results are cached per dataset in an LRU keyed by the
//! threshold quantized to a millionth of the value range, and cached bodies
//! are the exact bytes of the cold computation.

mod dataset;
mod error;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::{DefaultBodyLimit, Path, Query, State};
use axum::http::header;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use bytes::Bytes;
use serde::Deserialize;
use tokio::sync::{RwLock, Semaphore};
use tower_http::cors::CorsLayer;

pub use dataset::{Dataset, Simplification};
pub use error::ApiError;

#[derive(Debug, Clone)]
pub struct Config {
    /// Uploads with more vertices are rejected with 413.
    pub max_vertices: usize,
    pub max_body_bytes: usize,
    /// Simplified results kept per dataset.
    pub cache_capacity: usize,
    /// Simplifications running at once across all datasets.
    pub workers: usize,
    /// Uploads are written here and reloaded on startup.
    pub data_dir: Option<PathBuf>,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            max_vertices: 1 << 27,
            max_body_bytes: 2 << 30,
            cache_capacity: 32,
            workers: 2,
            data_dir: None,
        }
    }
}

pub struct AppState {
    config: Config,
    datasets: RwLock<std::collections::HashMap<String, Arc<Dataset>>>,
    workers: Semaphore,
}

impl AppState {
    pub fn new(config: Config) -> Arc<Self> {
        let workers = Semaphore::new(config.workers.max(1));
        Arc::new(Self { config, datasets: RwLock::default(), workers })
    }

    /// Loads every dataset file in the data directory; unreadable files are skipped.
    pub async fn load_data_dir(self: &Arc<Self>) -> std::io::Result<usize> {
        let Some(dir) = self.config.data_dir.clone() else { return Ok(0) };
        tokio::fs::create_dir_all(&dir).await?;
        let mut entries = tokio::fs::read_dir(&dir).await?;
        let mut loaded = 0;
        while let Some(entry) = entries.next_entry().await? {
            let path = entry.path();
            if path.extension().is_none_or(|e| e != "sfg") {
                continue;
            }
            let bytes = Bytes::from(tokio::fs::read(&path).await?);
            match self.insert(bytes, false).await {
                Ok(_) => loaded += 1,
                Err(e) => tracing::warn!("skipping {}: {}", path.display(), e.message),
            }
        }
        Ok(loaded)
    }

    async fn insert(self: &Arc<Self>, body: Bytes, persist: bool) -> Result<Arc<Dataset>, ApiError> {
        let id = dataset::content_id(&body);
        if let Some(d) = self.datasets.read().await.get(&id) {
            return Ok(d.clone());
        }
        let (max_vertices, cache) = (self.config.max_vertices, self.config.cache_capacity);
        let parse_body = body.clone();
        let parsed = tokio::task::spawn_blocking(move || Dataset::from_bytes(id, &parse_body, max_vertices, cache))
            .await
            .map_err(ApiError::internal)??;
        let parsed = Arc::new(parsed);
        if persist {
            if let Some(dir) = &self.config.data_dir {
                let tmp = dir.join(format!("{}.part", parsed.id));
                tokio::fs::write(&tmp, &body).await.map_err(ApiError::internal)?;
                tokio::fs::rename(&tmp, dir.join(format!("{}.sfg", parsed.id))).await.map_err(ApiError::internal)?;
            }
        }
        let mut map = self.datasets.write().await;
        Ok(map.entry(parsed.id.clone()).or_insert(parsed).clone())
    }

    async fn get(&self, id: &str) -> Result<Arc<Dataset>, ApiError> {
        self.datasets.read().await.get(id).cloned().ok_or_else(|| ApiError::not_found(format!("no dataset {id}")))
    }

    /// Cached or freshly computed simplification at `epsilon`.
    async fn simplified(&self, d: &Arc<Dataset>, epsilon: f64) -> Result<Arc<Simplification>, ApiError> {
        let key = d.quantize(epsilon)?;
        if let Some(hit) = d.cached(key.0) {
            return Ok(hit);
        }
        // one computation per dataset at a time; a waiter usually finds the result cached
        let _turn = d.compute.lock().await;
        if let Some(hit) = d.cached(key.0) {
            return Ok(hit);
        }
        let _permit = self.workers.acquire().await.map_err(ApiError::internal)?;
        let worker = d.clone();
        let out = tokio::task::spawn_blocking(move || worker.simplify(key.1)).await.map_err(ApiError::internal)??;
        let out = Arc::new(out);
        d.store(key.0, out.clone());
        Ok(out)
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    let limit = state.config.max_body_bytes;
    Router::new()
        .route("/datasets", post(upload))
        .route("/datasets/{id}/curve", get(curve))
        .route("/datasets/{id}/simplify", post(simplify))
        .route("/datasets/{id}/field", get(field))
        .route("/datasets/{id}/criticalpoints", get(critical_points))
        .layer(DefaultBodyLimit::max(limit))
        .layer(CorsLayer::permissive())
        .with_state(state)
}

/// Binds `addr` and serves until the process exits.
pub async fn serve(addr: SocketAddr, config: Config) -> std::io::Result<()> {
    let state = AppState::new(config);
    let n = state.load_data_dir().await?;
    if n > 0 {
        tracing::info!("loaded {n} datasets");
    }
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(state)).await
}

fn json_body(bytes: Bytes) -> Response {
    ([(header::CONTENT_TYPE, "application/json")], bytes).into_response()
}

async fn upload(State(state): State<Arc<AppState>>, body: Bytes) -> Result<Response, ApiError> {
    let d = state.insert(body, true).await?;
    Ok(Json(d.summary()).into_response())
}

async fn curve(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Response, ApiError> {
    Ok(json_body(state.get(&id).await?.curve_body.clone()))
}

#[derive(Deserialize)]
struct SimplifyRequest {
    epsilon: f64,
}

async fn simplify(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Response, ApiError> {
    let d = state.get(&id).await?;
    let req: SimplifyRequest =
        serde_json::from_slice(&body).map_err(|e| ApiError::bad_request(format!("bad simplify request: {e}")))?;
    Ok(json_body(state.simplified(&d, req.epsilon).await?.body.clone()))
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct FieldQuery {
    epsilon: Option<f64>,
    z: Option<usize>,
    max_dim: Option<usize>,
}

async fn field(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    Query(q): Query<FieldQuery>,
) -> Result<Response, ApiError> {
    let d = state.get(&id).await?;
    let (z, max_dim) = (q.z.unwrap_or(0), q.max_dim.unwrap_or(256));
    let slice = match q.epsilon {
        None => d.slice(d.field.values(), z, max_dim)?,
        Some(e) => {
            let s = state.simplified(&d, e).await?;
            d.slice(s.field.values(), z, max_dim)?
        }
    };
    Ok(Json(slice).into_response())
}

#[derive(Deserialize)]
struct EpsilonQuery {
    epsilon: Option<f64>,
}

async fn critical_points(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    Query(q): Query<EpsilonQuery>,
) -> Result<Response, ApiError> {
    let d = state.get(&id).await?;
    match q.epsilon {
        None => Ok(json_body(d.critical_body.clone())),
        Some(e) => Ok(json_body(state.simplified(&d, e).await?.critical_body.clone())),
    }
}
