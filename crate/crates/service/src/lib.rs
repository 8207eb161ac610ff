//! HTTP JSON API over the aggregation engine.
//!
//! Datasets live in memory behind a read-write lock and are immutable once
//! registered; every request works on an `Arc` snapshot. When a data
//! directory is configured, registered datasets are also written there as
//! JSON table documents and reloaded at startup.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use axum::body::Bytes;
use axum::extract::{Path as UrlPath, Query, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use crossset_core::api::{self, to_json_bytes};
use crossset_core::io::{read_table, write_aggregate, write_table, AggregateFormat, TableFormat, TableFormatSpec};
use crossset_core::{Error as CoreError, SetPairTable};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use tokio::sync::RwLock;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct UniverseSummary {
    pub name: String,
    pub elements: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DatasetHandle {
    pub id: String,
    pub name: String,
    pub n: usize,
    pub universe_a: UniverseSummary,
    pub universe_b: UniverseSummary,
    /// Seconds since the Unix epoch.
    pub created_at: u64,
}

struct Dataset {
    handle: DatasetHandle,
    table: SetPairTable,
}

#[derive(Default)]
pub struct AppState {
    datasets: RwLock<HashMap<String, Arc<Dataset>>>,
    data_dir: Option<PathBuf>,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct StoredDataset {
    name: String,
    created_at: u64,
    table: serde_json::Value,
}

fn summary(u: &crossset_core::ElementUniverse) -> UniverseSummary {
    UniverseSummary {
        name: u.name().to_string(),
        elements: u.elements().to_vec(),
    }
}

/// Content-derived id: equal tables get equal ids.
fn dataset_id(table_json: &[u8]) -> String {
    hex::encode(&Sha256::digest(table_json)[..8])
}

impl AppState {
    pub fn new() -> Self {
        AppState::default()
    }

    /// State persisting to `dir`; datasets already stored there are loaded.
    pub async fn with_data_dir(dir: impl Into<PathBuf>) -> std::io::Result<Self> {
        let dir = dir.into();
        tokio::fs::create_dir_all(&dir).await?;
        let state = AppState {
            datasets: RwLock::default(),
            data_dir: Some(dir.clone()),
        };
        let mut entries = tokio::fs::read_dir(&dir).await?;
        let mut loaded = HashMap::new();
        while let Some(entry) = entries.next_entry().await? {
            let path = entry.path();
            if path.extension().is_some_and(|e| e == "json") {
                match load_stored(&path).await {
                    Ok(ds) => {
                        loaded.insert(ds.handle.id.clone(), Arc::new(ds));
                    }
                    Err(e) => tracing::warn!("skipping {}: {e}", path.display()),
                }
            }
        }
        *state.datasets.write().await = loaded;
        Ok(state)
    }

    /// Registers `table`, replacing any dataset with the same content.
    pub async fn register(&self, name: String, table: SetPairTable) -> Result<DatasetHandle, ApiError> {
        let bytes = write_table(&table, TableFormat::Json, &TableFormatSpec::default())?;
        let id = dataset_id(&bytes);
        let created_at = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
        let handle = DatasetHandle {
            id: id.clone(),
            name,
            n: table.len(),
            universe_a: summary(table.universe_a()),
            universe_b: summary(table.universe_b()),
            created_at,
        };
        if let Some(dir) = &self.data_dir {
            let stored = StoredDataset {
                name: handle.name.clone(),
                created_at,
                table: serde_json::from_slice(&bytes).expect("table JSON"),
            };
            let tmp = dir.join(format!("{id}.json.tmp"));
            tokio::fs::write(&tmp, serde_json::to_vec(&stored).expect("serializable"))
                .await
                .map_err(ApiError::internal)?;
            tokio::fs::rename(&tmp, dir.join(format!("{id}.json")))
                .await
                .map_err(ApiError::internal)?;
        }
        let dataset = Arc::new(Dataset {
            handle: handle.clone(),
            table,
        });
        self.datasets.write().await.insert(id, dataset);
        Ok(handle)
    }

    async fn get(&self, id: &str) -> Result<Arc<Dataset>, ApiError> {
        self.datasets
            .read()
            .await
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, "NotFound", format!("no dataset with id {id:?}")))
    }

    pub async fn list(&self) -> Vec<DatasetHandle> {
        let mut handles: Vec<_> = self.datasets.read().await.values().map(|d| d.handle.clone()).collect();
        handles.sort_by(|a, b| (&a.name, &a.id).cmp(&(&b.name, &b.id)));
        handles
    }
}

async fn load_stored(path: &Path) -> Result<Dataset, String> {
    let bytes = tokio::fs::read(path).await.map_err(|e| e.to_string())?;
    let stored: StoredDataset = serde_json::from_slice(&bytes).map_err(|e| e.to_string())?;
    let table_bytes = serde_json::to_vec(&stored.table).map_err(|e| e.to_string())?;
    let table = read_table(&table_bytes, &TableFormatSpec::default()).map_err(|e| e.to_string())?;
    let canonical = write_table(&table, TableFormat::Json, &TableFormatSpec::default()).map_err(|e| e.to_string())?;
    Ok(Dataset {
        handle: DatasetHandle {
            id: dataset_id(&canonical),
            name: stored.name,
            n: table.len(),
            universe_a: summary(table.universe_a()),
            universe_b: summary(table.universe_b()),
            created_at: stored.created_at,
        },
        table,
    })
}

/// Error response: `{"error": {"code": .., "message": ..}}`.
#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: String,
    pub message: String,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            code: code.to_string(),
            message: message.into(),
        }
    }

    fn internal(err: impl std::fmt::Display) -> Self {
        ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "Internal", err.to_string())
    }
}

impl From<CoreError> for ApiError {
    fn from(err: CoreError) -> Self {
        let status = match err {
            CoreError::Parse { .. } => StatusCode::BAD_REQUEST,
            _ => StatusCode::UNPROCESSABLE_ENTITY,
        };
        ApiError::new(status, err.code(), err.to_string())
    }
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    error: ErrorDetail<'a>,
}

#[derive(Serialize)]
struct ErrorDetail<'a> {
    code: &'a str,
    message: &'a str,
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = to_json_bytes(&ErrorBody {
            error: ErrorDetail {
                code: &self.code,
                message: &self.message,
            },
        });
        (self.status, [(header::CONTENT_TYPE, "application/json")], body).into_response()
    }
}

fn json_response<T: Serialize>(status: StatusCode, value: &T) -> Response {
    (
        status,
        [(header::CONTENT_TYPE, "application/json")],
        to_json_bytes(value),
    )
        .into_response()
}

/// Parses a JSON body; an empty body reads as `{}`.
fn parse_body<T: DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    let text: &[u8] = if body.iter().all(u8::is_ascii_whitespace) {
        b"{}"
    } else {
        body
    };
    serde_json::from_slice(text).map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "MalformedBody", e.to_string()))
}

/// Runs CPU-bound work off the async executor.
async fn compute<T: Send + 'static>(f: impl FnOnce() -> Result<T, CoreError> + Send + 'static) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(ApiError::internal)?
        .map_err(ApiError::from)
}

#[derive(Serialize)]
struct Route {
    method: &'static str,
    path: &'static str,
    body: &'static str,
    response: &'static str,
}

const ROUTES: &[Route] = &[
    Route {
        method: "GET",
        path: "/",
        body: "",
        response: "route catalog",
    },
    Route {
        method: "POST",
        path: "/datasets",
        body: "CSV or JSON table, or {name, format, data}",
        response: "DatasetHandle",
    },
    Route {
        method: "GET",
        path: "/datasets",
        body: "",
        response: "DatasetHandle[]",
    },
    Route {
        method: "GET",
        path: "/datasets/{id}",
        body: "",
        response: "DatasetHandle",
    },
    Route {
        method: "POST",
        path: "/generate",
        body: "{variant, n, seed, rules?, name?}",
        response: "DatasetHandle",
    },
    Route {
        method: "POST",
        path: "/datasets/{id}/aggregate",
        body: "ViewConfig with negateA/B and orderA/B",
        response: "{aggregate, transform?}; text/csv when accepted",
    },
    Route {
        method: "POST",
        path: "/datasets/{id}/detail",
        body: "{eA, eB, config}",
        response: "DetailResult",
    },
    Route {
        method: "POST",
        path: "/datasets/{id}/combinations",
        body: "CellKey with config",
        response: "CombinationList",
    },
    Route {
        method: "POST",
        path: "/datasets/{id}/brush",
        body: "{brush, config}",
        response: "BrushOverlay",
    },
];

async fn catalog() -> Response {
    json_response(StatusCode::OK, &ROUTES)
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct UploadEnvelope {
    #[serde(default)]
    name: Option<String>,
    #[serde(default)]
    format: TableFormatSpec,
    data: String,
}

#[derive(Deserialize)]
struct UploadQuery {
    name: Option<String>,
}

async fn upload(
    State(state): State<Arc<AppState>>,
    Query(query): Query<UploadQuery>,
    body: Bytes,
) -> Result<Response, ApiError> {
    let envelope = serde_json::from_slice::<serde_json::Value>(&body)
        .ok()
        .filter(|v| v.get("data").is_some_and(|d| d.is_string()));
    let (name, spec, data) = match envelope {
        Some(value) => {
            let env: UploadEnvelope = serde_json::from_value(value)
                .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "MalformedBody", e.to_string()))?;
            (env.name, env.format, Bytes::from(env.data))
        }
        None => (query.name, TableFormatSpec::default(), body),
    };
    let table = compute(move || read_table(&data, &spec)).await?;
    let name = name.unwrap_or_else(|| "upload".to_string());
    let handle = state.register(name, table).await?;
    Ok(json_response(StatusCode::CREATED, &handle))
}

async fn list(State(state): State<Arc<AppState>>) -> Response {
    json_response(StatusCode::OK, &state.list().await)
}

async fn show(State(state): State<Arc<AppState>>, UrlPath(id): UrlPath<String>) -> Result<Response, ApiError> {
    Ok(json_response(StatusCode::OK, &state.get(&id).await?.handle))
}

#[derive(Deserialize)]
struct GenerateBody {
    #[serde(flatten)]
    request: api::GenerateRequest,
    #[serde(default)]
    name: Option<String>,
}

async fn generate(State(state): State<Arc<AppState>>, body: Bytes) -> Result<Response, ApiError> {
    let body: GenerateBody = parse_body(&body)?;
    let name = body.name.clone().unwrap_or_else(|| {
        format!(
            "{:?}-n{}-seed{}",
            body.request.variant, body.request.n, body.request.seed
        )
    });
    let request = body.request;
    let table = compute(move || api::generate(&request)).await?;
    let handle = state.register(name, table).await?;
    Ok(json_response(StatusCode::CREATED, &handle))
}

fn wants_csv(headers: &HeaderMap) -> bool {
    headers
        .get(header::ACCEPT)
        .and_then(|v| v.to_str().ok())
        .is_some_and(|v| v.contains("text/csv"))
}

async fn aggregate(
    State(state): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    headers: HeaderMap,
    body: Bytes,
) -> Result<Response, ApiError> {
    let dataset = state.get(&id).await?;
    let request: api::ViewRequest = parse_body(&body)?;
    let response = compute(move || api::view(&dataset.table, &request)).await?;
    if wants_csv(&headers) {
        let csv = write_aggregate(&response.aggregate, AggregateFormat::Csv);
        return Ok((StatusCode::OK, [(header::CONTENT_TYPE, "text/csv")], csv).into_response());
    }
    Ok(json_response(StatusCode::OK, &response))
}

async fn detail(
    State(state): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    body: Bytes,
) -> Result<Response, ApiError> {
    let dataset = state.get(&id).await?;
    let request: api::DetailRequest = parse_body(&body)?;
    let result = compute(move || api::detail(&dataset.table, &request)).await?;
    Ok(json_response(StatusCode::OK, &result))
}

async fn combinations(
    State(state): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    body: Bytes,
) -> Result<Response, ApiError> {
    let dataset = state.get(&id).await?;
    let request: api::CombinationsRequest = parse_body(&body)?;
    let result = compute(move || api::combinations(&dataset.table, &request)).await?;
    Ok(json_response(StatusCode::OK, &result))
}

async fn brush(
    State(state): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    body: Bytes,
) -> Result<Response, ApiError> {
    let dataset = state.get(&id).await?;
    let request: api::BrushRequest = parse_body(&body)?;
    let result = compute(move || api::brush(&dataset.table, &request)).await?;
    Ok(json_response(StatusCode::OK, &result))
}

async fn not_found() -> ApiError {
    ApiError::new(StatusCode::NOT_FOUND, "NotFound", "no such route")
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/", get(catalog))
        .route("/datasets", get(list).post(upload))
        .route("/datasets/{id}", get(show))
        .route("/generate", post(generate))
        .route("/datasets/{id}/aggregate", post(aggregate))
        .route("/datasets/{id}/detail", post(detail))
        .route("/datasets/{id}/combinations", post(combinations))
        .route("/datasets/{id}/brush", post(brush))
        .fallback(not_found)
        .with_state(state)
}

/// Binds `addr` and serves until the process ends.
pub async fn serve(addr: SocketAddr, state: AppState) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(Arc::new(state))).await
}
