//! HTTP service used by the editor: parse, complete, hover, model and
//! lexicon management, and corpus statistics.

use std::path::PathBuf;
use std::sync::{Arc, RwLock};

use axum::body::Bytes;
use axum::extract::State;
use axum::http::{HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use rimay_core::analytics::{self, build_report, summarize, AnalyticsError, ZTestInput, DEFAULT_ALPHA};
use rimay_core::assist::{self, CompletionRequest};
use rimay_core::lexicon::{lexicon_from_document, LexiconDocument};
use rimay_core::model::{DeclDetail, DeclKind, ModelError, SymbolTable};
use rimay_core::parser::{parse_document, parse_requirement, ParserContext, RecordSummary};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tokio::sync::Mutex;
use tower_http::cors::{Any, CorsLayer};

use crate::persist::write_atomic;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCode {
    BadRequest,
    NotFound,
    Conflict,
    Internal,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ApiError {
    pub code: ErrorCode,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub details: Option<Value>,
}

impl ApiError {
    fn new(code: ErrorCode, message: impl Into<String>) -> Self {
        ApiError { code, message: message.into(), details: None }
    }

    fn bad_request(message: impl Into<String>) -> Self {
        Self::new(ErrorCode::BadRequest, message)
    }

    fn internal(message: impl Into<String>) -> Self {
        Self::new(ErrorCode::Internal, message)
    }

    fn with_details(mut self, details: Value) -> Self {
        self.details = Some(details);
        self
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = match self.code {
            // Model conflicts come from client input, so they are 400s too.
            ErrorCode::BadRequest | ErrorCode::Conflict => StatusCode::BAD_REQUEST,
            ErrorCode::NotFound => StatusCode::NOT_FOUND,
            ErrorCode::Internal => StatusCode::INTERNAL_SERVER_ERROR,
        };
        (status, Json(self)).into_response()
    }
}

impl From<ModelError> for ApiError {
    fn from(e: ModelError) -> Self {
        let message = e.to_string();
        match e {
            ModelError::UnresolvedClass { instance, class } => ApiError::new(ErrorCode::Conflict, message)
                .with_details(json!({ "instance": instance, "class": class })),
            ModelError::Conflict { name, existing } => ApiError::new(ErrorCode::Conflict, message)
                .with_details(json!({ "name": name, "existing": existing })),
            ModelError::Invalid(_) | ModelError::Format(_) => ApiError::bad_request(message),
        }
    }
}

impl From<AnalyticsError> for ApiError {
    fn from(e: AnalyticsError) -> Self {
        let err = ApiError::bad_request(e.to_string());
        match e {
            AnalyticsError::IncompleteAnnotation(ids) => err.with_details(json!({ "ids": ids })),
            _ => err,
        }
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

fn body<T: DeserializeOwned>(bytes: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(bytes).map_err(|e| ApiError::bad_request(format!("invalid request body: {e}")))
}

/// Shared state: readers clone the current context snapshot; writers hold
/// `write_lock` for the whole read-modify-persist-swap sequence.
pub struct AppState {
    ctx: RwLock<ParserContext>,
    write_lock: Mutex<()>,
    model_path: Option<PathBuf>,
    lexicon_path: Option<PathBuf>,
}

impl AppState {
    pub fn new(ctx: ParserContext, model_path: Option<PathBuf>, lexicon_path: Option<PathBuf>) -> Self {
        AppState { ctx: RwLock::new(ctx), write_lock: Mutex::new(()), model_path, lexicon_path }
    }

    pub fn snapshot(&self) -> ParserContext {
        self.ctx.read().expect("context lock poisoned").clone()
    }

    fn swap(&self, ctx: ParserContext) {
        *self.ctx.write().expect("context lock poisoned") = ctx;
    }
}

pub fn router(state: Arc<AppState>, cors_origin: Option<&str>) -> Router {
    let mut app = Router::new()
        .route("/health", get(health))
        .route("/parse", post(parse))
        .route("/parse-document", post(parse_doc))
        .route("/complete", post(complete))
        .route("/hover", post(hover))
        .route("/lexicon", get(get_lexicon))
        .route("/lexicon/merge", post(merge_lexicon))
        .route("/model", get(get_model))
        .route("/model/declare", post(declare))
        .route("/stats/report", post(stats_report))
        .route("/stats/ztest", post(stats_ztest))
        .fallback(|| async { ApiError::new(ErrorCode::NotFound, "no such endpoint") })
        .with_state(state);
    if let Some(origin) = cors_origin {
        let cors = match origin {
            "*" => CorsLayer::new().allow_origin(Any),
            o => CorsLayer::new().allow_origin(HeaderValue::from_str(o).unwrap_or(HeaderValue::from_static("null"))),
        };
        app = app.layer(cors.allow_methods(Any).allow_headers(Any));
    }
    app
}

async fn health() -> Json<Value> {
    Json(json!({ "status": "ok" }))
}

#[derive(Deserialize)]
struct TextRequest {
    text: String,
    #[serde(default)]
    max_errors: Option<usize>,
}

async fn parse(State(state): State<Arc<AppState>>, bytes: Bytes) -> ApiResult<Value> {
    let req: TextRequest = body(&bytes)?;
    let mut ctx = state.snapshot();
    if let Some(n) = req.max_errors {
        if n == 0 {
            return Err(ApiError::bad_request("max_errors must be at least 1"));
        }
        ctx.options.max_errors = n;
    }
    let result = parse_requirement(&req.text, &ctx);
    Ok(Json(serde_json::to_value(result).map_err(|e| ApiError::internal(e.to_string()))?))
}

#[derive(Serialize)]
struct DocumentResponse {
    records: Vec<rimay_core::parser::RequirementRecord>,
    summaries: Vec<RecordSummary>,
}

async fn parse_doc(State(state): State<Arc<AppState>>, bytes: Bytes) -> ApiResult<DocumentResponse> {
    let req: TextRequest = body(&bytes)?;
    let ctx = state.snapshot();
    let records = parse_document(&req.text, &ctx).map_err(|e| ApiError::bad_request(e.to_string()))?;
    let summaries = records.iter().map(|r| r.summary(&ctx)).collect();
    Ok(Json(DocumentResponse { records, summaries }))
}

#[derive(Deserialize)]
struct OffsetRequest {
    text: String,
    offset: usize,
}

async fn complete(State(state): State<Arc<AppState>>, bytes: Bytes) -> ApiResult<Value> {
    let req: OffsetRequest = body(&bytes)?;
    let ctx = state.snapshot();
    let items = assist::complete(&CompletionRequest { text: &req.text, offset: req.offset, ctx: &ctx })
        .map_err(|e| ApiError::bad_request(e.to_string()))?;
    Ok(Json(json!({ "items": items })))
}

async fn hover(State(state): State<Arc<AppState>>, bytes: Bytes) -> ApiResult<Value> {
    let req: OffsetRequest = body(&bytes)?;
    if req.offset > req.text.len() {
        return Err(ApiError::bad_request(format!("offset {} is past the end of the text", req.offset)));
    }
    let ctx = state.snapshot();
    Ok(Json(json!({ "contents": assist::hover(&req.text, req.offset, &ctx) })))
}

async fn get_lexicon(State(state): State<Arc<AppState>>) -> Json<LexiconDocument> {
    Json(state.snapshot().lexicon.to_document())
}

async fn merge_lexicon(State(state): State<Arc<AppState>>, bytes: Bytes) -> ApiResult<Value> {
    let doc: LexiconDocument = body(&bytes)?;
    let overlay = lexicon_from_document(&doc).map_err(|e| ApiError::bad_request(e.to_string()))?;
    let _guard = state.write_lock.lock().await;
    let current = state.snapshot();
    let merged = current.lexicon.merge(&overlay);
    if let Some(path) = &state.lexicon_path {
        let text = serde_json::to_string_pretty(&merged.to_document()).map_err(|e| ApiError::internal(e.to_string()))?;
        write_atomic(path, text.as_bytes()).map_err(|e| ApiError::internal(e.to_string()))?;
    }
    let codes = merged.len();
    state.swap(ParserContext { lexicon: Arc::new(merged), ..current });
    Ok(Json(json!({ "codes": codes })))
}

async fn get_model(State(state): State<Arc<AppState>>) -> Json<SymbolTable> {
    Json((*state.snapshot().symbols).clone())
}

#[derive(Deserialize)]
struct DeclareRequest {
    kind: DeclKind,
    name: String,
    #[serde(default)]
    detail: Option<DeclDetail>,
}

async fn declare(State(state): State<Arc<AppState>>, bytes: Bytes) -> ApiResult<SymbolTable> {
    let req: DeclareRequest = body(&bytes)?;
    let _guard = state.write_lock.lock().await;
    let current = state.snapshot();
    let next = current.symbols.declare(req.kind, &req.name, req.detail.as_ref())?;
    if next != *current.symbols {
        if let Some(path) = &state.model_path {
            write_atomic(path, next.export_model().as_bytes()).map_err(|e| ApiError::internal(e.to_string()))?;
        }
        state.swap(ParserContext { symbols: Arc::new(next.clone()), ..current });
    }
    Ok(Json(next))
}

#[derive(Deserialize)]
struct ReportDocument {
    srs_id: String,
    records: Vec<RecordSummary>,
}

#[derive(Deserialize)]
struct ReportRequest {
    documents: Vec<ReportDocument>,
    #[serde(default)]
    alpha: Option<f64>,
}

async fn stats_report(bytes: Bytes) -> ApiResult<analytics::StatsSummary> {
    let req: ReportRequest = body(&bytes)?;
    let reports = req
        .documents
        .iter()
        .map(|d| build_report(&d.records, &d.srs_id))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Json(summarize(reports, req.alpha.unwrap_or(DEFAULT_ALPHA))?))
}

#[derive(Deserialize)]
struct ZTestRequest {
    #[serde(flatten)]
    input: ZTestInput,
    #[serde(default)]
    alpha: Option<f64>,
}

async fn stats_ztest(bytes: Bytes) -> ApiResult<analytics::ZTestResult> {
    let req: ZTestRequest = body(&bytes)?;
    Ok(Json(analytics::ztest(req.input, req.alpha.unwrap_or(DEFAULT_ALPHA))?))
}
