use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use misinfo_core::annotation::{Annotation, Phase};
use serde_json::json;

use crate::error::ServiceError;
use crate::service::{AnnotationService, ExportFormat};

type Params = Query<HashMap<String, String>>;
type Shared = State<Arc<AnnotationService>>;

pub struct ApiError(ServiceError);

impl From<ServiceError> for ApiError {
    fn from(e: ServiceError) -> Self {
        ApiError(e)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = match &self.0 {
            ServiceError::UnknownAnnotator(_) => StatusCode::NOT_FOUND,
            ServiceError::Invalid(_) => StatusCode::UNPROCESSABLE_ENTITY,
            ServiceError::Duplicate { .. } | ServiceError::NotAssigned { .. } => StatusCode::CONFLICT,
            ServiceError::Storage(_) => StatusCode::INTERNAL_SERVER_ERROR,
        };
        if status.is_server_error() {
            tracing::error!(error = %self.0, "request failed");
        }
        (status, Json(json!({ "error": self.0.to_string() }))).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

fn param<'a>(q: &'a HashMap<String, String>, key: &str) -> ApiResult<&'a str> {
    q.get(key)
        .map(String::as_str)
        .ok_or_else(|| ServiceError::Invalid(format!("missing query parameter {key:?}")).into())
}

fn phase(q: &HashMap<String, String>) -> ApiResult<Phase> {
    param(q, "phase")?
        .parse()
        .map_err(|e: misinfo_core::Error| ServiceError::Invalid(e.to_string()).into())
}

pub fn router(service: Arc<AnnotationService>) -> Router {
    Router::new()
        .route("/api/tasks/next", get(next_task))
        .route("/api/annotations", post(submit))
        .route("/api/progress", get(progress))
        .route("/api/agreement", get(agreement))
        .route("/api/export", get(export))
        .route("/api/gold", get(gold))
        .with_state(service)
}

async fn next_task(State(svc): Shared, Query(q): Params) -> ApiResult<Response> {
    let annotator = param(&q, "annotator")?;
    let phase = phase(&q)?;
    Ok(match svc.next_task(annotator, phase)? {
        Some(task) => Json(task).into_response(),
        None => StatusCode::NO_CONTENT.into_response(),
    })
}

async fn submit(State(svc): Shared, body: Bytes) -> ApiResult<Response> {
    let annotation: Annotation =
        serde_json::from_slice(&body).map_err(|e| ServiceError::Invalid(format!("malformed annotation: {e}")))?;
    svc.submit(&annotation)?;
    Ok((
        StatusCode::CREATED,
        Json(json!({
            "tweet_id": annotation.tweet_id(),
            "annotator_id": annotation.annotator_id(),
            "phase": annotation.phase(),
        })),
    )
        .into_response())
}

async fn progress(State(svc): Shared, Query(q): Params) -> ApiResult<Response> {
    Ok(Json(svc.progress(phase(&q)?)?).into_response())
}

async fn agreement(State(svc): Shared, Query(q): Params) -> ApiResult<Response> {
    let phase = phase(&q)?;
    let pair = match q.get("annotators") {
        Some(list) => match list.split(',').collect::<Vec<_>>().as_slice() {
            [a, b] => Some((*a, *b)),
            _ => return Err(ServiceError::Invalid("annotators must name exactly two ids".into()).into()),
        },
        None => None,
    };
    Ok(Json(svc.agreement(phase, pair)?).into_response())
}

async fn export(State(svc): Shared, Query(q): Params) -> ApiResult<Response> {
    let phase = phase(&q)?;
    let format: ExportFormat = q.get("format").map(String::as_str).unwrap_or("csv").parse()?;
    let body = svc.export(phase, format, q.get("annotator").map(String::as_str))?;
    let content_type = match format {
        ExportFormat::Csv => "text/csv; charset=utf-8",
        ExportFormat::Jsonl => "application/x-ndjson",
    };
    Ok(([(header::CONTENT_TYPE, content_type)], body).into_response())
}

async fn gold(State(svc): Shared, Query(q): Params) -> ApiResult<Response> {
    match q.get("format").map(String::as_str).unwrap_or("json") {
        "json" => Ok(Json(svc.gold()?).into_response()),
        "csv" => Ok(([(header::CONTENT_TYPE, "text/csv; charset=utf-8")], svc.gold_csv()?).into_response()),
        other => Err(ServiceError::Invalid(format!("unknown gold format {other:?}")).into()),
    }
}

/// Serves the API until Ctrl-C.
pub async fn serve(service: Arc<AnnotationService>, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!(addr = %listener.local_addr()?, "annotation service listening");
    axum::serve(listener, router(service))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
