use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::Router;
use geno_core::store::{parse_project, Intent};
use serde::Serialize;
use tower_http::cors::CorsLayer;

use crate::engine::{decode, Engine};
use crate::wire::{AnswerRequest, ApiError, Envelope, ErrorCode, ParseRequest};

pub const REQUEST_ID_HEADER: &str = "x-request-id";

type Shared = State<Arc<Engine>>;

fn request_id(headers: &HeaderMap) -> String {
    headers
        .get(REQUEST_ID_HEADER)
        .and_then(|v| v.to_str().ok())
        .map(str::to_string)
        .unwrap_or_else(|| uuid::Uuid::new_v4().to_string())
}

fn envelope<T: Serialize>(headers: &HeaderMap, result: Result<T, ApiError>) -> Response {
    let request_id = request_id(headers);
    let (status, body) = match result {
        Ok(payload) => (
            StatusCode::OK,
            Envelope {
                request_id,
                payload: Some(payload),
                error: None,
            },
        ),
        Err(e) => (
            StatusCode::from_u16(e.code.status()).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR),
            Envelope {
                request_id,
                payload: None,
                error: Some(e),
            },
        ),
    };
    let json = serde_json::to_string(&body).expect("envelope serializes");
    (status, [(header::CONTENT_TYPE, "application/json")], json).into_response()
}

fn file<T: Into<axum::body::Body>>(content_type: &'static str, body: T) -> Response {
    ([(header::CONTENT_TYPE, content_type)], body.into()).into_response()
}

/// Runs blocking engine work off the async executor.
async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T, ApiError> + Send + 'static) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .unwrap_or_else(|e| Err(ApiError::new(ErrorCode::Internal, e.to_string())))
}

async fn health(State(engine): Shared, headers: HeaderMap) -> Response {
    envelope(&headers, Ok(engine.health()))
}

async fn train(State(engine): Shared, headers: HeaderMap, body: Bytes) -> Response {
    let result = blocking(move || {
        let project = if body.iter().all(u8::is_ascii_whitespace) {
            None
        } else {
            let text =
                std::str::from_utf8(&body).map_err(|e| ApiError::new(ErrorCode::MalformedRequest, e.to_string()))?;
            Some(parse_project(text, std::path::Path::new("request body"))?)
        };
        engine.train(project)
    })
    .await;
    envelope(&headers, result)
}

async fn parse(State(engine): Shared, headers: HeaderMap, body: Bytes) -> Response {
    let result = decode::<ParseRequest>(&body).and_then(|req| engine.parse(&req));
    envelope(&headers, result)
}

async fn answer(State(engine): Shared, Path(id): Path<String>, headers: HeaderMap, body: Bytes) -> Response {
    let result = decode::<AnswerRequest>(&body).and_then(|req| engine.answer(&id, &req));
    envelope(&headers, result)
}

async fn list_intents(State(engine): Shared, headers: HeaderMap) -> Response {
    envelope(&headers, Ok(engine.intents()))
}

async fn put_intent(State(engine): Shared, Path(name): Path<String>, headers: HeaderMap, body: Bytes) -> Response {
    let result = decode::<Intent>(&body).and_then(|intent| engine.put_intent(&name, intent));
    envelope(&headers, result)
}

async fn delete_intent(State(engine): Shared, Path(name): Path<String>, headers: HeaderMap) -> Response {
    envelope(&headers, engine.delete_intent(&name))
}

async fn record_start(State(engine): Shared, headers: HeaderMap) -> Response {
    envelope(&headers, Ok(engine.start_recording()))
}

async fn record_event(State(engine): Shared, Path(id): Path<String>, headers: HeaderMap, body: Bytes) -> Response {
    let result = decode(&body).and_then(|event| engine.record_event(&id, &event));
    envelope(&headers, result)
}

async fn record_stop(State(engine): Shared, Path(id): Path<String>, headers: HeaderMap) -> Response {
    envelope(&headers, engine.stop_recording(&id))
}

async fn shim(State(engine): Shared) -> Response {
    file("application/javascript", engine.shim_js())
}

async fn project_file(State(engine): Shared) -> Response {
    file("application/json", engine.project_json())
}

async fn model_file(State(engine): Shared, headers: HeaderMap) -> Response {
    match engine.model_bytes() {
        Ok(bytes) => file("application/json", bytes),
        Err(e) => envelope::<()>(&headers, Err(e)),
    }
}

async fn not_found(headers: HeaderMap) -> Response {
    envelope::<()>(&headers, Err(ApiError::new(ErrorCode::NotFound, "no such endpoint")))
}

pub fn router(engine: Arc<Engine>) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/train", post(train))
        .route("/parse", post(parse))
        .route("/session/{id}/answer", post(answer))
        .route("/intents", get(list_intents))
        .route("/intents/{name}", put(put_intent).delete(delete_intent))
        .route("/record/start", post(record_start))
        .route("/record/{id}/event", post(record_event))
        .route("/record/{id}/stop", post(record_stop))
        .route("/geno.js", get(shim))
        .route("/geno.json", get(project_file))
        .route("/geno.model", get(model_file))
        .fallback(not_found)
        .layer(CorsLayer::permissive())
        .with_state(engine)
}

/// Serves until the listener fails.
pub async fn serve(listener: tokio::net::TcpListener, engine: Arc<Engine>) -> std::io::Result<()> {
    axum::serve(listener, router(engine)).await
}
