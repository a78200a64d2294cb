//! HTTP endpoint over a loaded store.
//!
//! `POST /graphql` takes `{"query": "..."}` and returns the response
//! document; `GET /healthz` answers `ok`. Each request runs on the blocking
//! pool against the shared, read-only store.

use std::sync::Arc;
use std::time::{Duration, Instant};

use axum::body::Bytes;
use axum::extract::State;
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use rdfgql::engine::EngineConfig;
use rdfgql::{QueryFailure, Store};
use serde_json::json;

pub struct AppState {
    pub store: Store,
    /// Per-request execution budget.
    pub timeout: Option<Duration>,
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/graphql", post(graphql))
        .route("/healthz", get(|| async { "ok" }))
        .with_state(state)
}

/// Serves until the listener fails.
pub async fn serve(listener: tokio::net::TcpListener, state: Arc<AppState>) -> std::io::Result<()> {
    axum::serve(listener, router(state)).await
}

fn json_response(status: StatusCode, body: String) -> Response {
    (status, [(header::CONTENT_TYPE, "application/json")], body).into_response()
}

fn errors_body(messages: &[String], with_data: bool) -> String {
    let errors: Vec<_> = messages.iter().map(|m| json!({ "message": m })).collect();
    if with_data {
        json!({ "data": null, "errors": errors }).to_string()
    } else {
        json!({ "errors": errors }).to_string()
    }
}

async fn graphql(State(state): State<Arc<AppState>>, body: Bytes) -> Response {
    let query = match serde_json::from_slice::<serde_json::Value>(&body) {
        Ok(serde_json::Value::Object(obj)) => match obj.get("query") {
            Some(serde_json::Value::String(q)) => q.clone(),
            _ => {
                let msg = "request body must have a string field \"query\"".to_owned();
                return json_response(StatusCode::BAD_REQUEST, errors_body(&[msg], false));
            }
        },
        Ok(_) => {
            let msg = "request body must be a JSON object".to_owned();
            return json_response(StatusCode::BAD_REQUEST, errors_body(&[msg], false));
        }
        Err(e) => {
            let msg = format!("malformed JSON body: {e}");
            return json_response(StatusCode::BAD_REQUEST, errors_body(&[msg], false));
        }
    };
    let task = tokio::task::spawn_blocking(move || {
        let cfg = EngineConfig {
            deadline: state.timeout.map(|t| Instant::now() + t),
            fault: None,
        };
        state.store.execute(&query, &cfg)
    });
    match task.await {
        Ok(Ok(exec)) => json_response(StatusCode::OK, exec.response.serialize()),
        Ok(Err(failure @ (QueryFailure::Syntax(_) | QueryFailure::Invalid(_)))) => json_response(
            StatusCode::BAD_REQUEST,
            errors_body(&failure.messages(), false),
        ),
        Ok(Err(failure)) => json_response(StatusCode::OK, errors_body(&failure.messages(), true)),
        Err(e) => json_response(
            StatusCode::INTERNAL_SERVER_ERROR,
            errors_body(&[format!("request failed: {e}")], true),
        ),
    }
}
