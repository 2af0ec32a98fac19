//! HTTP front end for live sessions.

use std::convert::Infallible;
use std::net::SocketAddr;
use std::sync::Arc;
use std::time::Duration;

use axum::extract::{Path, State};
use axum::http::{HeaderValue, StatusCode};
use axum::response::sse::{Event, KeepAlive, Sse};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use futures::stream::Stream;
use serde::Deserialize;
use serde_json::{json, Value};
use tokio::sync::broadcast;
use tokio_stream::wrappers::BroadcastStream;
use tokio_stream::StreamExt;
use tower_http::cors::{AllowOrigin, Any, CorsLayer};

use coadapt_core::session::{CreateRequest, SessionError, SessionStore, StepResult};

#[derive(Clone)]
pub struct AppState {
    pub store: Arc<SessionStore>,
    events: broadcast::Sender<(String, StepResult)>,
}

impl AppState {
    pub fn new(store: SessionStore) -> Self {
        let (events, _) = broadcast::channel(256);
        AppState { store: Arc::new(store), events }
    }
}

pub struct ApiError(StatusCode, String);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(json!({ "error": self.1 }))).into_response()
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        let code = match &e {
            SessionError::NotFound(_) => StatusCode::NOT_FOUND,
            SessionError::Finished(_) => StatusCode::CONFLICT,
            SessionError::IllegalAction { .. } => StatusCode::BAD_REQUEST,
            SessionError::Core(c) if c.is_config_error() => StatusCode::BAD_REQUEST,
            SessionError::Core(_) => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError(code, e.to_string())
    }
}

fn bad_request(msg: impl ToString) -> ApiError {
    ApiError(StatusCode::BAD_REQUEST, msg.to_string())
}

async fn blocking<T: Send + 'static>(
    f: impl FnOnce() -> Result<T, SessionError> + Send + 'static,
) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?
        .map_err(ApiError::from)
}

async fn create(State(app): State<AppState>, Json(body): Json<Value>) -> Result<Response, ApiError> {
    let req: CreateRequest = serde_json::from_value(body).map_err(bad_request)?;
    let store = app.store.clone();
    let state = blocking(move || store.create(&req)).await?;
    Ok((StatusCode::CREATED, Json(state)).into_response())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ActRequest {
    #[serde(rename = "aH")]
    a_h: usize,
}

async fn act(
    State(app): State<AppState>,
    Path(id): Path<String>,
    Json(body): Json<Value>,
) -> Result<Response, ApiError> {
    let req: ActRequest = serde_json::from_value(body).map_err(bad_request)?;
    let store = app.store.clone();
    let sid = id.clone();
    let result = blocking(move || store.submit(&sid, req.a_h)).await?;
    // nobody listening is fine
    let _ = app.events.send((id, result.clone()));
    Ok(Json(result).into_response())
}

async fn trace(State(app): State<AppState>, Path(id): Path<String>) -> Result<Response, ApiError> {
    Ok(Json(app.store.trace(&id)?).into_response())
}

async fn state(State(app): State<AppState>, Path(id): Path<String>) -> Result<Response, ApiError> {
    Ok(Json(app.store.state(&id)?).into_response())
}

async fn events(
    State(app): State<AppState>,
    Path(id): Path<String>,
) -> Result<Sse<impl Stream<Item = Result<Event, Infallible>>>, ApiError> {
    app.store.get(&id)?;
    let stream = BroadcastStream::new(app.events.subscribe()).filter_map(move |msg| match msg {
        Ok((sid, step)) if sid == id => {
            Some(Ok(Event::default().event("step").json_data(step).expect("step serializes")))
        }
        _ => None,
    });
    Ok(Sse::new(stream).keep_alive(KeepAlive::default()))
}

/// Routes plus CORS. `origin` restricts cross-origin access to one web
/// client origin; `None` allows any.
pub fn router(app: AppState, origin: Option<&str>) -> anyhow::Result<Router> {
    let cors = CorsLayer::new().allow_methods(Any).allow_headers(Any);
    let cors = match origin {
        Some(o) => cors.allow_origin(AllowOrigin::exact(HeaderValue::from_str(o)?)),
        None => cors.allow_origin(Any),
    };
    Ok(Router::new()
        .route("/sessions", post(create))
        .route("/sessions/{id}/act", post(act))
        .route("/sessions/{id}/trace", get(trace))
        .route("/sessions/{id}/state", get(state))
        .route("/sessions/{id}/events", get(events))
        .layer(cors)
        .with_state(app))
}

pub async fn serve(addr: SocketAddr, origin: Option<String>) -> anyhow::Result<()> {
    let app = AppState::new(SessionStore::new());
    let store = app.store.clone();
    tokio::spawn(async move {
        let mut tick = tokio::time::interval(Duration::from_secs(60));
        loop {
            tick.tick().await;
            store.sweep();
        }
    });
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(app, origin.as_deref())?).await?;
    Ok(())
}
