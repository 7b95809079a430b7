//! HTTP endpoints: health, scoring, and the fixture listing catalog.

use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use axum::body::Bytes;
use axum::extract::{Path as UrlPath, State};
use axum::http::{header, HeaderValue, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use listingqa_core::datapipe::Listing;
use listingqa_core::ranker::Model;
use listingqa_core::textproc::split_sentences;
use serde::{Deserialize, Serialize};
use serde_json::json;
use tower_http::cors::{AllowOrigin, CorsLayer};

use crate::error::{Error, Result};
use crate::jsonl::read_listings;
use crate::scoring::{score_request, RequestError, ScoreRequest};

/// Listing as served to clients, with the description pre-split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ListingView {
    pub listing_id: String,
    pub title: String,
    pub sentences: Vec<String>,
}

impl From<&Listing> for ListingView {
    fn from(l: &Listing) -> Self {
        Self { listing_id: l.listing_id.clone(), title: l.title.clone(), sentences: split_sentences(&l.description) }
    }
}

#[derive(Debug, Default)]
pub struct Catalog {
    listings: BTreeMap<String, ListingView>,
}

impl Catalog {
    pub fn from_listings(listings: &[Listing]) -> Result<Self> {
        let mut map = BTreeMap::new();
        for l in listings {
            if map.insert(l.listing_id.clone(), ListingView::from(l)).is_some() {
                return Err(Error::Config(format!("duplicate listing id {}", l.listing_id)));
            }
        }
        Ok(Self { listings: map })
    }

    /// Every `*.jsonl` file in `dir`, read in file-name order.
    pub fn load_dir(dir: &Path) -> Result<Self> {
        let mut files: Vec<_> = std::fs::read_dir(dir)
            .map_err(|e| Error::io(dir, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
            .collect();
        files.sort();
        let mut all = Vec::new();
        for f in files {
            all.extend(read_listings(&f)?);
        }
        Self::from_listings(&all)
    }

    pub fn len(&self) -> usize {
        self.listings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.listings.is_empty()
    }
}

#[derive(Clone)]
pub struct AppState {
    pub model: Arc<Model>,
    pub catalog: Arc<Catalog>,
}

fn error(status: StatusCode, message: impl Into<String>) -> Response {
    (status, Json(json!({ "error": message.into() }))).into_response()
}

async fn health(State(state): State<AppState>) -> Response {
    Json(json!({ "status": "ok", "model_variant": state.model.config.variant_name() })).into_response()
}

async fn score(State(state): State<AppState>, body: Bytes) -> Response {
    let start = Instant::now();
    let value: serde_json::Value = match serde_json::from_slice(&body) {
        Ok(v) => v,
        Err(e) => return error(StatusCode::BAD_REQUEST, format!("malformed JSON body: {e}")),
    };
    if !value.is_object() {
        return error(StatusCode::BAD_REQUEST, "request body must be a JSON object");
    }
    let request: ScoreRequest = match serde_json::from_value(value) {
        Ok(r) => r,
        Err(e) => return error(StatusCode::UNPROCESSABLE_ENTITY, format!("invalid request: {e}")),
    };
    match score_request(&state.model, &request) {
        Ok(mut response) => {
            response.latency_ms = start.elapsed().as_secs_f64() * 1e3;
            Json(response).into_response()
        }
        Err(RequestError::Invalid(m)) => error(StatusCode::UNPROCESSABLE_ENTITY, m),
        Err(RequestError::Model(m)) => error(StatusCode::INTERNAL_SERVER_ERROR, m),
    }
}

async fn list_listings(State(state): State<AppState>) -> Response {
    let all: Vec<&ListingView> = state.catalog.listings.values().collect();
    Json(all).into_response()
}

async fn get_listing(State(state): State<AppState>, UrlPath(id): UrlPath<String>) -> Response {
    match state.catalog.listings.get(&id) {
        Some(l) => Json(l).into_response(),
        None => error(StatusCode::NOT_FOUND, format!("no listing with id {id:?}")),
    }
}

/// Build the application. `cors_origin` of `*` allows any origin.
pub fn router(state: AppState, cors_origin: Option<&str>) -> Result<Router> {
    let mut app = Router::new()
        .route("/v1/health", get(health))
        .route("/v1/score", post(score))
        .route("/v1/listings", get(list_listings))
        .route("/v1/listings/{id}", get(get_listing))
        .with_state(state);
    if let Some(origin) = cors_origin {
        let allow = if origin == "*" {
            AllowOrigin::any()
        } else {
            let value = HeaderValue::from_str(origin).map_err(|_| Error::Config(format!("bad CORS origin {origin:?}")))?;
            AllowOrigin::exact(value)
        };
        app = app.layer(
            CorsLayer::new()
                .allow_origin(allow)
                .allow_methods([Method::GET, Method::POST])
                .allow_headers([header::CONTENT_TYPE]),
        );
    }
    Ok(app)
}

async fn shutdown_signal() {
    let _ = tokio::signal::ctrl_c().await;
}

/// Serve until Ctrl-C, letting in-flight requests finish.
pub async fn serve(addr: SocketAddr, app: Router) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on {}", listener.local_addr()?);
    axum::serve(listener, app).with_graceful_shutdown(shutdown_signal()).await
}
