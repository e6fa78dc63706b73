//! HTTP job service: submit runs, poll their state, fetch frames and GIFs.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::{Arc, Mutex};

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, FromRequest, Multipart, Path, Request, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use base64::Engine;
use serde::{Deserialize, Serialize};
use tokio::sync::Semaphore;

use crate::autodirect::{suggest_directions, DEFAULT_CORNER_COUNT, DEFAULT_MAX_DIRECTIONS};
use crate::descriptor::{compute_descriptors, DescriptorBackend};
use crate::error::{Error, Stage};
use crate::raster::io::{decode_image, decode_mask, encode_png};
use crate::renderer::{encode_gif, FrameSequence};

use super::{run_on, Diagnostics, ProjectConfig, StageTiming};

const BODY_LIMIT: usize = 64 * 1024 * 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JobState {
    Queued,
    Running,
    Done,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobError {
    pub code: String,
    pub stage: Option<Stage>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobResultInfo {
    pub frames: usize,
    pub fps: f64,
    pub width: usize,
    pub height: usize,
    pub gif: String,
    pub frame_template: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobRecord {
    pub id: String,
    pub state: JobState,
    pub config_hash: String,
    pub timings: Vec<StageTiming>,
    pub result: Option<JobResultInfo>,
    pub diagnostics: Option<Diagnostics>,
    pub error: Option<JobError>,
}

struct JobEntry {
    record: JobRecord,
    frames: Option<Arc<FrameSequence>>,
    gif: Option<Arc<Vec<u8>>>,
}

/// Shared state; the job table is the single source of truth.
pub struct AppState {
    jobs: Mutex<HashMap<String, JobEntry>>,
    by_hash: Mutex<HashMap<String, String>>,
    workers: Arc<Semaphore>,
    next_id: Mutex<u64>,
}

impl AppState {
    pub fn new(workers: usize) -> Arc<Self> {
        Arc::new(AppState {
            jobs: Mutex::new(HashMap::new()),
            by_hash: Mutex::new(HashMap::new()),
            workers: Arc::new(Semaphore::new(workers.max(1))),
            next_id: Mutex::new(0),
        })
    }

    pub fn record(&self, id: &str) -> Option<JobRecord> {
        self.jobs.lock().expect("job table").get(id).map(|e| e.record.clone())
    }

    /// Move a job forward; backwards transitions are ignored.
    fn transition(&self, id: &str, f: impl FnOnce(&mut JobEntry)) {
        let mut jobs = self.jobs.lock().expect("job table");
        if let Some(e) = jobs.get_mut(id) {
            let before = rank(e.record.state);
            let saved = e.record.state;
            f(e);
            if rank(e.record.state) < before {
                e.record.state = saved;
            }
        }
    }
}

fn rank(s: JobState) -> u8 {
    match s {
        JobState::Queued => 0,
        JobState::Running => 1,
        JobState::Done | JobState::Failed => 2,
    }
}

/// Error response body: `{"error": {"code": ..., "message": ...}}`.
#[derive(Debug, Serialize, Deserialize)]
pub struct ApiError {
    pub error: ApiErrorBody,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ApiErrorBody {
    pub code: String,
    pub message: String,
}

struct HttpError(StatusCode, String, String);

impl HttpError {
    fn bad(code: &str, msg: impl Into<String>) -> Self {
        HttpError(StatusCode::BAD_REQUEST, code.into(), msg.into())
    }

    fn not_found(msg: impl Into<String>) -> Self {
        HttpError(StatusCode::NOT_FOUND, "not_found".into(), msg.into())
    }
}

impl From<Error> for HttpError {
    fn from(e: Error) -> Self {
        HttpError::bad(e.code(), e.to_string())
    }
}

impl IntoResponse for HttpError {
    fn into_response(self) -> Response {
        let body = ApiError { error: ApiErrorBody { code: self.1, message: self.2 } };
        (self.0, Json(body)).into_response()
    }
}

/// JSON job submission; images are base64-encoded PNGs.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct JobRequest {
    pub image: String,
    pub mask: String,
    #[serde(default)]
    pub config: Option<ProjectConfig>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct SuggestRequest {
    pub image: String,
    #[serde(default)]
    pub corner_count: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuggestedJson {
    pub x: f64,
    pub y: f64,
    pub votes: f64,
    pub angle_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuggestResponse {
    pub directions: Vec<SuggestedJson>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SubmitResponse {
    pub id: String,
    pub config_hash: String,
    pub cached: bool,
}

/// Raw parts of a submission, from either JSON or multipart.
struct Submission {
    image: Vec<u8>,
    mask: Vec<u8>,
    config: ProjectConfig,
    corner_count: Option<usize>,
}

fn b64(field: &str, s: &str) -> Result<Vec<u8>, HttpError> {
    base64::engine::general_purpose::STANDARD
        .decode(s.trim())
        .map_err(|e| HttpError::bad("invalid_base64", format!("{field}: {e}")))
}

async fn read_submission(req: Request, need_mask: bool) -> Result<Submission, HttpError> {
    let ct = req
        .headers()
        .get(header::CONTENT_TYPE)
        .and_then(|v| v.to_str().ok())
        .unwrap_or("")
        .to_string();
    let mut sub = Submission { image: Vec::new(), mask: Vec::new(), config: ProjectConfig::default(), corner_count: None };
    if ct.starts_with("multipart/form-data") {
        let mut mp = Multipart::from_request(req, &())
            .await
            .map_err(|e| HttpError::bad("invalid_multipart", e.to_string()))?;
        while let Some(field) = mp.next_field().await.map_err(|e| HttpError::bad("invalid_multipart", e.to_string()))? {
            let name = field.name().unwrap_or("").to_string();
            let data = field.bytes().await.map_err(|e| HttpError::bad("invalid_multipart", e.to_string()))?;
            match name.as_str() {
                "image" => sub.image = data.to_vec(),
                "mask" => sub.mask = data.to_vec(),
                "config" => {
                    sub.config = serde_json::from_slice(&data).map_err(|e| HttpError::bad("invalid_config", e.to_string()))?
                }
                "corner_count" => {
                    let s = String::from_utf8_lossy(&data);
                    sub.corner_count =
                        Some(s.trim().parse().map_err(|_| HttpError::bad("invalid_request", "corner_count must be an integer"))?);
                }
                _ => {}
            }
        }
    } else {
        let bytes = Bytes::from_request(req, &())
            .await
            .map_err(|e| HttpError::bad("invalid_request", e.to_string()))?;
        if need_mask {
            let r: JobRequest = serde_json::from_slice(&bytes).map_err(|e| HttpError::bad("invalid_json", e.to_string()))?;
            sub.image = b64("image", &r.image)?;
            sub.mask = b64("mask", &r.mask)?;
            sub.config = r.config.unwrap_or_default();
        } else {
            let r: SuggestRequest = serde_json::from_slice(&bytes).map_err(|e| HttpError::bad("invalid_json", e.to_string()))?;
            sub.image = b64("image", &r.image)?;
            sub.corner_count = r.corner_count;
        }
    }
    if sub.image.is_empty() {
        return Err(HttpError::bad("missing_image", "no image supplied"));
    }
    if need_mask && sub.mask.is_empty() {
        return Err(HttpError::bad("missing_mask", "no mask supplied"));
    }
    Ok(sub)
}

async fn submit_job(State(state): State<Arc<AppState>>, req: Request) -> Result<Response, HttpError> {
    let sub = read_submission(req, true).await?;
    let mut config = sub.config;
    // The service never reads server-side paths on a client's behalf.
    config.image = None;
    config.mask = None;
    if matches!(config.descriptor, DescriptorBackend::ConvWeights { .. }) {
        return Err(HttpError::bad("unsupported", "conv-weights descriptors are not available over HTTP"));
    }
    config.validate()?;
    let image = decode_image(&sub.image).map_err(|e| HttpError::bad("invalid_image", e.to_string()))?;
    let mask = decode_mask(&sub.mask).map_err(|e| HttpError::bad("invalid_mask", e.to_string()))?;
    if image.dimensions() != mask.dimensions() {
        return Err(HttpError::bad("dimension_mismatch", "image and mask dimensions differ"));
    }
    let hash = config.content_hash(&sub.image, &sub.mask);

    let id = {
        let mut by_hash = state.by_hash.lock().expect("hash table");
        if let Some(id) = by_hash.get(&hash) {
            let body = SubmitResponse { id: id.clone(), config_hash: hash, cached: true };
            return Ok((StatusCode::ACCEPTED, Json(body)).into_response());
        }
        let mut n = state.next_id.lock().expect("id counter");
        *n += 1;
        let id = format!("job-{:06}-{}", *n, &hash[..12]);
        by_hash.insert(hash.clone(), id.clone());
        state.jobs.lock().expect("job table").insert(
            id.clone(),
            JobEntry {
                record: JobRecord {
                    id: id.clone(),
                    state: JobState::Queued,
                    config_hash: hash.clone(),
                    timings: Vec::new(),
                    result: None,
                    diagnostics: None,
                    error: None,
                },
                frames: None,
                gif: None,
            },
        );
        id
    };

    let st = state.clone();
    let job_id = id.clone();
    tokio::spawn(async move {
        let Ok(_permit) = st.workers.clone().acquire_owned().await else {
            return;
        };
        st.transition(&job_id, |e| e.record.state = JobState::Running);
        let fps = config.fps;
        let outcome = tokio::task::spawn_blocking(move || {
            let r = run_on(&image, &mask, &config, None)?;
            let gif = encode_gif(&r.frames, fps).map_err(|e| e.at(Stage::Encode))?;
            Ok::<_, Error>((r, gif))
        })
        .await;
        st.transition(&job_id, |e| match outcome {
            Ok(Ok((r, gif))) => {
                let (w, h) = r.frames.frames[0].dimensions();
                e.record.timings = r.diagnostics.timings.clone();
                e.record.result = Some(JobResultInfo {
                    frames: r.frames.len(),
                    fps,
                    width: w,
                    height: h,
                    gif: format!("/jobs/{job_id}/result.gif"),
                    frame_template: format!("/jobs/{job_id}/frames/{{k}}.png"),
                });
                e.record.diagnostics = Some(r.diagnostics);
                e.frames = Some(Arc::new(r.frames));
                e.gif = Some(Arc::new(gif));
                e.record.state = JobState::Done;
            }
            Ok(Err(err)) => {
                e.record.error = Some(JobError { code: err.code().into(), stage: err.stage_tag(), message: err.to_string() });
                e.record.state = JobState::Failed;
            }
            Err(join) => {
                e.record.error = Some(JobError { code: "internal".into(), stage: None, message: join.to_string() });
                e.record.state = JobState::Failed;
            }
        });
    });
    let body = SubmitResponse { id, config_hash: hash, cached: false };
    Ok((StatusCode::ACCEPTED, Json(body)).into_response())
}

async fn get_job(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Json<JobRecord>, HttpError> {
    state.record(&id).map(Json).ok_or_else(|| HttpError::not_found(format!("no job {id}")))
}

fn not_ready(id: &str) -> HttpError {
    HttpError(StatusCode::CONFLICT, "not_ready".into(), format!("job {id} has no result"))
}

async fn get_gif(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Response, HttpError> {
    let gif = {
        let jobs = state.jobs.lock().expect("job table");
        let e = jobs.get(&id).ok_or_else(|| HttpError::not_found(format!("no job {id}")))?;
        e.gif.clone().ok_or_else(|| not_ready(&id))?
    };
    Ok(([(header::CONTENT_TYPE, "image/gif")], gif.as_ref().clone()).into_response())
}

async fn get_frame(
    State(state): State<Arc<AppState>>,
    Path((id, file)): Path<(String, String)>,
) -> Result<Response, HttpError> {
    let k: usize = file
        .strip_suffix(".png")
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| HttpError::bad("invalid_frame", "frame must be <k>.png"))?;
    let frames = {
        let jobs = state.jobs.lock().expect("job table");
        let e = jobs.get(&id).ok_or_else(|| HttpError::not_found(format!("no job {id}")))?;
        e.frames.clone().ok_or_else(|| not_ready(&id))?
    };
    let frame = frames.frames.get(k).ok_or_else(|| HttpError::not_found(format!("frame {k} out of range")))?;
    let png = encode_png(frame)?;
    Ok(([(header::CONTENT_TYPE, "image/png")], png).into_response())
}

async fn suggest(req: Request) -> Result<Json<SuggestResponse>, HttpError> {
    let sub = read_submission(req, false).await?;
    let image = decode_image(&sub.image).map_err(|e| HttpError::bad("invalid_image", e.to_string()))?;
    let n = sub.corner_count.unwrap_or(DEFAULT_CORNER_COUNT);
    if n == 0 {
        return Err(HttpError::bad("invalid_request", "corner_count must be at least 1"));
    }
    let vote = tokio::task::spawn_blocking(move || {
        let desc = compute_descriptors(&image, &DescriptorBackend::default())?;
        suggest_directions(&image, &desc, n, DEFAULT_MAX_DIRECTIONS)
    })
    .await
    .map_err(|e| HttpError(StatusCode::INTERNAL_SERVER_ERROR, "internal".into(), e.to_string()))??;
    Ok(Json(SuggestResponse {
        directions: vote
            .winners
            .iter()
            .map(|w| SuggestedJson { x: w.direction.x, y: w.direction.y, votes: w.votes, angle_deg: w.angle_deg })
            .collect(),
    }))
}

async fn healthz() -> Json<serde_json::Value> {
    Json(serde_json::json!({ "status": "ok", "version": env!("CARGO_PKG_VERSION") }))
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/healthz", get(healthz))
        .route("/jobs", post(submit_job))
        .route("/jobs/{id}", get(get_job))
        .route("/jobs/{id}/result.gif", get(get_gif))
        .route("/jobs/{id}/frames/{file}", get(get_frame))
        .route("/suggest-directions", post(suggest))
        .layer(DefaultBodyLimit::max(BODY_LIMIT))
        .with_state(state)
}

/// Serve until the process is stopped.
pub async fn serve(addr: SocketAddr, workers: usize) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(AppState::new(workers))).await
}
