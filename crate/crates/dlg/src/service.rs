//! HTTP/JSON service: stateless mining and enumeration, plus live stager
//! sessions persisted as append-only JSON-lines event logs.
//!
//! Each session lives in `<state>/<id>.jsonl`: a `created` event followed by
//! one event per accepted utterance, undo or redo. On start every log is
//! replayed through the stager; a log that fails to parse or replay marks
//! its session as quarantined (410) without affecting the others.

use std::collections::{BTreeMap, HashMap};
use std::fs::{self, OpenOptions};
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};
use std::time::{SystemTime, UNIX_EPOCH};

use axum::body::Bytes;
use axum::extract::{Path as UrlPath, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use mixdialog_core::mine::mine;
use mixdialog_core::peval::{Action, Bindings, Completion};
use mixdialog_core::stager::{compile_stager, start_session, Outcome, SessionState, Utterance};
use mixdialog_core::text::sorted_episode_lines;
use mixdialog_core::{
    enumerate_union, parse_domains, parse_episodes, parse_spec, render_spec, ParseError,
    QuestionId, Response as Resp,
};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use tokio::sync::Mutex;

/// Question limit for the stateless mine and enumerate endpoints.
pub const STATELESS_MAX_QUESTIONS: usize = 8;

const DEFAULT_ACTION: &str = "complete";

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
#[serde(tag = "event", rename_all = "snake_case")]
enum Event {
    Created {
        id: String,
        created_at: u64,
        spec: String,
        domains: String,
        action: String,
    },
    Utterance {
        bindings: BTreeMap<String, String>,
    },
    Undo,
    Redo,
}

struct Live {
    id: String,
    created_at: u64,
    state: SessionState,
}

enum Slot {
    Live(Live),
    Quarantined(String),
}

struct Inner {
    dir: Option<PathBuf>,
    sessions: RwLock<HashMap<String, Arc<Mutex<Slot>>>>,
}

/// Shared service state; cheap to clone.
#[derive(Clone)]
pub struct AppState(Arc<Inner>);

impl AppState {
    /// Opens the service state, replaying every log in `dir` if given.
    /// Without a directory sessions live in memory only.
    pub fn open(dir: Option<PathBuf>) -> std::io::Result<AppState> {
        let mut sessions = HashMap::new();
        if let Some(d) = &dir {
            fs::create_dir_all(d)?;
            let mut paths: Vec<PathBuf> = fs::read_dir(d)?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
                .collect();
            paths.sort();
            for p in paths {
                let Some(id) = p.file_stem().and_then(|s| s.to_str()).map(str::to_owned) else {
                    continue;
                };
                let slot = match restore(&p, &id) {
                    Ok(live) => Slot::Live(live),
                    Err(why) => Slot::Quarantined(why),
                };
                sessions.insert(id, Arc::new(Mutex::new(slot)));
            }
        }
        Ok(AppState(Arc::new(Inner {
            dir,
            sessions: RwLock::new(sessions),
        })))
    }

    fn slot(&self, id: &str) -> Result<Arc<Mutex<Slot>>, ApiError> {
        let map = self.0.sessions.read().expect("session map lock");
        map.get(id)
            .cloned()
            .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, format!("no session {id}")))
    }

    fn append(&self, id: &str, ev: &Event) -> Result<(), ApiError> {
        let Some(dir) = &self.0.dir else {
            return Ok(());
        };
        let line = serde_json::to_string(ev).expect("events serialize");
        let res = OpenOptions::new()
            .create(true)
            .append(true)
            .open(log_path(dir, id))
            .and_then(|mut f| {
                f.write_all(format!("{line}\n").as_bytes())
                    .and_then(|()| f.flush())
            });
        res.map_err(|e| {
            ApiError::new(
                StatusCode::INTERNAL_SERVER_ERROR,
                format!("writing event log: {e}"),
            )
        })
    }
}

fn log_path(dir: &Path, id: &str) -> PathBuf {
    dir.join(format!("{id}.jsonl"))
}

fn build_session(spec: &str, domains: &str, action: &str) -> Result<SessionState, ApiError> {
    let u = parse_spec(spec).map_err(|e| ApiError::parse("spec", e))?;
    let d = parse_domains(domains).map_err(|e| ApiError::parse("domains", e))?;
    let plan = compile_stager(&u, &d, Action::new(action))
        .map_err(|e| ApiError::bad_request(e.to_string()))?;
    Ok(start_session(Arc::new(plan)))
}

fn to_utterance(b: &BTreeMap<String, String>) -> Result<Utterance, String> {
    let mut out = Bindings::new();
    for (k, v) in b {
        let q = QuestionId::new(k).ok_or_else(|| format!("invalid question `{k}`"))?;
        let r = Resp::new(v).ok_or_else(|| format!("invalid response `{v}`"))?;
        out.insert(q, r);
    }
    Utterance::new(out).ok_or_else(|| "utterance has no bindings".to_owned())
}

fn restore(path: &Path, id: &str) -> Result<Live, String> {
    let text = fs::read_to_string(path).map_err(|e| e.to_string())?;
    if !text.ends_with('\n') {
        return Err("truncated log".into());
    }
    let mut lines = text.lines();
    let first = lines.next().ok_or("empty log")?;
    let Event::Created {
        id: logged,
        created_at,
        spec,
        domains,
        action,
    } = serde_json::from_str(first).map_err(|e| format!("line 1: {e}"))?
    else {
        return Err("log does not start with a created event".into());
    };
    if logged != id {
        return Err(format!("log names session {logged}"));
    }
    let mut state = build_session(&spec, &domains, &action).map_err(|e| e.error)?;
    for (n, line) in lines.enumerate() {
        let ev: Event = serde_json::from_str(line).map_err(|e| format!("line {}: {e}", n + 2))?;
        let ok = match ev {
            Event::Created { .. } => false,
            Event::Utterance { bindings } => {
                let u = to_utterance(&bindings)?;
                !matches!(state.step(&u).outcome, Outcome::Rejected(_))
            }
            Event::Undo => state.undo().is_ok(),
            Event::Redo => state.redo().is_ok(),
        };
        if !ok {
            return Err(format!("line {} does not replay", n + 2));
        }
    }
    Ok(Live {
        id: id.to_owned(),
        created_at,
        state,
    })
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    error: String,
    position: Option<PositionView>,
}

#[derive(Debug, Serialize)]
struct PositionView {
    line: usize,
    column: usize,
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    error: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    position: Option<&'a PositionView>,
}

impl ApiError {
    fn new(status: StatusCode, error: impl Into<String>) -> Self {
        ApiError {
            status,
            error: error.into(),
            position: None,
        }
    }

    fn bad_request(error: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, error)
    }

    fn parse(what: &str, e: ParseError) -> Self {
        ApiError {
            status: StatusCode::BAD_REQUEST,
            error: format!("{what}: {e}"),
            position: Some(PositionView {
                line: e.pos.line,
                column: e.pos.column,
            }),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = ErrorBody {
            error: &self.error,
            position: self.position.as_ref(),
        };
        (self.status, Json(body)).into_response()
    }
}

/// Decodes a JSON body; any failure is a 400.
fn body<T: DeserializeOwned>(bytes: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(bytes).map_err(|e| ApiError::bad_request(format!("malformed JSON: {e}")))
}

#[derive(Serialize)]
struct CompletionView {
    action: String,
    bindings: BTreeMap<String, String>,
}

#[derive(Serialize)]
struct SessionView {
    id: String,
    created_at: u64,
    askable: Vec<String>,
    history: Vec<BTreeMap<String, String>>,
    completed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    completion: Option<CompletionView>,
    residual_spec: Option<String>,
    can_undo: bool,
    can_redo: bool,
}

fn strings(b: &Bindings) -> BTreeMap<String, String> {
    b.iter()
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

fn completion_view(c: &Completion) -> CompletionView {
    CompletionView {
        action: c.action.to_string(),
        bindings: strings(&c.bindings),
    }
}

fn view(live: &Live) -> SessionView {
    let s = &live.state;
    SessionView {
        id: live.id.clone(),
        created_at: live.created_at,
        askable: s.askable().iter().map(ToString::to_string).collect(),
        history: s.history().iter().map(strings).collect(),
        completed: s.is_complete(),
        completion: s.completion().map(completion_view),
        residual_spec: s.residual_spec().ok().flatten().map(|u| render_spec(&u)),
        can_undo: s.can_undo(),
        can_redo: s.can_redo(),
    }
}

#[derive(Serialize)]
struct UtteranceView {
    outcome: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    reason: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    message: Option<String>,
    #[serde(flatten)]
    session: SessionView,
}

async fn healthz() -> Json<serde_json::Value> {
    Json(serde_json::json!({ "status": "ok" }))
}

#[derive(Deserialize)]
struct CreateBody {
    spec: String,
    domains: String,
    #[serde(default)]
    action: Option<String>,
}

async fn create(
    State(app): State<AppState>,
    bytes: Bytes,
) -> Result<(StatusCode, Json<SessionView>), ApiError> {
    let b: CreateBody = body(&bytes)?;
    let action = b.action.unwrap_or_else(|| DEFAULT_ACTION.to_owned());
    let state = build_session(&b.spec, &b.domains, &action)?;
    let id = uuid::Uuid::new_v4().simple().to_string();
    let created_at = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    app.append(
        &id,
        &Event::Created {
            id: id.clone(),
            created_at,
            spec: b.spec,
            domains: b.domains,
            action,
        },
    )?;
    let live = Live {
        id: id.clone(),
        created_at,
        state,
    };
    let v = view(&live);
    app.0
        .sessions
        .write()
        .expect("session map lock")
        .insert(id, Arc::new(Mutex::new(Slot::Live(live))));
    Ok((StatusCode::CREATED, Json(v)))
}

fn live_mut(slot: &mut Slot) -> Result<&mut Live, ApiError> {
    match slot {
        Slot::Live(l) => Ok(l),
        Slot::Quarantined(why) => Err(ApiError::new(
            StatusCode::GONE,
            format!("session quarantined: {why}"),
        )),
    }
}

async fn get_session(
    State(app): State<AppState>,
    UrlPath(id): UrlPath<String>,
) -> Result<Json<SessionView>, ApiError> {
    let slot = app.slot(&id)?;
    let mut guard = slot.lock().await;
    Ok(Json(view(live_mut(&mut guard)?)))
}

#[derive(Deserialize)]
struct UtteranceBody {
    bindings: BTreeMap<String, String>,
}

async fn utterance(
    State(app): State<AppState>,
    UrlPath(id): UrlPath<String>,
    bytes: Bytes,
) -> Result<Json<UtteranceView>, ApiError> {
    let slot = app.slot(&id)?;
    let b: UtteranceBody = body(&bytes)?;
    let u = to_utterance(&b.bindings).map_err(ApiError::bad_request)?;
    let mut guard = slot.lock().await;
    let live = live_mut(&mut guard)?;
    if live.state.is_complete() {
        return Err(ApiError::new(StatusCode::CONFLICT, "session is complete"));
    }
    let mut next = live.state.clone();
    let (outcome, reason, message) = match next.step(&u).outcome {
        Outcome::Rejected(r) => ("rejected", Some(r.kind()), Some(r.to_string())),
        accepted => {
            app.append(
                &id,
                &Event::Utterance {
                    bindings: b.bindings,
                },
            )?;
            live.state = next;
            (
                if matches!(accepted, Outcome::Completed(_)) {
                    "completed"
                } else {
                    "accepted"
                },
                None,
                None,
            )
        }
    };
    Ok(Json(UtteranceView {
        outcome,
        reason,
        message,
        session: view(live),
    }))
}

async fn history_op(app: AppState, id: String, undo: bool) -> Result<Json<SessionView>, ApiError> {
    let slot = app.slot(&id)?;
    let mut guard = slot.lock().await;
    let live = live_mut(&mut guard)?;
    let mut next = live.state.clone();
    let r = if undo { next.undo() } else { next.redo() };
    r.map_err(|e| ApiError::new(StatusCode::CONFLICT, e.to_string()))?;
    app.append(&id, if undo { &Event::Undo } else { &Event::Redo })?;
    live.state = next;
    Ok(Json(view(live)))
}

async fn undo(
    State(app): State<AppState>,
    UrlPath(id): UrlPath<String>,
) -> Result<Json<SessionView>, ApiError> {
    history_op(app, id, true).await
}

async fn redo(
    State(app): State<AppState>,
    UrlPath(id): UrlPath<String>,
) -> Result<Json<SessionView>, ApiError> {
    history_op(app, id, false).await
}

fn too_many(n: usize) -> Result<(), ApiError> {
    if n > STATELESS_MAX_QUESTIONS {
        return Err(ApiError::new(
            StatusCode::UNPROCESSABLE_ENTITY,
            format!("{n} questions exceed the limit of {STATELESS_MAX_QUESTIONS}"),
        ));
    }
    Ok(())
}

#[derive(Deserialize)]
struct MineBody {
    episodes: String,
}

#[derive(Serialize)]
struct MineView {
    spec_text: String,
    minimal: bool,
}

async fn mine_handler(bytes: Bytes) -> Result<Json<MineView>, ApiError> {
    let b: MineBody = body(&bytes)?;
    let spec = parse_episodes(&b.episodes).map_err(|e| ApiError::parse("episodes", e))?;
    too_many(spec.order().len())?;
    let r = tokio::task::spawn_blocking(move || mine(&spec))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?;
    Ok(Json(MineView {
        spec_text: render_spec(&r.union),
        minimal: r.minimal_claimed,
    }))
}

#[derive(Deserialize)]
struct EnumerateBody {
    spec_text: String,
}

#[derive(Serialize)]
struct EnumerateView {
    episodes: Vec<String>,
    count: usize,
}

async fn enumerate_handler(bytes: Bytes) -> Result<Json<EnumerateView>, ApiError> {
    let b: EnumerateBody = body(&bytes)?;
    let u = parse_spec(&b.spec_text).map_err(|e| ApiError::parse("spec", e))?;
    too_many(u.question_set().len())?;
    let spec = enumerate_union(&u).map_err(|e| ApiError::bad_request(e.to_string()))?;
    Ok(Json(EnumerateView {
        count: spec.len(),
        episodes: sorted_episode_lines(&spec),
    }))
}

pub fn router(app: AppState) -> Router {
    Router::new()
        .route("/v1/healthz", get(healthz))
        .route("/v1/sessions", post(create))
        .route("/v1/sessions/{id}", get(get_session))
        .route("/v1/sessions/{id}/utterance", post(utterance))
        .route("/v1/sessions/{id}/undo", post(undo))
        .route("/v1/sessions/{id}/redo", post(redo))
        .route("/v1/mine", post(mine_handler))
        .route("/v1/enumerate", post(enumerate_handler))
        .with_state(app)
}

/// Serves until interrupted.
pub async fn serve(addr: std::net::SocketAddr, state_dir: Option<PathBuf>) -> anyhow::Result<()> {
    let app = AppState::open(state_dir)?;
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(app))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
