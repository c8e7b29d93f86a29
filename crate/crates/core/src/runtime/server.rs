//! Live service: a TCP line listener for devices and an HTTP JSON API for
//! operators and dashboards.
//!
//! Connections are handled concurrently, but every event and every read goes
//! through one queue drained by a single thread that owns the
//! [`AgentRuntime`]. Reads therefore see a consistent snapshot and events are
//! applied in arrival order across all connections.

use std::collections::BTreeMap;
use std::io;
use std::net::SocketAddr;
use std::thread::JoinHandle;
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use axum::extract::{Query, Request, State};
use axum::http::{header, HeaderValue, Method, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;
use tokio::io::{AsyncBufReadExt, BufReader};
use tokio::net::{TcpListener, TcpStream};
use tokio::sync::{mpsc, oneshot, watch};

use super::agent::{AgentRuntime, LogEntry};
use super::event::{EventMode, TimingEvent};
use crate::store::{rank_results, RankedResult, StoreError};
use crate::MpId;

const DEFAULT_EVENT_LIMIT: usize = 50;
const MAX_LINE: usize = 4096;

enum Command {
    Line(String),
    Event(TimingEvent, oneshot::Sender<LogEntry>),
    Results { sort: String, dnf: bool, reply: oneshot::Sender<Result<Vec<ResultRow>, StoreError>> },
    Events { limit: usize, reply: oneshot::Sender<Vec<LogEntry>> },
    Health(oneshot::Sender<Health>),
}

#[derive(Debug, Clone, Serialize)]
struct ResultRow {
    #[serde(flatten)]
    ranked: RankedResult,
    columns: BTreeMap<String, i64>,
}

#[derive(Debug, Clone, Serialize)]
struct Health {
    status: &'static str,
    received: usize,
    applied: usize,
    skipped: usize,
    competitors: usize,
    measuring_places: Vec<MpId>,
    columns: Vec<String>,
}

/// Listener addresses. Port 0 picks a free port; the handle reports the
/// actual ones.
#[derive(Debug, Clone, Copy)]
pub struct Server {
    pub tcp: SocketAddr,
    pub http: SocketAddr,
}

/// A running service. Dropping it without [`ServerHandle::shutdown`] leaves
/// the threads running until the process exits.
pub struct ServerHandle {
    tcp_addr: SocketAddr,
    http_addr: SocketAddr,
    stop: watch::Sender<bool>,
    tokio: tokio::runtime::Runtime,
    apply: JoinHandle<AgentRuntime>,
}

impl Server {
    pub fn new(tcp: SocketAddr, http: SocketAddr) -> Self {
        Server { tcp, http }
    }

    /// Binds both listeners and starts serving. Must not be called from
    /// inside an async context.
    pub fn start(self, rt: AgentRuntime) -> io::Result<ServerHandle> {
        let tokio = tokio::runtime::Builder::new_multi_thread().enable_all().thread_name("easytime-io").build()?;
        let tcp = std::net::TcpListener::bind(self.tcp)?;
        let http = std::net::TcpListener::bind(self.http)?;
        tcp.set_nonblocking(true)?;
        http.set_nonblocking(true)?;
        let (tcp_addr, http_addr) = (tcp.local_addr()?, http.local_addr()?);

        let (tx, rx) = mpsc::unbounded_channel();
        let apply = std::thread::Builder::new().name("easytime-apply".into()).spawn(move || apply_loop(rt, rx))?;
        let (stop, stopped) = watch::channel(false);

        let _guard = tokio.enter();
        let tcp = TcpListener::from_std(tcp)?;
        let http = TcpListener::from_std(http)?;
        tokio.spawn(accept_loop(tcp, tx.clone(), stopped.clone()));
        let app = router(tx);
        let mut stopped_http = stopped;
        tokio.spawn(async move {
            let shutdown = async move {
                let _ = stopped_http.wait_for(|s| *s).await;
            };
            if let Err(e) = axum::serve(http, app).with_graceful_shutdown(shutdown).await {
                log::error!("http server: {e}");
            }
        });
        log::info!("listening: tcp {tcp_addr}, http {http_addr}");
        Ok(ServerHandle { tcp_addr, http_addr, stop, tokio, apply })
    }
}

impl ServerHandle {
    pub fn tcp_addr(&self) -> SocketAddr {
        self.tcp_addr
    }

    pub fn http_addr(&self) -> SocketAddr {
        self.http_addr
    }

    /// Stops accepting, closes open connections, applies everything already
    /// queued, writes `results.csv` and returns the runtime.
    pub fn shutdown(self) -> AgentRuntime {
        let _ = self.stop.send(true);
        self.tokio.shutdown_timeout(Duration::from_secs(5));
        self.apply.join().expect("apply thread panicked")
    }
}

fn apply_loop(mut rt: AgentRuntime, mut rx: mpsc::UnboundedReceiver<Command>) -> AgentRuntime {
    let mut dirty = false;
    while let Some(cmd) = rx.blocking_recv() {
        match cmd {
            Command::Line(line) => {
                dirty |= rt.receive_line(&line, EventMode::Auto).is_some_and(|e| e.outcome.is_applied());
            }
            Command::Event(event, reply) => {
                rt.dispatch_event(event);
                let entry = rt.log().last().cloned().expect("event was just logged");
                dirty |= entry.outcome.is_applied();
                let _ = reply.send(entry);
            }
            Command::Results { sort, dnf, reply } => {
                let _ = reply.send(results(&rt, &sort, dnf));
            }
            Command::Events { limit, reply } => {
                let log = rt.log();
                let _ = reply.send(log[log.len().saturating_sub(limit)..].to_vec());
            }
            Command::Health(reply) => {
                let _ = reply.send(health(&rt));
            }
        }
        if dirty && rx.is_empty() {
            persist(&rt);
            dirty = false;
        }
    }
    if dirty {
        persist(&rt);
    }
    rt
}

fn persist(rt: &AgentRuntime) {
    if let Err(e) = rt.save() {
        log::error!("saving results: {e}");
    }
}

fn results(rt: &AgentRuntime, sort: &str, dnf: bool) -> Result<Vec<ResultRow>, StoreError> {
    let db = rt.db();
    let ranked = rank_results(db, rt.registry(), sort, dnf)?;
    Ok(ranked
        .into_iter()
        .map(|r| {
            let cells = db.row(r.id).unwrap_or_default();
            let columns = db.columns().iter().cloned().zip(cells.iter().copied()).collect();
            ResultRow { ranked: r, columns }
        })
        .collect())
}

fn health(rt: &AgentRuntime) -> Health {
    let received = rt.log().len();
    let applied = rt.applied_count();
    Health {
        status: "ok",
        received,
        applied,
        skipped: received - applied,
        competitors: rt.registry().len(),
        measuring_places: rt.unit().mp_ids().collect(),
        columns: rt.db().columns().to_vec(),
    }
}

async fn accept_loop(listener: TcpListener, tx: mpsc::UnboundedSender<Command>, mut stopped: watch::Receiver<bool>) {
    loop {
        tokio::select! {
            _ = stopped.wait_for(|s| *s) => break,
            accepted = listener.accept() => match accepted {
                Ok((stream, peer)) => {
                    log::info!("device connected: {peer}");
                    tokio::spawn(read_lines(stream, peer, tx.clone()));
                }
                Err(e) => log::warn!("accept: {e}"),
            },
        }
    }
}

async fn read_lines(stream: TcpStream, peer: SocketAddr, tx: mpsc::UnboundedSender<Command>) {
    let mut reader = BufReader::new(stream);
    let mut buf = Vec::new();
    loop {
        buf.clear();
        match reader.read_until(b'\n', &mut buf).await {
            Ok(0) => break,
            Ok(_) if buf.len() > MAX_LINE => log::warn!("{peer}: dropped line of {} bytes", buf.len()),
            Ok(_) => {
                let line = String::from_utf8_lossy(&buf).trim_end_matches(['\n', '\r']).to_string();
                if tx.send(Command::Line(line)).is_err() {
                    break;
                }
            }
            Err(e) => {
                log::warn!("{peer}: {e}");
                break;
            }
        }
    }
    log::info!("device disconnected: {peer}");
}

type Queue = mpsc::UnboundedSender<Command>;

fn router(tx: Queue) -> Router {
    Router::new()
        .route("/events", get(get_events).post(post_event))
        .route("/results", get(get_results))
        .route("/health", get(get_health))
        .layer(middleware::from_fn(cors))
        .with_state(tx)
}

async fn cors(req: Request, next: Next) -> Response {
    let mut resp =
        if req.method() == Method::OPTIONS { StatusCode::NO_CONTENT.into_response() } else { next.run(req).await };
    let h = resp.headers_mut();
    h.insert(header::ACCESS_CONTROL_ALLOW_ORIGIN, HeaderValue::from_static("*"));
    h.insert(header::ACCESS_CONTROL_ALLOW_METHODS, HeaderValue::from_static("GET, POST, OPTIONS"));
    h.insert(header::ACCESS_CONTROL_ALLOW_HEADERS, HeaderValue::from_static("content-type"));
    resp
}

fn error(status: StatusCode, kind: &str, message: impl ToString) -> Response {
    (status, Json(json!({ "error": kind, "message": message.to_string() }))).into_response()
}

fn unavailable() -> Response {
    error(StatusCode::SERVICE_UNAVAILABLE, "ShuttingDown", "the service is shutting down")
}

async fn ask<T>(tx: &Queue, make: impl FnOnce(oneshot::Sender<T>) -> Command) -> Option<T> {
    let (reply, rx) = oneshot::channel();
    tx.send(make(reply)).ok()?;
    rx.await.ok()
}

#[derive(Debug, Deserialize)]
struct PostEvent {
    competitor: i64,
    mp: i64,
    time: Option<i64>,
}

async fn post_event(State(tx): State<Queue>, Json(body): Json<PostEvent>) -> Response {
    let Some(mp) = u32::try_from(body.mp).ok().filter(|&m| m >= 1) else {
        return error(StatusCode::BAD_REQUEST, "MalformedEvent", format!("measuring place {} out of range", body.mp));
    };
    let time =
        body.time.unwrap_or_else(|| SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs() as i64));
    if time < 0 {
        return error(StatusCode::BAD_REQUEST, "MalformedEvent", format!("negative time {time}"));
    }
    let event = TimingEvent::manual(body.competitor, mp, time);
    match ask(&tx, |r| Command::Event(event, r)).await {
        Some(entry) => Json(entry).into_response(),
        None => unavailable(),
    }
}

#[derive(Debug, Deserialize)]
struct ResultsQuery {
    sort: String,
    #[serde(default)]
    dnf: bool,
}

async fn get_results(State(tx): State<Queue>, Query(q): Query<ResultsQuery>) -> Response {
    let sort = q.sort.clone();
    match ask(&tx, |reply| Command::Results { sort: q.sort, dnf: q.dnf, reply }).await {
        Some(Ok(rows)) => Json(json!({ "sort": sort, "results": rows })).into_response(),
        Some(Err(e @ StoreError::UnknownColumn(_))) => error(StatusCode::BAD_REQUEST, "UnknownColumn", e),
        Some(Err(e)) => error(StatusCode::INTERNAL_SERVER_ERROR, "StoreError", e),
        None => unavailable(),
    }
}

#[derive(Debug, Deserialize)]
struct EventsQuery {
    limit: Option<usize>,
}

async fn get_events(State(tx): State<Queue>, Query(q): Query<EventsQuery>) -> Response {
    let limit = q.limit.unwrap_or(DEFAULT_EVENT_LIMIT);
    match ask(&tx, |reply| Command::Events { limit, reply }).await {
        Some(entries) => Json(entries).into_response(),
        None => unavailable(),
    }
}

async fn get_health(State(tx): State<Queue>) -> Response {
    match ask(&tx, Command::Health).await {
        Some(h) => Json(h).into_response(),
        None => unavailable(),
    }
}
