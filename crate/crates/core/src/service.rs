//! Lexicon-management service: a working lemma (or mixed) lexicon with
//! snapshot reads, serialized writes and atomic persistence, exposed over
//! HTTP with JSON bodies.

use std::io::{self, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};
use std::thread::JoinHandle;

use axum::body::Bytes;
use axum::extract::{Path as UrlPath, Query, State};
use axum::http::StatusCode;
use axum::response::{Html, IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use thiserror::Error;
use tower_http::services::ServeDir;

use crate::inflection::{expand_entry, InflectionError, ParadigmSet};
use crate::model::{EntryId, Feature, InflectedForm, Inflection, LemmaEntry, Lexicon, LexiconKind, Violation};
use crate::xml::{self, XmlError};

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("entry {0} not found")]
    NotFound(EntryId),
    #[error("invalid entry: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
    #[error(transparent)]
    Inflection(#[from] InflectionError),
    #[error("limit must be at least 1")]
    InvalidLimit,
    #[error("the service manages lemma or mixed lexica, not {0}")]
    WrongKind(LexiconKind),
    #[error("cannot read {path}: {source}")]
    Load { path: PathBuf, source: XmlError },
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WorkingLexicon {
    pub lexicon: Lexicon,
    pub source_path: PathBuf,
    pub dirty: bool,
    pub next_id: EntryId,
}

fn append(w: &mut WorkingLexicon, mut entry: LemmaEntry) -> LemmaEntry {
    entry.id = w.next_id;
    w.next_id += 1;
    w.entries_mut().push(entry.clone());
    w.dirty = true;
    entry
}

impl WorkingLexicon {
    fn entries(&self) -> &[LemmaEntry] {
        self.lexicon.lemma_entries().expect("working lexica are lemma-based")
    }

    fn entries_mut(&mut self) -> &mut Vec<LemmaEntry> {
        match &mut self.lexicon {
            Lexicon::Lemma(e) | Lexicon::Mixed(e) => e,
            Lexicon::WordForm(_) => unreachable!("working lexica are lemma-based"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntryPage {
    pub total: usize,
    pub offset: usize,
    pub limit: usize,
    pub entries: Vec<LemmaEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParadigmSummary {
    pub name: String,
    pub rule_count: usize,
}

type FaultHook = Box<dyn Fn(&Path) -> io::Result<()> + Send + Sync>;

/// Many readers, one writer. Readers take the current snapshot; writers
/// build the next one and swap it in.
pub struct LexiconStore {
    current: RwLock<Arc<WorkingLexicon>>,
    writer: Mutex<()>,
    paradigms: ParadigmSet,
    before_rename: Mutex<Option<FaultHook>>,
}

impl LexiconStore {
    pub fn new(lexicon: Lexicon, paradigms: ParadigmSet, source_path: impl Into<PathBuf>) -> Result<Self, ServiceError> {
        let entries = match &lexicon {
            Lexicon::Lemma(e) | Lexicon::Mixed(e) => e,
            Lexicon::WordForm(_) => return Err(ServiceError::WrongKind(lexicon.kind())),
        };
        let next_id = entries.iter().map(|e| e.id + 1).max().unwrap_or(0);
        Ok(LexiconStore {
            current: RwLock::new(Arc::new(WorkingLexicon {
                lexicon,
                source_path: source_path.into(),
                dirty: false,
                next_id,
            })),
            writer: Mutex::new(()),
            paradigms,
            before_rename: Mutex::new(None),
        })
    }

    /// Loads the working file; a missing file starts an empty lemma lexicon.
    pub fn open(path: impl Into<PathBuf>, paradigms: ParadigmSet) -> Result<Self, ServiceError> {
        let path = path.into();
        let lexicon = match std::fs::read(&path) {
            Ok(bytes) => xml::parse_lexicon(&bytes, None).map_err(|source| ServiceError::Load {
                path: path.clone(),
                source,
            })?,
            Err(e) if e.kind() == io::ErrorKind::NotFound => Lexicon::empty(LexiconKind::Lemma),
            Err(source) => return Err(ServiceError::Io { path, source }),
        };
        Self::new(lexicon, paradigms, path)
    }

    pub fn snapshot(&self) -> Arc<WorkingLexicon> {
        self.current.read().unwrap().clone()
    }

    pub fn paradigm_set(&self) -> &ParadigmSet {
        &self.paradigms
    }

    /// Runs `hook` after the temporary file is written and before it replaces
    /// the working file. An error from the hook aborts the save.
    pub fn set_fault_hook(&self, hook: Option<FaultHook>) {
        *self.before_rename.lock().unwrap() = hook;
    }

    pub fn list_entries(&self, offset: usize, limit: usize, query: Option<&str>) -> Result<EntryPage, ServiceError> {
        if limit == 0 {
            return Err(ServiceError::InvalidLimit);
        }
        let snapshot = self.snapshot();
        let matching: Vec<&LemmaEntry> = snapshot
            .entries()
            .iter()
            .filter(|e| query.is_none_or(|q| e.lemma.contains(q)))
            .collect();
        Ok(EntryPage {
            total: matching.len(),
            offset,
            limit,
            entries: matching.into_iter().skip(offset).take(limit).cloned().collect(),
        })
    }

    pub fn get(&self, id: EntryId) -> Option<LemmaEntry> {
        self.snapshot().entries().iter().find(|e| e.id == id).cloned()
    }

    /// Checks an entry against the model and the paradigm set, and brings its
    /// inflection into the shape the working lexicon's kind requires.
    fn admit(&self, kind: LexiconKind, entry: LemmaEntry) -> Result<LemmaEntry, ServiceError> {
        let mut violations = entry.violations();
        if let Inflection::Paradigm(name) = &entry.inflection {
            if !self.paradigms.contains(name) {
                violations.push(Violation::new("inflection.paradigm", format!("unknown paradigm {name:?}")));
            }
        }
        if kind == LexiconKind::Lemma && matches!(entry.inflection, Inflection::Explicit(_)) {
            violations.push(Violation::new(
                "inflection",
                "lemma lexicon entries cannot embed inflected forms",
            ));
        }
        if !violations.is_empty() {
            return Err(ServiceError::Invalid(violations));
        }
        if kind == LexiconKind::Mixed {
            return Ok(expand_entry(&entry, &self.paradigms)?);
        }
        Ok(entry)
    }

    fn write<T>(&self, change: impl FnOnce(&mut WorkingLexicon) -> Result<T, ServiceError>) -> Result<T, ServiceError> {
        let _guard = self.writer.lock().unwrap();
        let mut next = (*self.snapshot()).clone();
        let out = change(&mut next)?;
        *self.current.write().unwrap() = Arc::new(next);
        Ok(out)
    }

    /// Replaces the entry with the same id, or appends with a fresh id when
    /// there is none.
    pub fn upsert_entry(&self, entry: LemmaEntry) -> Result<LemmaEntry, ServiceError> {
        self.write(|w| {
            let entry = self.admit(w.lexicon.kind(), entry)?;
            match w.entries_mut().iter_mut().find(|e| e.id == entry.id) {
                Some(slot) => {
                    *slot = entry.clone();
                    w.dirty = true;
                    Ok(entry)
                }
                None => Ok(append(w, entry)),
            }
        })
    }

    /// Appends with a fresh id, whatever id the entry carries.
    pub fn create_entry(&self, entry: LemmaEntry) -> Result<LemmaEntry, ServiceError> {
        self.write(|w| {
            let entry = self.admit(w.lexicon.kind(), entry)?;
            Ok(append(w, entry))
        })
    }

    /// Replaces an existing entry.
    pub fn update_entry(&self, id: EntryId, mut entry: LemmaEntry) -> Result<LemmaEntry, ServiceError> {
        entry.id = id;
        self.write(|w| {
            let entry = self.admit(w.lexicon.kind(), entry)?;
            let slot = w
                .entries_mut()
                .iter_mut()
                .find(|e| e.id == id)
                .ok_or(ServiceError::NotFound(id))?;
            *slot = entry.clone();
            w.dirty = true;
            Ok(entry)
        })
    }

    pub fn delete_entry(&self, id: EntryId) -> bool {
        self.write(|w| {
            let entries = w.entries_mut();
            let before = entries.len();
            entries.retain(|e| e.id != id);
            let removed = entries.len() != before;
            w.dirty |= removed;
            Ok(removed)
        })
        .unwrap_or(false)
    }

    /// The forms the entry would have; never touches the lexicon.
    pub fn preview_inflection(&self, entry: &LemmaEntry) -> Result<Vec<InflectedForm>, ServiceError> {
        let violations = entry.violations();
        if !violations.is_empty() {
            return Err(ServiceError::Invalid(violations));
        }
        match expand_entry(entry, &self.paradigms)?.inflection {
            Inflection::Explicit(forms) => Ok(forms),
            _ => Ok(Vec::new()),
        }
    }

    pub fn paradigms(&self) -> Vec<ParadigmSummary> {
        self.paradigms
            .iter()
            .map(|p| ParadigmSummary {
                name: p.name.clone(),
                rule_count: p.rules.len(),
            })
            .collect()
    }

    /// Writes canonical XML next to the working file, then renames it over
    /// the working file. On failure the old file and the dirty flag stay.
    pub fn persist(&self) -> Result<usize, ServiceError> {
        self.write(|w| {
            let path = w.source_path.clone();
            let io_err = |source| ServiceError::Io {
                path: path.clone(),
                source,
            };
            let bytes = xml::write_lexicon(&w.lexicon);
            let dir = match path.parent() {
                Some(p) if !p.as_os_str().is_empty() => p,
                _ => Path::new("."),
            };
            let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
            tmp.write_all(&bytes).map_err(io_err)?;
            tmp.as_file().sync_all().map_err(io_err)?;
            if let Some(hook) = self.before_rename.lock().unwrap().as_ref() {
                hook(tmp.path()).map_err(io_err)?;
            }
            tmp.persist(&path).map_err(|e| io_err(e.error))?;
            w.dirty = false;
            Ok(bytes.len())
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InflectionJson {
    Paradigm { paradigm: String },
    Forms { forms: Vec<InflectedForm> },
}

/// Wire form of a lemma entry.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntryJson {
    #[serde(default)]
    pub id: Option<EntryId>,
    pub lemma: String,
    pub pos: String,
    #[serde(default)]
    pub features: Vec<Feature>,
    #[serde(default)]
    pub inflection: Option<InflectionJson>,
}

impl From<&LemmaEntry> for EntryJson {
    fn from(e: &LemmaEntry) -> Self {
        EntryJson {
            id: Some(e.id),
            lemma: e.lemma.clone(),
            pos: e.pos.name().to_string(),
            features: e.features.clone(),
            inflection: match &e.inflection {
                Inflection::Paradigm(p) => Some(InflectionJson::Paradigm { paradigm: p.clone() }),
                Inflection::Explicit(forms) => Some(InflectionJson::Forms { forms: forms.clone() }),
                Inflection::None => None,
            },
        }
    }
}

impl From<EntryJson> for LemmaEntry {
    fn from(e: EntryJson) -> Self {
        let inflection = match e.inflection {
            Some(InflectionJson::Paradigm { paradigm }) => Inflection::Paradigm(paradigm),
            Some(InflectionJson::Forms { forms }) => Inflection::Explicit(forms),
            None => Inflection::None,
        };
        LemmaEntry::new(e.id.unwrap_or(0), e.lemma, e.pos, e.features, inflection)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PageJson {
    pub total: usize,
    pub offset: usize,
    pub limit: usize,
    pub entries: Vec<EntryJson>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreviewJson {
    pub forms: Vec<InflectedForm>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SaveJson {
    pub bytes: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorsJson {
    pub errors: Vec<Violation>,
}

#[derive(Debug, Deserialize)]
struct PageQuery {
    #[serde(default)]
    offset: usize,
    #[serde(default = "default_limit")]
    limit: usize,
    q: Option<String>,
}

fn default_limit() -> usize {
    50
}

fn errors(status: StatusCode, errors: Vec<Violation>) -> Response {
    (status, Json(ErrorsJson { errors })).into_response()
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        match self {
            ServiceError::NotFound(_) => errors(StatusCode::NOT_FOUND, vec![Violation::new("id", self.to_string())]),
            ServiceError::Invalid(v) => errors(StatusCode::UNPROCESSABLE_ENTITY, v),
            ServiceError::Inflection(e) => {
                errors(StatusCode::UNPROCESSABLE_ENTITY, vec![Violation::new("inflection", e.to_string())])
            }
            ServiceError::InvalidLimit => errors(StatusCode::BAD_REQUEST, vec![Violation::new("limit", self.to_string())]),
            other => errors(StatusCode::INTERNAL_SERVER_ERROR, vec![Violation::new("file", other.to_string())]),
        }
    }
}

fn parse_entry(body: &Bytes) -> Result<LemmaEntry, ServiceError> {
    serde_json::from_slice::<EntryJson>(body)
        .map(LemmaEntry::from)
        .map_err(|e| ServiceError::Invalid(vec![Violation::new("body", e.to_string())]))
}

type Shared = State<Arc<LexiconStore>>;

async fn list(State(store): Shared, Query(q): Query<PageQuery>) -> Result<Json<PageJson>, ServiceError> {
    let page = store.list_entries(q.offset, q.limit, q.q.as_deref())?;
    Ok(Json(PageJson {
        total: page.total,
        offset: page.offset,
        limit: page.limit,
        entries: page.entries.iter().map(EntryJson::from).collect(),
    }))
}

async fn fetch(State(store): Shared, UrlPath(id): UrlPath<EntryId>) -> Result<Json<EntryJson>, ServiceError> {
    store.get(id).map(|e| Json(EntryJson::from(&e))).ok_or(ServiceError::NotFound(id))
}

async fn create(State(store): Shared, body: Bytes) -> Result<(StatusCode, Json<EntryJson>), ServiceError> {
    let stored = store.create_entry(parse_entry(&body)?)?;
    Ok((StatusCode::CREATED, Json(EntryJson::from(&stored))))
}

async fn update(State(store): Shared, UrlPath(id): UrlPath<EntryId>, body: Bytes) -> Result<Json<EntryJson>, ServiceError> {
    if store.get(id).is_none() {
        return Err(ServiceError::NotFound(id));
    }
    let stored = store.update_entry(id, parse_entry(&body)?)?;
    Ok(Json(EntryJson::from(&stored)))
}

async fn remove(State(store): Shared, UrlPath(id): UrlPath<EntryId>) -> Result<StatusCode, ServiceError> {
    if store.delete_entry(id) {
        Ok(StatusCode::NO_CONTENT)
    } else {
        Err(ServiceError::NotFound(id))
    }
}

async fn preview(State(store): Shared, body: Bytes) -> Result<Json<PreviewJson>, ServiceError> {
    let forms = store.preview_inflection(&parse_entry(&body)?)?;
    Ok(Json(PreviewJson { forms }))
}

async fn paradigms(State(store): Shared) -> Json<Vec<ParadigmSummary>> {
    Json(store.paradigms())
}

async fn save(State(store): Shared) -> Result<Json<SaveJson>, ServiceError> {
    let bytes = tokio::task::spawn_blocking(move || store.persist())
        .await
        .map_err(|e| ServiceError::Io {
            path: PathBuf::new(),
            source: io::Error::other(e),
        })??;
    Ok(Json(SaveJson { bytes }))
}

const PLACEHOLDER_PAGE: &str = "<!doctype html>
<title>lexkit</title>
<p>Lexicon service. JSON API under <code>/api/entries</code>, <code>/api/paradigms</code>,
<code>/api/preview-inflection</code> and <code>/api/save</code>.</p>
";

/// The HTTP API, plus static files from `assets` at `/` when given.
pub fn router(store: Arc<LexiconStore>, assets: Option<&Path>) -> Router {
    let api = Router::new()
        .route("/api/entries", get(list).post(create))
        .route("/api/entries/{id}", get(fetch).put(update).delete(remove))
        .route("/api/preview-inflection", post(preview))
        .route("/api/paradigms", get(paradigms))
        .route("/api/save", post(save))
        .with_state(store);
    match assets {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api.route("/", get(|| async { Html(PLACEHOLDER_PAGE) })),
    }
}

/// A server running on its own thread and runtime.
pub struct RunningService {
    pub addr: SocketAddr,
    shutdown: Option<tokio::sync::oneshot::Sender<()>>,
    thread: Option<JoinHandle<io::Result<()>>>,
}

impl RunningService {
    /// Blocks until the server stops on its own.
    pub fn wait(mut self) -> io::Result<()> {
        self.thread.take().expect("joined once").join().map_err(|_| io::Error::other("server thread panicked"))?
    }

    pub fn stop(mut self) -> io::Result<()> {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        self.wait()
    }
}

impl Drop for RunningService {
    fn drop(&mut self) {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}

/// Binds `addr` (port 0 picks a free port) and serves on a background thread.
pub fn start(store: Arc<LexiconStore>, addr: SocketAddr, assets: Option<PathBuf>) -> io::Result<RunningService> {
    let runtime = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
    let listener = runtime.block_on(tokio::net::TcpListener::bind(addr))?;
    let addr = listener.local_addr()?;
    let (tx, rx) = tokio::sync::oneshot::channel::<()>();
    let app = router(store, assets.as_deref());
    let thread = std::thread::spawn(move || {
        runtime.block_on(async move {
            axum::serve(listener, app)
                .with_graceful_shutdown(async move {
                    let _ = rx.await;
                })
                .await
        })
    });
    Ok(RunningService {
        addr,
        shutdown: Some(tx),
        thread: Some(thread),
    })
}
