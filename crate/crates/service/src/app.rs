use std::collections::BTreeMap;
use std::io;
use std::net::SocketAddr;
use std::path::Path;
use std::sync::{Arc, RwLock};
use std::time::Duration;

use axum::extract::rejection::JsonRejection;
use axum::extract::{DefaultBodyLimit, Path as UrlPath, Query, State};
use axum::http::{header, HeaderValue};
use axum::response::IntoResponse;
use axum::routing::{get, post};
use axum::{Json, Router};
use chrono::Utc;
use factcheck_core::align::load_tables;
use factcheck_core::api::{
    CheckRequest, CheckResponse, DocumentReportView, DocumentSummary, ExtractRequest, ImportRequest,
    ImportResponse, KgStats, ReviewRequest, SubmitDocumentRequest, SubmitDocumentResponse,
};
use factcheck_core::extraction::{
    extract_document, AuditLog, DocumentExtraction, HttpTransport, RemoteExtractor, RuleBasedExtractor,
};
use factcheck_core::kg::{parse_turtle, read_sidecar, serialize_turtle, write_sidecar};
use factcheck_core::media::{segment_sentences, MediaSource, MediaType};
use factcheck_core::record::ExtractionMode;
use factcheck_core::scoring::validate_weights;
use factcheck_core::veracity::check_veracity;
use factcheck_core::{
    AlignmentTables, KnowledgeGraph, MediaDocument, MediaId, MetricRegistry, RecordId, ReviewState,
    StatementAnnotation, StatementRecord, Term, Triple, TrustChannel,
};
use serde::Deserialize;
use tokio::sync::{mpsc, oneshot};
use tower_http::cors::{Any, CorsLayer};

use crate::config::ServiceConfig;
use crate::error::ServiceError;
use crate::fetch::{fetch, http_client};
use crate::persist::{self, AUDIT};
use crate::state::CurationState;

type Job = Box<dyn FnOnce(&mut Writer) + Send>;

/// Sole owner of the mutable state. Runs on its own thread.
struct Writer {
    state: Arc<CurationState>,
    dir: std::path::PathBuf,
    snapshot: Arc<RwLock<Arc<CurationState>>>,
}

impl Writer {
    /// Applies `f` to a copy, persists it, then publishes it. On any error
    /// the previous state stays in place.
    fn commit<R>(
        &mut self,
        f: impl FnOnce(&mut CurationState) -> Result<R, ServiceError>,
    ) -> Result<R, ServiceError> {
        let mut next = (*self.state).clone();
        let out = f(&mut next)?;
        persist::persist(&next, &self.dir)?;
        self.state = Arc::new(next);
        *self.snapshot.write().unwrap_or_else(|p| p.into_inner()) = self.state.clone();
        Ok(out)
    }
}

struct Inner {
    config: ServiceConfig,
    tables: AlignmentTables,
    registry: MetricRegistry,
    snapshot: Arc<RwLock<Arc<CurationState>>>,
    jobs: mpsc::UnboundedSender<Job>,
    http: reqwest::Client,
}

/// The curation service. Cheap to clone; all clones share one state.
#[derive(Clone)]
pub struct Service {
    inner: Arc<Inner>,
}

fn resolve_negations(
    map: &BTreeMap<String, String>,
    tables: &AlignmentTables,
) -> Vec<(Term, Term)> {
    map.iter().map(|(a, b)| (tables.align_predicate(a), tables.align_predicate(b))).collect()
}

impl Service {
    /// Loads tables, validates the config and restores `state_dir`.
    pub fn new(config: ServiceConfig) -> Result<Self, ServiceError> {
        config.proximity.validate().map_err(|e| ServiceError::Config(e.to_string()))?;
        let registry = MetricRegistry::default();
        validate_weights(&config.weights, &registry).map_err(|e| ServiceError::Config(e.to_string()))?;
        if let Some(extractor) = &config.extractor {
            extractor.validate().map_err(ServiceError::Config)?;
        }
        let tables = match &config.tables_path {
            Some(path) => load_tables(path).map_err(|e| ServiceError::Config(e.to_string()))?,
            None => AlignmentTables::default(),
        };
        let negations = resolve_negations(&config.negation_map, &tables);
        std::fs::create_dir_all(&config.state_dir).map_err(|source| {
            ServiceError::Persist(persist::PersistError::Io { path: config.state_dir.clone(), source })
        })?;
        CurationState::new(&negations).map_err(|e| ServiceError::Config(format!("negation_map: {e}")))?;
        let state = persist::restore(&config.state_dir, &negations)?;

        let state = Arc::new(state);
        let snapshot = Arc::new(RwLock::new(state.clone()));
        let (jobs, mut rx) = mpsc::unbounded_channel::<Job>();
        let mut writer = Writer { state, dir: config.state_dir.clone(), snapshot: snapshot.clone() };
        std::thread::Builder::new()
            .name("factcheck-writer".into())
            .spawn(move || {
                while let Some(job) = rx.blocking_recv() {
                    job(&mut writer);
                }
            })
            .map_err(|e| ServiceError::Internal(e.to_string()))?;

        Ok(Self { inner: Arc::new(Inner { config, tables, registry, snapshot, jobs, http: http_client() }) })
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.inner.config
    }

    /// Consistent read-only view of the current state.
    pub fn snapshot(&self) -> Arc<CurationState> {
        self.inner.snapshot.read().unwrap_or_else(|p| p.into_inner()).clone()
    }

    async fn commit<R: Send + 'static>(
        &self,
        f: impl FnOnce(&mut CurationState) -> Result<R, ServiceError> + Send + 'static,
    ) -> Result<R, ServiceError> {
        let (tx, rx) = oneshot::channel();
        let job: Job = Box::new(move |w: &mut Writer| {
            let _ = tx.send(w.commit(f));
        });
        self.inner.jobs.send(job).map_err(|_| ServiceError::Internal("state writer has stopped".into()))?;
        rx.await.map_err(|_| ServiceError::Internal("state writer dropped the request".into()))?
    }

    async fn run_extraction(
        &self,
        doc: MediaDocument,
        trust_channel: TrustChannel,
        mode: ExtractionMode,
    ) -> Result<DocumentExtraction, ServiceError> {
        let inner = self.inner.clone();
        tokio::task::spawn_blocking(move || inner.extract_blocking(&doc, trust_channel, mode))
            .await
            .map_err(|e| ServiceError::Internal(e.to_string()))?
    }

    pub async fn submit(&self, req: SubmitDocumentRequest) -> Result<SubmitDocumentResponse, ServiceError> {
        let (source, media_type, raw) = match (req.url, req.text) {
            (Some(url), None) => {
                let fetched = fetch(&self.inner.http, &url).await?;
                (fetched.source, req.media_type.unwrap_or(fetched.media_type), fetched.body)
            }
            (None, Some(text)) => {
                let media_type = match (req.media_type, &req.filename) {
                    (Some(t), _) => t,
                    (None, Some(name)) => MediaType::from_path(Path::new(name))?,
                    (None, None) => MediaType::PlainText,
                };
                let source = req.filename.map_or(MediaSource::InlineText, |f| MediaSource::LocalFile(f.into()));
                (source, media_type, text.into_bytes())
            }
            _ => return Err(ServiceError::Validation("exactly one of `url` or `text` is required".into())),
        };
        let doc = MediaDocument::process(source, media_type, raw, Utc::now())?;
        let trust_channel = req.trust_channel;
        let extraction = match req.mode {
            Some(mode) => Some(self.run_extraction(doc.clone(), trust_channel, mode).await?),
            None => None,
        };
        let proximity = self.inner.config.proximity.clone();
        self.commit(move |s| {
            let media_id = doc.media_id.clone();
            s.add_document(doc, trust_channel)?;
            Ok(match extraction {
                Some(x) => SubmitDocumentResponse {
                    failures: x.failures.clone(),
                    rejected: x.rejected.len(),
                    record_ids: s.apply_extraction(&media_id, x, &proximity)?,
                    media_id,
                },
                None => SubmitDocumentResponse {
                    record_ids: s.documents[&media_id].record_ids.clone(),
                    media_id,
                    failures: Vec::new(),
                    rejected: 0,
                },
            })
        })
        .await
    }

    pub async fn extract(&self, media_id: &MediaId, mode: ExtractionMode) -> Result<SubmitDocumentResponse, ServiceError> {
        let stored = self.snapshot().document(media_id)?.clone();
        let x = self.run_extraction(stored.document, stored.trust_channel, mode).await?;
        let proximity = self.inner.config.proximity.clone();
        let media_id = media_id.clone();
        self.commit(move |s| {
            Ok(SubmitDocumentResponse {
                failures: x.failures.clone(),
                rejected: x.rejected.len(),
                record_ids: s.apply_extraction(&media_id, x, &proximity)?,
                media_id,
            })
        })
        .await
    }

    pub fn documents(&self) -> Vec<DocumentSummary> {
        self.snapshot().documents.values().map(|d| d.summary()).collect()
    }

    pub fn report(&self, media_id: &MediaId) -> Result<DocumentReportView, ServiceError> {
        let c = &self.inner.config;
        self.snapshot().report(media_id, &c.weights, &self.inner.registry, &c.proximity)
    }

    pub fn records(&self, state: Option<ReviewState>, media_id: Option<&MediaId>) -> Vec<StatementRecord> {
        self.snapshot().records_in(state, media_id)
    }

    pub fn record(&self, id: &RecordId) -> Result<StatementRecord, ServiceError> {
        self.snapshot().record(id).cloned()
    }

    pub async fn review(&self, id: RecordId, req: ReviewRequest) -> Result<StatementRecord, ServiceError> {
        let at = Utc::now();
        self.commit(move |s| s.review(&id, req.action, &req.reviewer, req.note, at)).await
    }

    /// Each name may be `<iri>`, an absolute IRI, a prefixed name known to
    /// the graph, a quoted literal (object only) or a phrase to align.
    pub fn check(&self, req: CheckRequest) -> Result<CheckResponse, ServiceError> {
        let state = self.snapshot();
        let tables = &self.inner.tables;
        let subject = resolve(&state.kg, &req.subject, "subject", |p| tables.align_node(p))?;
        let predicate = resolve(&state.kg, &req.predicate, "predicate", |p| tables.align_predicate(p))?;
        let object = match req.object.trim().strip_prefix('"').and_then(|o| o.strip_suffix('"')) {
            Some(literal) => Term::literal(literal),
            None => resolve(&state.kg, &req.object, "object", |p| tables.align_node(p))?,
        };
        let claim = Triple::new(subject, predicate, object).map_err(|e| ServiceError::Validation(e.to_string()))?;
        let verdict = check_veracity(&state.kg, &claim, &self.inner.config.proximity)?;
        Ok(CheckResponse { claim, verdict })
    }

    pub fn stats(&self) -> KgStats {
        self.snapshot().stats()
    }

    pub fn export_turtle(&self) -> String {
        serialize_turtle(&self.snapshot().kg)
    }

    pub fn export_annotations(&self) -> String {
        write_sidecar(&self.snapshot().kg)
    }

    /// Loads pre-approved ground truth. Triples without a sidecar entry get
    /// confidence 1 and the optional `source` as reference.
    pub async fn import(&self, req: ImportRequest) -> Result<ImportResponse, ServiceError> {
        let (triples, prefixes) = parse_turtle(&req.turtle, None).map_err(|e| ServiceError::Validation(e.to_string()))?;
        let mut annotated: BTreeMap<Triple, StatementAnnotation> = BTreeMap::new();
        if let Some(sidecar) = &req.sidecar {
            let entries = read_sidecar(sidecar).map_err(|e| ServiceError::Validation(e.to_string()))?;
            for (triple, annotation) in entries {
                if !triples.contains(&triple) {
                    return Err(ServiceError::Validation(format!("sidecar entry {triple} is not in the turtle input")));
                }
                annotation.validate()?;
                match annotated.get_mut(&triple) {
                    Some(existing) => existing.merge(&annotation),
                    None => {
                        annotated.insert(triple, annotation);
                    }
                }
            }
        }
        let mut entries = Vec::with_capacity(triples.len());
        if !triples.is_empty() {
            let default = StatementAnnotation::new(vec![MediaId::for_content(req.turtle.as_bytes())?], 1.0, Utc::now())
                .with_source_refs(req.source.clone());
            for triple in triples {
                let annotation = annotated.remove(&triple).unwrap_or_else(|| default.clone());
                entries.push((triple, annotation));
            }
        }
        self.commit(move |s| s.import(entries, &prefixes)).await
    }
}

impl Inner {
    fn extract_blocking(
        &self,
        doc: &MediaDocument,
        trust_channel: TrustChannel,
        mode: ExtractionMode,
    ) -> Result<DocumentExtraction, ServiceError> {
        match mode {
            ExtractionMode::Rule => {
                Ok(extract_document(doc, &RuleBasedExtractor::default(), &self.tables, trust_channel))
            }
            ExtractionMode::Remote => {
                let config = self
                    .config
                    .extractor
                    .clone()
                    .ok_or_else(|| ServiceError::Validation("no remote extractor is configured".into()))?;
                let audit_path = self.config.state_dir.join(AUDIT);
                let audit = AuditLog::open(&audit_path).map_err(|source| {
                    ServiceError::Persist(persist::PersistError::Io { path: audit_path.clone(), source })
                })?;
                let transport = HttpTransport::new(Duration::from_secs(config.timeout_secs));
                let extractor = RemoteExtractor::new(config, transport, audit);
                let out = extract_document(doc, &extractor, &self.tables, trust_channel);
                let sentences = segment_sentences(&doc.text).len();
                if sentences > 0 && out.failures.len() == sentences {
                    let first = &out.failures[0].error;
                    return Err(ServiceError::Upstream(format!(
                        "remote extraction failed for all {sentences} sentences, first error: {first}"
                    )));
                }
                Ok(out)
            }
        }
    }
}

fn resolve(
    kg: &KnowledgeGraph,
    raw: &str,
    role: &str,
    align: impl Fn(&str) -> Term,
) -> Result<Term, ServiceError> {
    let raw = raw.trim();
    if raw.is_empty() {
        return Err(ServiceError::Validation(format!("{role} must not be empty")));
    }
    Ok(kg.resolve_name(raw).unwrap_or_else(|| align(raw)))
}

fn body<T>(payload: Result<Json<T>, JsonRejection>) -> Result<T, ServiceError> {
    payload.map(|Json(t)| t).map_err(|e| ServiceError::Validation(e.body_text()))
}

fn media_id(raw: &str) -> Result<MediaId, ServiceError> {
    raw.parse().map_err(|_| ServiceError::NotFound(format!("document {raw}")))
}

async fn healthz() -> Json<serde_json::Value> {
    Json(serde_json::json!({ "status": "ok" }))
}

async fn submit_document(
    State(svc): State<Service>,
    payload: Result<Json<SubmitDocumentRequest>, JsonRejection>,
) -> Result<Json<SubmitDocumentResponse>, ServiceError> {
    Ok(Json(svc.submit(body(payload)?).await?))
}

async fn list_documents(State(svc): State<Service>) -> Json<Vec<DocumentSummary>> {
    Json(svc.documents())
}

async fn extract(
    State(svc): State<Service>,
    UrlPath(id): UrlPath<String>,
    payload: Result<Json<ExtractRequest>, JsonRejection>,
) -> Result<Json<SubmitDocumentResponse>, ServiceError> {
    let req = body(payload)?;
    Ok(Json(svc.extract(&media_id(&id)?, req.mode).await?))
}

async fn report(
    State(svc): State<Service>,
    UrlPath(id): UrlPath<String>,
) -> Result<Json<DocumentReportView>, ServiceError> {
    Ok(Json(svc.report(&media_id(&id)?)?))
}

#[derive(Debug, Deserialize)]
struct RecordQuery {
    state: Option<String>,
    media_id: Option<String>,
}

async fn list_records(
    State(svc): State<Service>,
    Query(q): Query<RecordQuery>,
) -> Result<Json<Vec<StatementRecord>>, ServiceError> {
    let state = q.state.map(|s| s.parse::<ReviewState>()).transpose().map_err(ServiceError::Validation)?;
    let media = q.media_id.as_deref().map(media_id).transpose()?;
    Ok(Json(svc.records(state, media.as_ref())))
}

async fn get_record(
    State(svc): State<Service>,
    UrlPath(id): UrlPath<String>,
) -> Result<Json<StatementRecord>, ServiceError> {
    Ok(Json(svc.record(&RecordId::from(id.as_str()))?))
}

async fn review(
    State(svc): State<Service>,
    UrlPath(id): UrlPath<String>,
    payload: Result<Json<ReviewRequest>, JsonRejection>,
) -> Result<Json<StatementRecord>, ServiceError> {
    let req = body(payload)?;
    Ok(Json(svc.review(RecordId::from(id.as_str()), req).await?))
}

async fn check(
    State(svc): State<Service>,
    payload: Result<Json<CheckRequest>, JsonRejection>,
) -> Result<Json<CheckResponse>, ServiceError> {
    Ok(Json(svc.check(body(payload)?)?))
}

async fn stats(State(svc): State<Service>) -> Json<KgStats> {
    Json(svc.stats())
}

async fn export(State(svc): State<Service>) -> impl IntoResponse {
    ([(header::CONTENT_TYPE, "text/turtle; charset=utf-8")], svc.export_turtle())
}

async fn annotations(State(svc): State<Service>) -> impl IntoResponse {
    ([(header::CONTENT_TYPE, "application/x-ndjson")], svc.export_annotations())
}

async fn import(
    State(svc): State<Service>,
    payload: Result<Json<ImportRequest>, JsonRejection>,
) -> Result<Json<ImportResponse>, ServiceError> {
    Ok(Json(svc.import(body(payload)?).await?))
}

fn cors(origin: Option<&str>) -> Result<CorsLayer, ServiceError> {
    let layer = CorsLayer::new().allow_methods(Any).allow_headers(Any);
    Ok(match origin {
        Some(o) => layer.allow_origin(
            HeaderValue::from_str(o).map_err(|e| ServiceError::Config(format!("cors_origin: {e}")))?,
        ),
        None => layer.allow_origin(Any),
    })
}

pub fn router(service: Service) -> Result<Router, ServiceError> {
    let cors = cors(service.config().cors_origin.as_deref())?;
    Ok(Router::new()
        .route("/healthz", get(healthz))
        .route("/documents", get(list_documents).post(submit_document))
        .route("/documents/{media_id}/extract", post(extract))
        .route("/documents/{media_id}/report", get(report))
        .route("/records", get(list_records))
        .route("/records/{record_id}", get(get_record))
        .route("/records/{record_id}/review", post(review))
        .route("/check", post(check))
        .route("/kg/stats", get(stats))
        .route("/kg/export", get(export))
        .route("/kg/annotations", get(annotations))
        .route("/kg/import", post(import))
        .layer(DefaultBodyLimit::max(16 * 1024 * 1024))
        .layer(cors)
        .with_state(service))
}

/// A service bound to a socket and serving in the background.
pub struct RunningService {
    addr: SocketAddr,
    service: Service,
    shutdown: oneshot::Sender<()>,
    task: tokio::task::JoinHandle<io::Result<()>>,
}

impl RunningService {
    pub async fn bind(service: Service, addr: SocketAddr) -> Result<Self, ServiceError> {
        let listener =
            tokio::net::TcpListener::bind(addr).await.map_err(|source| ServiceError::Bind { addr, source })?;
        let addr = listener.local_addr().map_err(|source| ServiceError::Bind { addr, source })?;
        let app = router(service.clone())?;
        let (shutdown, signal) = oneshot::channel::<()>();
        let task = tokio::spawn(async move {
            axum::serve(listener, app)
                .with_graceful_shutdown(async {
                    let _ = signal.await;
                })
                .await
        });
        Ok(Self { addr, service, shutdown, task })
    }

    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn base_url(&self) -> String {
        format!("http://{}", self.addr)
    }

    pub fn service(&self) -> &Service {
        &self.service
    }

    pub async fn shutdown(self) -> Result<(), ServiceError> {
        let _ = self.shutdown.send(());
        match self.task.await {
            Ok(result) => result.map_err(|e| ServiceError::Internal(e.to_string())),
            Err(e) => Err(ServiceError::Internal(e.to_string())),
        }
    }
}

/// Runs the service until Ctrl-C.
pub async fn serve(config: ServiceConfig) -> Result<(), ServiceError> {
    let addr = config.socket_addr();
    let running = RunningService::bind(Service::new(config)?, addr).await?;
    log::info!("listening on {}", running.base_url());
    tokio::signal::ctrl_c().await.map_err(|e| ServiceError::Internal(e.to_string()))?;
    running.shutdown().await
}
