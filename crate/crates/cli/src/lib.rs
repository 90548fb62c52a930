//! `factcheck` command line. Every command talks to the curation service:
//! a remote one given by `--server`, or an in-process instance over the
//! local state directory.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use factcheck_client::{Client, ClientError};
use factcheck_core::api::{ImportRequest, SubmitDocumentRequest};
use factcheck_core::record::{ExtractionMode, ReviewAction};
use factcheck_core::veracity::Evidence;
use factcheck_core::{MediaId, RecordId, ReviewState, TrustChannel};
use factcheck_service::{RunningService, Service, ServiceConfig, ServiceError};
use serde::Serialize;
use serde_json::json;

#[derive(Debug, Parser)]
#[command(name = "factcheck", version, about = "Check claims in media against a trusted knowledge graph")]
pub struct Cli {
    /// Base URL of a running service. Without it the command runs against
    /// the local state directory.
    #[arg(long, global = true, value_name = "URL")]
    pub server: Option<String>,
    /// Service config file (JSON).
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Overrides the config's state directory.
    #[arg(long, global = true, value_name = "DIR")]
    pub state_dir: Option<PathBuf>,
    /// Emit one JSON document per line.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Submit documents (files or http(s) URLs).
    Ingest(IngestArgs),
    /// Run claim extraction on an ingested document.
    Extract {
        media_id: String,
        #[arg(long, value_enum)]
        mode: Mode,
    },
    /// Check a single claim against the knowledge graph.
    Check { subject: String, predicate: String, object: String },
    /// Print the scored report of a document.
    Score { media_id: String },
    /// Approve, reject or reopen an extracted statement.
    Review {
        record_id: String,
        #[arg(value_enum)]
        action: Action,
        #[arg(long = "by", value_name = "NAME")]
        reviewer: String,
        #[arg(long)]
        note: Option<String>,
    },
    /// List statement records.
    Records {
        #[arg(long, value_enum)]
        state: Option<StateFilter>,
        #[arg(long)]
        media_id: Option<String>,
    },
    /// Load Turtle ground truth as pre-approved statements.
    KgImport {
        ttl: PathBuf,
        #[arg(long)]
        sidecar: Option<PathBuf>,
    },
    /// Write the knowledge graph as Turtle.
    KgExport {
        path: PathBuf,
        /// Also write the annotation sidecar.
        #[arg(long)]
        sidecar: Option<PathBuf>,
    },
    /// Run the HTTP service until interrupted.
    Serve {
        #[arg(long)]
        port: Option<u16>,
    },
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[arg(required = true, value_name = "PATH|URL")]
    pub inputs: Vec<String>,
    #[arg(long, value_enum)]
    pub trust: Trust,
    /// Extract claims right away.
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    /// Documents processed concurrently.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
    pub jobs: u16,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Trust {
    Trusted,
    Untrusted,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Mode {
    Rule,
    Remote,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Action {
    Approve,
    Reject,
    Reopen,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum StateFilter {
    Pending,
    Approved,
    Rejected,
}

impl From<Trust> for TrustChannel {
    fn from(t: Trust) -> Self {
        match t {
            Trust::Trusted => TrustChannel::TrustedSource,
            Trust::Untrusted => TrustChannel::UntrustedMedia,
        }
    }
}

impl From<Mode> for ExtractionMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Rule => ExtractionMode::Rule,
            Mode::Remote => ExtractionMode::Remote,
        }
    }
}

impl From<Action> for ReviewAction {
    fn from(a: Action) -> Self {
        match a {
            Action::Approve => ReviewAction::Approve,
            Action::Reject => ReviewAction::Reject,
            Action::Reopen => ReviewAction::Reopen,
        }
    }
}

impl From<StateFilter> for ReviewState {
    fn from(s: StateFilter) -> Self {
        match s {
            StateFilter::Pending => ReviewState::Pending,
            StateFilter::Approved => ReviewState::Approved,
            StateFilter::Rejected => ReviewState::Rejected,
        }
    }
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

#[derive(Debug)]
enum Failure {
    Validation(String),
    Runtime(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Self::Validation(_) => EXIT_VALIDATION,
            Self::Runtime(_) => EXIT_RUNTIME,
        }
    }

    fn message(&self) -> &str {
        match self {
            Self::Validation(m) | Self::Runtime(m) => m,
        }
    }
}

impl From<ClientError> for Failure {
    fn from(e: ClientError) -> Self {
        if e.is_rejection() {
            Self::Validation(e.to_string())
        } else {
            Self::Runtime(e.to_string())
        }
    }
}

impl From<ServiceError> for Failure {
    fn from(e: ServiceError) -> Self {
        match e {
            ServiceError::Config(_) | ServiceError::Validation(_) => Self::Validation(e.to_string()),
            other => Self::Runtime(other.to_string()),
        }
    }
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code.
pub fn run(args: Vec<String>, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let runtime = match tokio::runtime::Builder::new_multi_thread().enable_all().build() {
        Ok(rt) => rt,
        Err(e) => {
            let _ = writeln!(err, "error: cannot start runtime: {e}");
            return EXIT_RUNTIME;
        }
    };
    runtime.block_on(run_async(args, out, err))
}

pub async fn run_async(args: Vec<String>, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let json_requested = args.iter().any(|a| a == "--json");
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = write!(out, "{e}");
            return EXIT_OK;
        }
        Err(e) => {
            report_failure(err, json_requested, "usage", &e.to_string());
            return EXIT_VALIDATION;
        }
    };
    let json = cli.json;
    match execute(cli, out, err).await {
        Ok(code) => code,
        Err(f) => {
            let kind = if f.code() == EXIT_VALIDATION { "validation" } else { "runtime" };
            report_failure(err, json, kind, f.message());
            f.code()
        }
    }
}

fn report_failure(err: &mut dyn Write, json: bool, kind: &str, message: &str) {
    let message = message.trim_end();
    if json {
        let _ = writeln!(err, "{}", json!({ "error": kind, "message": message }));
    } else if kind == "usage" {
        let _ = writeln!(err, "{message}");
    } else {
        let _ = writeln!(err, "error: {message}");
    }
}

fn load_config(cli: &Cli) -> Result<ServiceConfig, Failure> {
    let mut config = match &cli.config {
        Some(path) => ServiceConfig::load(path)?,
        None => ServiceConfig::default(),
    };
    if let Some(dir) = &cli.state_dir {
        config.state_dir = dir.clone();
    }
    Ok(config)
}

async fn execute(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    if let Command::Serve { port } = &cli.command {
        let mut config = load_config(&cli)?;
        if let Some(p) = port {
            config.port = *p;
        }
        factcheck_service::serve(config).await?;
        return Ok(EXIT_OK);
    }
    match &cli.server {
        Some(url) => {
            let client = Client::new(url).map_err(|e| Failure::Validation(e.to_string()))?;
            dispatch(&cli, &client, out, err).await
        }
        None => {
            let service = Service::new(load_config(&cli)?)?;
            let running = RunningService::bind(service, ([127, 0, 0, 1], 0).into()).await?;
            let client = Client::new(&running.base_url()).map_err(|e| Failure::Runtime(e.to_string()))?;
            let result = dispatch(&cli, &client, out, err).await;
            running.shutdown().await?;
            result
        }
    }
}

struct Printer<'a> {
    out: &'a mut dyn Write,
    json: bool,
}

impl Printer<'_> {
    /// JSON mode prints `value`; text mode prints `text`.
    fn emit(&mut self, value: &impl Serialize, text: impl FnOnce() -> String) -> Result<(), Failure> {
        let line = if self.json {
            serde_json::to_string(value).map_err(|e| Failure::Runtime(e.to_string()))?
        } else {
            text()
        };
        writeln!(self.out, "{line}").map_err(|e| Failure::Runtime(e.to_string()))
    }
}

fn media_id(raw: &str) -> Result<MediaId, Failure> {
    raw.parse().map_err(|e: factcheck_core::media::MediaError| Failure::Validation(e.to_string()))
}

fn read_file(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))
}

async fn dispatch(cli: &Cli, client: &Client, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    let mut p = Printer { out, json: cli.json };
    match &cli.command {
        Command::Ingest(args) => return ingest(client, args, &mut p, err, cli.json).await,
        Command::Extract { media_id: id, mode } => {
            let r = client.extract(&media_id(id)?, (*mode).into()).await?;
            p.emit(&r, || {
                format!(
                    "{}  {} records, {} rejected, {} failed sentences",
                    r.media_id,
                    r.record_ids.len(),
                    r.rejected,
                    r.failures.len()
                )
            })?;
        }
        Command::Check { subject, predicate, object } => {
            let r = client.check(subject, predicate, object).await?;
            p.emit(&r, || {
                let mut text = format!("{:?}  veracity {:.6}  {}", r.verdict.verdict, r.verdict.veracity, r.claim);
                match &r.verdict.evidence {
                    Evidence::ExactMatch { annotation, .. } | Evidence::NegationMatch { annotation, .. } => {
                        if !annotation.source_refs.is_empty() {
                            text.push_str(&format!("\n  sources: {}", annotation.source_refs.join(", ")));
                        }
                    }
                    Evidence::Path(path) => {
                        let nodes: Vec<&str> = path.nodes.iter().map(|n| n.local_name()).collect();
                        text.push_str(&format!("\n  path: {}", nodes.join(" - ")));
                    }
                    Evidence::None => {}
                }
                text
            })?;
        }
        Command::Score { media_id: id } => {
            let r = client.report(&media_id(id)?).await?;
            p.emit(&r, || match &r.report {
                None => format!("{}  no statements", r.media_id),
                Some(report) => {
                    let mut lines: Vec<String> = report
                        .statements
                        .iter()
                        .map(|s| format!("{}  {:?}  {:.6}", s.record_id, s.verdict, s.score.s_acc))
                        .collect();
                    lines.push(format!("mean {:.6}", report.mean));
                    lines.join("\n")
                }
            })?;
        }
        Command::Review { record_id, action, reviewer, note } => {
            let r = client
                .review(&RecordId::from(record_id.as_str()), (*action).into(), reviewer, note.as_deref())
                .await?;
            p.emit(&r, || format!("{}  {:?}  by {}", r.record_id, r.review_state, reviewer))?;
        }
        Command::Records { state, media_id: id } => {
            let id = id.as_deref().map(media_id).transpose()?;
            let records = client.records(state.map(Into::into), id.as_ref()).await?;
            for r in &records {
                p.emit(r, || format!("{}  {:?}  {}", r.record_id, r.review_state, r.triple))?;
            }
        }
        Command::KgImport { ttl, sidecar } => {
            let req = ImportRequest {
                turtle: read_file(ttl)?,
                sidecar: sidecar.as_deref().map(read_file).transpose()?,
                source: ttl.file_name().map(|n| n.to_string_lossy().into_owned()),
            };
            let r = client.import(&req).await?;
            p.emit(&r, || format!("imported {} new, {} merged, {} triples in graph", r.inserted, r.merged, r.triples))?;
        }
        Command::KgExport { path, sidecar } => {
            let turtle = client.export_turtle().await?;
            std::fs::write(path, &turtle).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))?;
            if let Some(side) = sidecar {
                let annotations = client.export_annotations().await?;
                std::fs::write(side, annotations).map_err(|e| Failure::Runtime(format!("{}: {e}", side.display())))?;
            }
            let triples = client.stats().await?.triples;
            let value = json!({ "path": path, "triples": triples });
            p.emit(&value, || format!("wrote {triples} triples to {}", path.display()))?;
        }
        Command::Serve { .. } => unreachable!("handled before dispatch"),
    }
    Ok(EXIT_OK)
}

fn is_url(input: &str) -> bool {
    input.starts_with("http://") || input.starts_with("https://")
}

/// Submits every input, at most `--jobs` at a time. Results are printed in
/// input order; a failing input does not stop the others.
async fn ingest(
    client: &Client,
    args: &IngestArgs,
    p: &mut Printer<'_>,
    err: &mut dyn Write,
    json: bool,
) -> Result<i32, Failure> {
    let limit = Arc::new(tokio::sync::Semaphore::new(args.jobs as usize));
    let mut tasks = Vec::with_capacity(args.inputs.len());
    for input in &args.inputs {
        let (client, limit, input) = (client.clone(), limit.clone(), input.clone());
        let (trust, mode) = (args.trust, args.mode);
        tasks.push(tokio::spawn(async move {
            let _permit = limit.acquire_owned().await.expect("semaphore is never closed");
            let mut req = SubmitDocumentRequest {
                url: None,
                text: None,
                filename: None,
                media_type: None,
                trust_channel: trust.into(),
                mode: mode.map(Into::into),
            };
            if is_url(&input) {
                req.url = Some(input.clone());
            } else {
                req.text = Some(read_file(Path::new(&input))?);
                req.filename = Some(input.clone());
            }
            Ok::<_, Failure>(client.submit_document(&req).await?)
        }));
    }
    let mut code = EXIT_OK;
    for (input, task) in args.inputs.iter().zip(tasks) {
        match task.await.map_err(|e| Failure::Runtime(e.to_string()))? {
            Ok(r) => {
                let value = json!({ "input": input, "media_id": r.media_id, "record_ids": r.record_ids,
                                    "rejected": r.rejected, "failures": r.failures });
                p.emit(&value, || format!("{}  {} records  {input}", r.media_id, r.record_ids.len()))?;
            }
            Err(f) => {
                let kind = if f.code() == EXIT_VALIDATION { "validation" } else { "runtime" };
                if json {
                    let _ = writeln!(err, "{}", json!({ "error": kind, "input": input, "message": f.message() }));
                } else {
                    let _ = writeln!(err, "error: {input}: {}", f.message());
                }
                code = code.max(f.code());
            }
        }
    }
    Ok(code)
}
