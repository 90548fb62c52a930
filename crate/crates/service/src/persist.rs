//! File-based persistence of the curation state.
//!
//! Layout of a state directory:
//!
//! | file | content |
//! |------|---------|
//! | `bootstrap.ttl`, `bootstrap.annotations.jsonl` | imported ground truth |
//! | `kg.ttl`, `kg.annotations.jsonl` | live graph |
//! | `documents.jsonl` | ingested documents |
//! | `records.jsonl` | statement records |
//! | `events.jsonl` | review log |
//!
//! Files are replaced atomically through a temporary file and a rename.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use factcheck_core::kg::{parse_turtle, read_sidecar, serialize_turtle, write_sidecar};
use factcheck_core::record::ReviewEvent;
use factcheck_core::{KnowledgeGraph, StatementRecord, Term};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::state::{CurationState, StoredDocument};

pub const BOOTSTRAP_TTL: &str = "bootstrap.ttl";
pub const BOOTSTRAP_SIDECAR: &str = "bootstrap.annotations.jsonl";
pub const KG_TTL: &str = "kg.ttl";
pub const KG_SIDECAR: &str = "kg.annotations.jsonl";
pub const DOCUMENTS: &str = "documents.jsonl";
pub const RECORDS: &str = "records.jsonl";
pub const EVENTS: &str = "events.jsonl";
pub const AUDIT: &str = "audit.jsonl";

#[derive(Debug, thiserror::Error)]
pub enum PersistError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("corrupt state in {file} at line {line}: {message}")]
    CorruptState { file: String, line: usize, message: String },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> PersistError + '_ {
    move |source| PersistError::Io { path: path.to_path_buf(), source }
}

fn write_atomic(dir: &Path, name: &str, content: &str) -> Result<(), PersistError> {
    let path = dir.join(name);
    let tmp = dir.join(format!(".{name}.tmp"));
    let mut f = fs::File::create(&tmp).map_err(io_err(&tmp))?;
    f.write_all(content.as_bytes()).map_err(io_err(&tmp))?;
    f.sync_all().map_err(io_err(&tmp))?;
    fs::rename(&tmp, &path).map_err(io_err(&path))
}

fn json_lines<'a, T: Serialize + 'a>(items: impl IntoIterator<Item = &'a T>) -> String {
    let mut out = String::new();
    for item in items {
        out.push_str(&serde_json::to_string(item).expect("state types serialize"));
        out.push('\n');
    }
    out
}

pub fn persist(state: &CurationState, dir: &Path) -> Result<(), PersistError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    write_atomic(dir, BOOTSTRAP_TTL, &serialize_turtle(&state.bootstrap))?;
    write_atomic(dir, BOOTSTRAP_SIDECAR, &write_sidecar(&state.bootstrap))?;
    write_atomic(dir, KG_TTL, &serialize_turtle(&state.kg))?;
    write_atomic(dir, KG_SIDECAR, &write_sidecar(&state.kg))?;
    write_atomic(dir, DOCUMENTS, &json_lines(state.documents.values()))?;
    write_atomic(dir, RECORDS, &json_lines(state.records.values()))?;
    write_atomic(dir, EVENTS, &json_lines(&state.events))
}

fn read_optional(dir: &Path, name: &str) -> Result<Option<String>, PersistError> {
    let path = dir.join(name);
    match fs::read_to_string(&path) {
        Ok(s) => Ok(Some(s)),
        Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(PersistError::Io { path, source: e }),
    }
}

fn corrupt(file: &str, line: usize, message: impl ToString) -> PersistError {
    PersistError::CorruptState { file: file.to_string(), line, message: message.to_string() }
}

fn read_lines<T: DeserializeOwned>(dir: &Path, name: &str) -> Result<Vec<T>, PersistError> {
    let Some(text) = read_optional(dir, name)? else { return Ok(Vec::new()) };
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(line).map_err(|e| corrupt(name, i + 1, e))?);
    }
    if !text.is_empty() && !text.ends_with('\n') {
        return Err(corrupt(name, text.lines().count(), "truncated final line"));
    }
    Ok(out)
}

fn read_graph(dir: &Path, ttl_name: &str, sidecar_name: &str) -> Result<KnowledgeGraph, PersistError> {
    let mut graph = KnowledgeGraph::new();
    let ttl = read_optional(dir, ttl_name)?.unwrap_or_default();
    let sidecar = read_optional(dir, sidecar_name)?.unwrap_or_default();
    let (triples, prefixes) = parse_turtle(&ttl, None).map_err(|e| {
        let line = match &e {
            factcheck_core::kg::TurtleError::Syntax { line, .. }
            | factcheck_core::kg::TurtleError::UnknownPrefix { line, .. } => *line,
        };
        corrupt(ttl_name, line, e)
    })?;
    graph.add_prefixes(&prefixes);
    let entries = read_sidecar(&sidecar).map_err(|e| corrupt(sidecar_name, e.line, e.message))?;
    for (i, (triple, annotation)) in entries.into_iter().enumerate() {
        if !triples.contains(&triple) {
            return Err(corrupt(sidecar_name, i + 1, format!("annotated triple {triple} is not in {ttl_name}")));
        }
        graph.insert(triple, annotation).map_err(|e| corrupt(sidecar_name, i + 1, e))?;
    }
    if let Some(missing) = triples.iter().find(|t| !graph.contains(t)) {
        return Err(corrupt(sidecar_name, 0, format!("no annotation for {missing}")));
    }
    Ok(graph)
}

/// Loads a state directory. A missing or empty directory gives a fresh
/// state.
pub fn restore(dir: &Path, negations: &[(Term, Term)]) -> Result<CurationState, PersistError> {
    let mut state = CurationState {
        bootstrap: read_graph(dir, BOOTSTRAP_TTL, BOOTSTRAP_SIDECAR)?,
        kg: read_graph(dir, KG_TTL, KG_SIDECAR)?,
        ..CurationState::default()
    };
    for (a, b) in negations {
        for g in [&mut state.bootstrap, &mut state.kg] {
            g.add_negation(a.clone(), b.clone()).map_err(|e| corrupt("config", 0, e))?;
        }
    }
    let documents: Vec<StoredDocument> = read_lines(dir, DOCUMENTS)?;
    state.documents = documents.into_iter().map(|d| (d.document.media_id.clone(), d)).collect();
    let records: Vec<StatementRecord> = read_lines(dir, RECORDS)?;
    state.records = records.into_iter().map(|r| (r.record_id.clone(), r)).collect();
    state.events = read_lines::<ReviewEvent>(dir, EVENTS)?;
    for (i, e) in state.events.iter().enumerate() {
        if e.seq != i as u64 + 1 {
            return Err(corrupt(EVENTS, i + 1, format!("expected sequence number {}, found {}", i + 1, e.seq)));
        }
    }
    Ok(state)
}
