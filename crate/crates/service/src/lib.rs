//! HTTP curation service: document submission, review of extracted
//! statements, claim checking and ground-truth maintenance.
//!
//! All state changes go through one writer thread and are persisted before
//! the request returns. Reads are served from an immutable snapshot.

mod app;
pub mod config;
pub mod error;
pub mod fetch;
pub mod persist;
pub mod state;

pub use app::{router, serve, RunningService, Service};
pub use config::ServiceConfig;
pub use error::ServiceError;
pub use state::CurationState;
