use std::io;
use std::net::SocketAddr;

use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use factcheck_core::api::ErrorBody;
use factcheck_core::kg::KgError;
use factcheck_core::media::MediaError;
use factcheck_core::record::IllegalTransition;
use factcheck_core::veracity::VeracityError;

use crate::persist::PersistError;

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error("{0}")]
    Validation(String),
    #[error("unsupported media type `{0}`")]
    UnsupportedMediaType(String),
    #[error("{0} not found")]
    NotFound(String),
    #[error(transparent)]
    IllegalTransition(#[from] IllegalTransition),
    #[error("{0}")]
    Conflict(String),
    #[error("upstream failure: {0}")]
    Upstream(String),
    #[error(transparent)]
    Persist(#[from] PersistError),
    #[error("cannot bind {addr}: {source}")]
    Bind { addr: SocketAddr, source: io::Error },
    #[error("invalid config: {0}")]
    Config(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl ServiceError {
    pub fn code(&self) -> &'static str {
        match self {
            Self::Validation(_) => "validation",
            Self::UnsupportedMediaType(_) => "unsupported_media_type",
            Self::NotFound(_) => "not_found",
            Self::IllegalTransition(_) => "illegal_transition",
            Self::Conflict(_) => "conflict",
            Self::Upstream(_) => "upstream",
            Self::Persist(_) => "persistence",
            Self::Bind { .. } => "bind",
            Self::Config(_) => "config",
            Self::Internal(_) => "internal",
        }
    }

    pub fn status(&self) -> StatusCode {
        match self {
            Self::Validation(_) | Self::UnsupportedMediaType(_) => StatusCode::BAD_REQUEST,
            Self::NotFound(_) => StatusCode::NOT_FOUND,
            Self::IllegalTransition(_) | Self::Conflict(_) => StatusCode::CONFLICT,
            Self::Upstream(_) => StatusCode::BAD_GATEWAY,
            Self::Persist(_) | Self::Bind { .. } | Self::Config(_) | Self::Internal(_) => {
                StatusCode::INTERNAL_SERVER_ERROR
            }
        }
    }
}

impl From<MediaError> for ServiceError {
    fn from(e: MediaError) -> Self {
        match e {
            MediaError::UnsupportedMediaType(t) => Self::UnsupportedMediaType(t),
            other => Self::Validation(other.to_string()),
        }
    }
}

impl From<KgError> for ServiceError {
    fn from(e: KgError) -> Self {
        Self::Validation(e.to_string())
    }
}

impl From<VeracityError> for ServiceError {
    fn from(e: VeracityError) -> Self {
        Self::Validation(e.to_string())
    }
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        if self.status().is_server_error() {
            log::error!("{self}");
        }
        let body = ErrorBody { error: self.code().into(), message: self.to_string() };
        (self.status(), Json(body)).into_response()
    }
}
