//! Typed async client for the curation service API.

use factcheck_core::api::{
    CheckRequest, CheckResponse, DocumentReportView, DocumentSummary, ErrorBody, ExtractRequest, ImportRequest,
    ImportResponse, KgStats, ReviewRequest, SubmitDocumentRequest, SubmitDocumentResponse,
};
use factcheck_core::record::{ExtractionMode, ReviewAction};
use factcheck_core::{MediaId, RecordId, ReviewState, StatementRecord};
use reqwest::{Method, Response, StatusCode, Url};
use serde::de::DeserializeOwned;
use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum ClientError {
    #[error("{} ({status}): {}", body.error, body.message)]
    Api { status: StatusCode, body: ErrorBody },
    #[error("invalid base URL `{0}`")]
    InvalidUrl(String),
    #[error("request failed: {0}")]
    Transport(#[from] reqwest::Error),
}

impl ClientError {
    /// True for 4xx answers, i.e. the request itself was at fault.
    pub fn is_rejection(&self) -> bool {
        matches!(self, Self::Api { status, .. } if status.is_client_error())
    }

    pub fn status(&self) -> Option<StatusCode> {
        match self {
            Self::Api { status, .. } => Some(*status),
            Self::Transport(e) => e.status(),
            Self::InvalidUrl(_) => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Client {
    base: Url,
    http: reqwest::Client,
}

impl Client {
    pub fn new(base_url: &str) -> Result<Self, ClientError> {
        let mut base = Url::parse(base_url).map_err(|_| ClientError::InvalidUrl(base_url.to_string()))?;
        if base.cannot_be_a_base() {
            return Err(ClientError::InvalidUrl(base_url.to_string()));
        }
        if !base.path().ends_with('/') {
            let path = format!("{}/", base.path());
            base.set_path(&path);
        }
        Ok(Self { base, http: reqwest::Client::new() })
    }

    pub fn base_url(&self) -> &Url {
        &self.base
    }

    fn url(&self, segments: &[&str]) -> Url {
        let mut url = self.base.clone();
        url.path_segments_mut().expect("checked in new").pop_if_empty().extend(segments);
        url
    }

    async fn send(&self, method: Method, url: Url, body: Option<&impl Serialize>) -> Result<Response, ClientError> {
        let mut req = self.http.request(method, url);
        if let Some(body) = body {
            req = req.json(body);
        }
        let response = req.send().await?;
        let status = response.status();
        if status.is_success() {
            return Ok(response);
        }
        let text = response.text().await?;
        let body = serde_json::from_str::<ErrorBody>(&text)
            .unwrap_or(ErrorBody { error: "http".into(), message: text });
        Err(ClientError::Api { status, body })
    }

    async fn get<T: DeserializeOwned>(&self, url: Url) -> Result<T, ClientError> {
        Ok(self.send(Method::GET, url, None::<&()>).await?.json().await?)
    }

    async fn post<B: Serialize, T: DeserializeOwned>(&self, url: Url, body: &B) -> Result<T, ClientError> {
        Ok(self.send(Method::POST, url, Some(body)).await?.json().await?)
    }

    pub async fn health(&self) -> Result<(), ClientError> {
        self.send(Method::GET, self.url(&["healthz"]), None::<&()>).await.map(drop)
    }

    pub async fn submit_document(&self, req: &SubmitDocumentRequest) -> Result<SubmitDocumentResponse, ClientError> {
        self.post(self.url(&["documents"]), req).await
    }

    pub async fn documents(&self) -> Result<Vec<DocumentSummary>, ClientError> {
        self.get(self.url(&["documents"])).await
    }

    pub async fn extract(&self, media_id: &MediaId, mode: ExtractionMode) -> Result<SubmitDocumentResponse, ClientError> {
        self.post(self.url(&["documents", media_id.as_str(), "extract"]), &ExtractRequest { mode }).await
    }

    pub async fn report(&self, media_id: &MediaId) -> Result<DocumentReportView, ClientError> {
        self.get(self.url(&["documents", media_id.as_str(), "report"])).await
    }

    pub async fn records(
        &self,
        state: Option<ReviewState>,
        media_id: Option<&MediaId>,
    ) -> Result<Vec<StatementRecord>, ClientError> {
        let mut url = self.url(&["records"]);
        {
            let mut q = url.query_pairs_mut();
            if let Some(s) = state {
                q.append_pair("state", state_name(s));
            }
            if let Some(m) = media_id {
                q.append_pair("media_id", m.as_str());
            }
        }
        if url.query() == Some("") {
            url.set_query(None);
        }
        self.get(url).await
    }

    pub async fn record(&self, id: &RecordId) -> Result<StatementRecord, ClientError> {
        self.get(self.url(&["records", id.as_str()])).await
    }

    pub async fn review(
        &self,
        id: &RecordId,
        action: ReviewAction,
        reviewer: &str,
        note: Option<&str>,
    ) -> Result<StatementRecord, ClientError> {
        let req = ReviewRequest { action, reviewer: reviewer.into(), note: note.map(str::to_string) };
        self.post(self.url(&["records", id.as_str(), "review"]), &req).await
    }

    pub async fn check(&self, subject: &str, predicate: &str, object: &str) -> Result<CheckResponse, ClientError> {
        let req = CheckRequest { subject: subject.into(), predicate: predicate.into(), object: object.into() };
        self.post(self.url(&["check"]), &req).await
    }

    pub async fn stats(&self) -> Result<KgStats, ClientError> {
        self.get(self.url(&["kg", "stats"])).await
    }

    pub async fn export_turtle(&self) -> Result<String, ClientError> {
        Ok(self.send(Method::GET, self.url(&["kg", "export"]), None::<&()>).await?.text().await?)
    }

    pub async fn export_annotations(&self) -> Result<String, ClientError> {
        Ok(self.send(Method::GET, self.url(&["kg", "annotations"]), None::<&()>).await?.text().await?)
    }

    pub async fn import(&self, req: &ImportRequest) -> Result<ImportResponse, ClientError> {
        self.post(self.url(&["kg", "import"]), req).await
    }
}

fn state_name(s: ReviewState) -> &'static str {
    match s {
        ReviewState::Pending => "pending",
        ReviewState::Approved => "approved",
        ReviewState::Rejected => "rejected",
    }
}
