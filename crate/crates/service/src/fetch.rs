use std::path::Path;
use std::time::Duration;

use factcheck_core::media::{canonicalize_url, MediaSource, MediaType};

use crate::error::ServiceError;

pub struct Fetched {
    pub source: MediaSource,
    pub media_type: MediaType,
    pub body: Vec<u8>,
}

pub fn http_client() -> reqwest::Client {
    reqwest::Client::builder().timeout(Duration::from_secs(30)).build().expect("default TLS backend is available")
}

/// Downloads a document. The media type comes from the `Content-Type`
/// header, falling back to the URL path extension.
pub async fn fetch(client: &reqwest::Client, url: &str) -> Result<Fetched, ServiceError> {
    let canonical = canonicalize_url(url)?;
    let response = client.get(&canonical).send().await.map_err(|e| ServiceError::Upstream(format!("{url}: {e}")))?;
    let status = response.status();
    if !status.is_success() {
        return Err(ServiceError::Upstream(format!("{url}: HTTP {status}")));
    }
    let header = response
        .headers()
        .get(reqwest::header::CONTENT_TYPE)
        .and_then(|v| v.to_str().ok())
        .map(str::to_string);
    let media_type = match header {
        Some(h) => MediaType::from_content_type(&h)?,
        None => MediaType::from_path(Path::new(response.url().path()))?,
    };
    let body = response.bytes().await.map_err(|e| ServiceError::Upstream(format!("{url}: {e}")))?;
    Ok(Fetched { source: MediaSource::Url(canonical), media_type, body: body.to_vec() })
}
