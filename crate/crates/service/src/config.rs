use std::collections::BTreeMap;
use std::net::{IpAddr, Ipv4Addr, SocketAddr};
use std::path::{Path, PathBuf};

use factcheck_core::extraction::ExtractorConfig;
use factcheck_core::{ProximityConfig, WeightConfig};
use serde::{Deserialize, Serialize};

use crate::error::ServiceError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServiceConfig {
    #[serde(default = "default_bind")]
    pub bind: IpAddr,
    #[serde(default = "default_port")]
    pub port: u16,
    #[serde(default = "default_state_dir")]
    pub state_dir: PathBuf,
    #[serde(default)]
    pub weights: WeightConfig,
    #[serde(default)]
    pub proximity: ProximityConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extractor: Option<ExtractorConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tables_path: Option<PathBuf>,
    /// Predicate name to its negation. Applied in both directions.
    #[serde(default)]
    pub negation_map: BTreeMap<String, String>,
    /// Allowed browser origin; any origin when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cors_origin: Option<String>,
}

fn default_bind() -> IpAddr {
    IpAddr::V4(Ipv4Addr::LOCALHOST)
}

fn default_port() -> u16 {
    8080
}

fn default_state_dir() -> PathBuf {
    PathBuf::from("factcheck-state")
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            bind: default_bind(),
            port: default_port(),
            state_dir: default_state_dir(),
            weights: WeightConfig::default(),
            proximity: ProximityConfig::default(),
            extractor: None,
            tables_path: None,
            negation_map: BTreeMap::new(),
            cors_origin: None,
        }
    }
}

impl ServiceConfig {
    /// Reads a JSON config. Relative paths are taken relative to the file.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ServiceError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| ServiceError::Config(format!("{}: {e}", path.display())))?;
        let mut config: Self =
            serde_json::from_str(&text).map_err(|e| ServiceError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        config.state_dir = base.join(&config.state_dir);
        config.tables_path = config.tables_path.map(|p| base.join(p));
        Ok(config)
    }

    pub fn socket_addr(&self) -> SocketAddr {
        SocketAddr::new(self.bind, self.port)
    }
}
