use std::path::Path;

use anyhow::Context;
use lectures_core::rdf::DEFAULT_ONTOLOGY_NS;
use serde::{Deserialize, Serialize};

pub const DEFAULT_BASE_URI: &str = "http://localhost:8080";
pub const DEFAULT_PORT: u16 = 8080;

/// Server and pipeline settings, read from a TOML file of `key = value` lines.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub base_uri: String,
    pub ontology_ns: String,
    pub port: u16,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            base_uri: DEFAULT_BASE_URI.into(),
            ontology_ns: DEFAULT_ONTOLOGY_NS.into(),
            port: DEFAULT_PORT,
        }
    }
}

impl Config {
    pub fn parse(text: &str) -> anyhow::Result<Self> {
        let mut config: Config = toml::from_str(text)?;
        config.base_uri = config.base_uri.trim_end_matches('/').to_string();
        Ok(config)
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        Config::parse(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    pub fn with_base_uri(mut self, base: &str) -> Self {
        self.base_uri = base.trim_end_matches('/').to_string();
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_overrides() {
        let c = Config::parse("base_uri = \"http://ex.org/\"\nport = 9000\n").unwrap();
        assert_eq!(c.base_uri, "http://ex.org");
        assert_eq!(c.port, 9000);
        assert_eq!(c.ontology_ns, DEFAULT_ONTOLOGY_NS);
        assert!(Config::parse("colour = 1").is_err());
    }
}
