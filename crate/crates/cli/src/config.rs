use std::path::Path;

use islandize::consumer::ConsumerConfig;
use islandize::engine::InferenceOptions;
use islandize::locator::LocatorConfig;
use serde::Deserialize;

use crate::Failure;

/// Settings loadable from a TOML file; command-line flags override them.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub locator: LocatorConfig,
    pub consumer: ConsumerConfig,
    pub inference: InferenceOptions,
    pub threads: Option<usize>,
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, Failure> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Io(format!("reading {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<(), Failure> {
        self.locator.validate()?;
        self.consumer.validate()?;
        if self.threads == Some(0) {
            return Err(Failure::Config("threads must be at least 1".into()));
        }
        Ok(())
    }
}
