//! TOML run configuration.
//!
//! ```toml
//! model = "transistor"        # pump | transistor | network
//! mode = "collapsed"          # collapsed | multigraph
//! top_k = 5
//! seed = 7
//!
//! [transistor]
//! T_M = 0.5
//!
//! [sweep]
//! param = "T_M"
//! start = 0.01
//! stop = 1.0
//! count = 100
//! ```
//!
//! For `model = "network"`, `network = "file.json"` names a model file,
//! resolved relative to the config file.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use cycleflux::{GraphMode, ModelConfig, ModelSpec, PumpParams, TransistorParams, TransitionNetwork};
use serde::Deserialize;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub model: Option<String>,
    pub mode: Option<GraphMode>,
    pub network: Option<PathBuf>,
    pub top_k: Option<usize>,
    pub seed: Option<u64>,
    pub rank_key: Option<String>,
    pub pump: Option<PumpParams>,
    pub transistor: Option<TransistorParams>,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub simulate: SimulateSection,
    #[serde(default)]
    pub threshold: ThresholdSection,
    #[serde(default)]
    pub amplify: AmplifySection,
    #[serde(skip)]
    base_dir: PathBuf,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub param: Option<String>,
    pub start: Option<f64>,
    pub stop: Option<f64>,
    pub count: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSection {
    pub time: Option<f64>,
    pub initial: Option<String>,
    pub raw_rates: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdSection {
    pub w_m: Option<Vec<f64>>,
    pub t_start: Option<f64>,
    pub t_stop: Option<f64>,
    pub t_count: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmplifySection {
    pub t_start: Option<f64>,
    pub t_stop: Option<f64>,
    pub t_count: Option<usize>,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg: Config =
            toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    /// Model named by `model`, defaulting to the pump; `--model` and
    /// `--network` on the command line take precedence.
    pub fn model(&self, model: Option<&str>, network: Option<&Path>) -> Result<ModelConfig> {
        let name = match (model, network) {
            (Some(m), _) => m,
            (None, Some(_)) => "network",
            (None, None) => self.model.as_deref().unwrap_or("pump"),
        };
        Ok(match name {
            "pump" => ModelConfig::Pump(self.pump.clone().unwrap_or_default()),
            "transistor" => ModelConfig::Transistor(self.transistor.clone().unwrap_or_default()),
            "network" => {
                let path = match (network, &self.network) {
                    (Some(p), _) => p.to_path_buf(),
                    (None, Some(p)) => self.base_dir.join(p),
                    (None, None) => bail!("model = \"network\" needs a network file"),
                };
                ModelConfig::Network(load_network(&path)?)
            }
            other => bail!("unknown model `{other}` (expected pump|transistor|network)"),
        })
    }
}

pub fn load_network(path: &Path) -> Result<TransitionNetwork> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading network {}", path.display()))?;
    let spec = ModelSpec::from_json(&text).with_context(|| path.display().to_string())?;
    Ok(TransitionNetwork::from_spec(&spec)?)
}

/// Parse `name=value`.
pub fn parse_assignment(s: &str) -> Result<(String, f64)> {
    let (name, value) = s
        .split_once('=')
        .with_context(|| format!("expected name=value, got `{s}`"))?;
    let value: f64 = value
        .trim()
        .parse()
        .with_context(|| format!("bad value in `{s}`"))?;
    Ok((name.trim().to_string(), value))
}
