use std::fs;
use std::path::Path;

use netsense_core::{NetworkConfig, C64};
use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    n_nodes: usize,
    lambda: f64,
    lambda_prime: f64,
    couplings: Vec<f64>,
    drivings: Vec<f64>,
    alpha_re: f64,
    #[serde(default)]
    alpha_im: f64,
}

/// A parsed network together with the SHA-256 of the file it came from.
pub struct LoadedConfig {
    pub network: NetworkConfig,
    pub hash: String,
}

pub fn load(path: &Path) -> Result<LoadedConfig, CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let text = std::str::from_utf8(&bytes)
        .map_err(|_| CliError::Config(format!("{} is not UTF-8", path.display())))?;
    let raw: FileConfig =
        toml::from_str(text).map_err(|e| CliError::Config(format!("{}: {}", path.display(), e.message())))?;
    let network = NetworkConfig::new(
        raw.n_nodes,
        raw.lambda,
        raw.lambda_prime,
        raw.couplings,
        raw.drivings,
        C64::new(raw.alpha_re, raw.alpha_im),
    )?;
    Ok(LoadedConfig { network, hash: hex::encode(Sha256::digest(&bytes)) })
}
