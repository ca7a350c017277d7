//! Config file discovery and loading.
//!
//! One TOML file feeds every subcommand. Precedence, lowest to highest:
//! built-in defaults, the config file, then command-line flags. The
//! only environment influence is `STARQ_CONFIG`, which moves the file
//! path; it never sets individual fields.

use std::ffi::OsString;
use std::path::PathBuf;

use anyhow::Context;
use serde::Deserialize;

use crate::worker::WorkerConfig;

pub const DEFAULT_CONFIG_PATH: &str = "starq.toml";
pub const CONFIG_ENV_VAR: &str = "STARQ_CONFIG";

/// Worker fields at the top level plus a `[simulate]` table with fleet
/// defaults.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default)]
pub struct CliConfig {
    #[serde(flatten)]
    pub worker: WorkerConfig,
    pub simulate: SimulateDefaults,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default)]
pub struct SimulateDefaults {
    pub workers: usize,
    pub price_per_hour: f64,
    pub spot_discount: f64,
    pub speed_multiplier: f64,
}

impl Default for SimulateDefaults {
    fn default() -> Self {
        SimulateDefaults {
            workers: 1,
            price_per_hour: 0.0,
            spot_discount: 0.0,
            speed_multiplier: 1.0,
        }
    }
}

/// Picks the config path and whether it was explicitly requested.
/// Explicit paths (flag or environment) must exist; the well-known
/// default may be absent.
pub fn resolve_config_path(flag: Option<PathBuf>, env: Option<OsString>) -> (PathBuf, bool) {
    if let Some(path) = flag {
        (path, true)
    } else if let Some(path) = env {
        (PathBuf::from(path), true)
    } else {
        (PathBuf::from(DEFAULT_CONFIG_PATH), false)
    }
}

pub fn load_config(flag: Option<PathBuf>) -> anyhow::Result<CliConfig> {
    let (path, explicit) = resolve_config_path(flag, std::env::var_os(CONFIG_ENV_VAR));
    match std::fs::read_to_string(&path) {
        Ok(text) => toml::from_str(&text)
            .with_context(|| format!("cannot parse config file {}", path.display())),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound && !explicit => {
            Ok(CliConfig::default())
        }
        Err(e) => Err(e).with_context(|| format!("cannot read config file {}", path.display())),
    }
}
