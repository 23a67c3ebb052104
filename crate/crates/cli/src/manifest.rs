//! Provenance record embedded in every result file.

use std::path::{Path, PathBuf};

use chrono::{SecondsFormat, Utc};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::{Cli, Failure, EXIT_DATA};

#[derive(Debug, Clone, Serialize)]
pub struct InputDigest {
    pub role: String,
    pub path: PathBuf,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    /// Every parsed flag, defaults included.
    pub flags: serde_json::Value,
    pub inputs: Vec<InputDigest>,
    pub seed: u64,
    pub version: String,
    pub started_at: String,
    pub finished_at: String,
}

/// Start time of a run, captured before any work.
pub struct Started(chrono::DateTime<Utc>);

impl Started {
    pub fn now() -> Self {
        Started(Utc::now())
    }

    pub fn finish(self, subcommand: &str, cli: &Cli, files: &[(&str, PathBuf)]) -> Result<RunManifest, Failure> {
        let inputs = files
            .iter()
            .map(|(role, path)| {
                Ok(InputDigest {
                    role: role.to_string(),
                    path: path.clone(),
                    sha256: digest(path)?,
                })
            })
            .collect::<Result<_, Failure>>()?;
        Ok(RunManifest {
            subcommand: subcommand.to_string(),
            flags: serde_json::to_value(cli).map_err(hiersel::Error::from)?,
            inputs,
            seed: cli.global.seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            started_at: stamp(self.0),
            finished_at: stamp(Utc::now()),
        })
    }
}

fn stamp(t: chrono::DateTime<Utc>) -> String {
    t.to_rfc3339_opts(SecondsFormat::Millis, true)
}

fn digest(path: &Path) -> Result<String, Failure> {
    let bytes = std::fs::read(path).map_err(|e| Failure {
        code: EXIT_DATA,
        message: format!("cannot read {}: {e}", path.display()),
    })?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}
