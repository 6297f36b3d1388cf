use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::error::CliResult;

/// Write via a temporary file in the target directory, then rename over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    std::fs::create_dir_all(&dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

pub fn write_json(path: &Path, value: &impl Serialize) -> CliResult<()> {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    write_atomic(path, s.as_bytes())
}

pub fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

/// Sidecar describing how an output was produced.
#[derive(Debug, Serialize)]
pub struct Manifest {
    pub command: String,
    pub resolved_params: Value,
    pub master_seed: Option<u64>,
    pub version: String,
    pub started_at: String,
    pub runtime_secs: f64,
    pub threads: usize,
    pub supercritical: bool,
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cache_hits: Option<usize>,
}

impl Manifest {
    pub fn new(command: &str, resolved_params: Value, master_seed: Option<u64>) -> Self {
        Self {
            command: command.to_string(),
            resolved_params,
            master_seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            started_at: chrono::Utc::now().to_rfc3339(),
            runtime_secs: 0.0,
            threads: rayon::current_num_threads(),
            supercritical: false,
            warnings: Vec::new(),
            cache_hits: None,
        }
    }

    pub fn flag_xi(&mut self, params: &lfpp_core::gff::Params) {
        if params.supercritical {
            self.supercritical = true;
            let w = format!(
                "xi = {} is at or above the critical reference {}; convergence results do not apply",
                params.xi, params.xi_crit_ref
            );
            log::warn!("{w}");
            self.warnings.push(w);
        }
    }

    pub fn write_for(&self, out: &Path) -> CliResult<()> {
        write_json(&manifest_path(out), self)
    }
}
