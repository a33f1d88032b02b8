use std::io::Write;
use std::path::Path;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::CliError;

/// Every JSON document the tool writes.
#[derive(Debug, Serialize)]
pub struct Envelope<C: Serialize, R: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub config: C,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub started_unix_ms: Option<u128>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<f64>,
    pub result: R,
}

pub struct Clock {
    started: SystemTime,
    timer: Instant,
}

impl Clock {
    pub fn start() -> Self {
        Self { started: SystemTime::now(), timer: Instant::now() }
    }

    pub fn envelope<C: Serialize, R: Serialize>(
        &self,
        command: &'static str,
        config: C,
        seed: u64,
        canonical: bool,
        result: R,
    ) -> Envelope<C, R> {
        let (started_unix_ms, elapsed_ms) = if canonical {
            (None, None)
        } else {
            let started = self.started.duration_since(UNIX_EPOCH).map(|d| d.as_millis()).unwrap_or(0);
            (Some(started), Some(self.timer.elapsed().as_secs_f64() * 1e3))
        };
        Envelope {
            tool: "entsearch",
            version: env!("CARGO_PKG_VERSION"),
            command,
            config,
            seed,
            started_unix_ms,
            elapsed_ms,
            result,
        }
    }
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let io = |e: std::io::Error| CliError::io(format!("{}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.flush().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

pub fn to_json<T: Serialize>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| CliError::io(e.to_string()))?;
    bytes.push(b'\n');
    Ok(bytes)
}

pub fn to_csv<T: Serialize>(rows: &[T]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).map_err(|e| CliError::io(e.to_string()))?;
    }
    w.into_inner().map_err(|e| CliError::io(e.to_string()))
}

/// JSON to `out` when given, otherwise to stdout.
pub fn emit_json<T: Serialize>(value: &T, out: Option<&Path>) -> Result<(), CliError> {
    let bytes = to_json(value)?;
    match out {
        Some(path) => write_atomic(path, &bytes),
        None => std::io::stdout().write_all(&bytes).map_err(|e| CliError::io(format!("stdout: {e}"))),
    }
}
