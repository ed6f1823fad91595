use std::io::Write;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde_json::{json, Value};

use ncfun::NcError;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or unreadable, malformed or inconsistent inputs.
    Usage(String),
    /// Input validation failures reported by the library.
    Invalid(NcError),
    /// Failures while computing on valid inputs.
    Numerical(NcError),
    /// Failures while writing outputs.
    Io(String),
}

impl CliError {
    pub fn usage(e: NcError) -> Self {
        CliError::Invalid(e)
    }

    pub fn numerical(e: NcError) -> Self {
        CliError::Numerical(e)
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Invalid(_) => 2,
            CliError::Numerical(_) | CliError::Io(_) => 1,
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            CliError::Usage(m) => json!({ "error": "usage", "kind": "usage", "message": m }),
            CliError::Io(m) => json!({ "error": "io", "kind": "io", "message": m }),
            CliError::Invalid(e) => nc_json("usage", e),
            CliError::Numerical(e) => nc_json("numerical", e),
        }
    }
}

fn nc_json(class: &str, e: &NcError) -> Value {
    let mut v = json!({ "error": class, "kind": e.kind(), "message": e.to_string() });
    if let NcError::PsdViolation { step, margin, point } = e {
        v["step"] = json!(step);
        v["margin"] = json!(margin);
        v["point"] = serde_json::to_value(point).expect("points serialize");
    }
    v
}

pub fn load<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

/// Writes through a temporary file in the target directory and renames it
/// into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let io_err = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(bytes).map_err(io_err)?;
    tmp.as_file().sync_all().map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}
