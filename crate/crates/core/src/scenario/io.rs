use std::fs;
use std::path::Path;

use super::Scenario;
use crate::error::{Error, Result};

/// Parses and validates a scenario document.
pub fn from_json(text: &str) -> Result<Scenario> {
    let s: Scenario = serde_json::from_str(text)?;
    s.validate()?;
    Ok(s)
}

/// Pretty-printed JSON with a trailing newline.
pub fn to_json(s: &Scenario) -> String {
    let mut out = serde_json::to_string_pretty(s).expect("scenario serialization cannot fail");
    out.push('\n');
    out
}

pub fn load(path: impl AsRef<Path>) -> Result<Scenario> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    from_json(&text)
}

pub fn save(s: &Scenario, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, to_json(s)).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}
