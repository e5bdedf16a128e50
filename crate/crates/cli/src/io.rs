use std::fs;
use std::path::PathBuf;

use serde::de::DeserializeOwned;
use serde::Serialize;

use cohenmv_core::{BitString, Error};

/// Why a command did not succeed, and so which exit status it gets.
#[derive(Debug)]
pub enum Failure {
    /// Ran, and a check or decode came out negative.
    Verify(String),
    /// Could not run: bad arguments, unreadable or malformed input.
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NotAnObstacle(_) => Failure::Verify(e.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

pub fn json_failure(e: serde_json::Error) -> Failure {
    Failure::Usage(format!("json: {e}"))
}

/// Inline JSON when `arg` starts like a JSON value, otherwise a file path.
pub fn load<T: DeserializeOwned>(arg: &str, what: &str) -> Result<T, Failure> {
    let trimmed = arg.trim_start();
    let text = if trimmed.starts_with('{') || trimmed.starts_with('[') {
        arg.to_string()
    } else {
        fs::read_to_string(arg).map_err(|e| Failure::Usage(format!("cannot read {what} `{arg}`: {e}")))?
    };
    serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("malformed {what}: {e}")))
}

pub fn from_value<T: DeserializeOwned>(v: serde_json::Value, what: &str) -> Result<T, Failure> {
    serde_json::from_value(v).map_err(|e| Failure::Usage(format!("malformed {what}: {e}")))
}

/// Pretty JSON with keys sorted, so equal values print identically.
pub fn canonical<T: Serialize>(v: &T) -> Result<String, Failure> {
    let value = serde_json::to_value(v).map_err(json_failure)?;
    let mut s = serde_json::to_string_pretty(&value).map_err(json_failure)?;
    s.push('\n');
    Ok(s)
}

pub fn emit(out: Option<&PathBuf>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| Failure::Usage(format!("cannot write `{}`: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn parse_bits(s: &str) -> Result<BitString, Failure> {
    s.trim().parse().map_err(|e: Error| Failure::Usage(e.to_string()))
}

/// Comma-separated naturals; the empty string is the empty list.
pub fn parse_list(s: &str) -> Result<Vec<usize>, Failure> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().map_err(|_| Failure::Usage(format!("`{t}` is not a natural number"))))
        .collect()
}
