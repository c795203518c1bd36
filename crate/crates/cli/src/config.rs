//! JSON config files whose keys mirror the command-line flags.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;

use crate::error::{CliError, Result};

/// Parses `path` into the flag struct of a command; a missing path yields
/// the all-unset default.
pub fn load<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T> {
    let Some(path) = path else {
        return Ok(T::default());
    };
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|source| CliError::Config {
        path: path.to_path_buf(),
        source,
    })
}

/// Fills every unset field of `$flags` from `$file`.
macro_rules! overlay {
    ($flags:expr, $file:expr; $($field:ident),+ $(,)?) => {
        $(
            if $flags.$field.is_none() {
                $flags.$field = $file.$field.take();
            }
        )+
    };
}
pub(crate) use overlay;

pub fn default_out() -> PathBuf {
    PathBuf::from("out")
}

pub fn require_positive(field: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(CliError::arg(field, format!("must be finite and > 0, got {v}")))
    }
}

pub fn require_nonnegative(field: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v >= 0.0 {
        Ok(v)
    } else {
        Err(CliError::arg(field, format!("must be finite and >= 0, got {v}")))
    }
}

pub fn require_at_least(field: &str, v: usize, min: usize) -> Result<usize> {
    if v >= min {
        Ok(v)
    } else {
        Err(CliError::arg(field, format!("must be at least {min}, got {v}")))
    }
}
