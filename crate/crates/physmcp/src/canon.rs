//! Canonical JSON interchange: deterministic bytes with lexicographically
//! sorted keys and round-trip-exact decimal floats.
//!
//! Every descriptor, task, result, and wire body uses this form. The
//! shared-key portability metrics are defined over the top-level key sets
//! of these serializations.

use std::collections::BTreeSet;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CanonError {
    #[error("serialization failed: {0}")]
    Serialize(#[from] serde_json::Error),
    #[error("non-finite real encountered at {0}")]
    NonFinite(String),
    #[error("parse failure: {0}")]
    Parse(String),
    #[error("top-level value is not a JSON object")]
    NotAnObject,
}

/// Serializes `value` to canonical JSON bytes.
///
/// serde_json keeps object keys in a sorted map and renders floats with the
/// shortest round-trip-exact decimal form, so identical values always yield
/// identical bytes. Non-finite reals are rejected: serde_json maps them to
/// `null`, and canonical values contain no nulls (absent optionals are
/// omitted entirely).
pub fn canonical_json<T: Serialize>(value: &T) -> Result<Vec<u8>, CanonError> {
    let tree = serde_json::to_value(value)?;
    reject_nulls(&tree, "$")?;
    Ok(serde_json::to_vec(&tree)?)
}

fn reject_nulls(value: &serde_json::Value, path: &str) -> Result<(), CanonError> {
    match value {
        serde_json::Value::Null => Err(CanonError::NonFinite(path.to_string())),
        serde_json::Value::Array(items) => {
            for (i, item) in items.iter().enumerate() {
                reject_nulls(item, &format!("{path}[{i}]"))?;
            }
            Ok(())
        }
        serde_json::Value::Object(map) => {
            for (k, v) in map {
                reject_nulls(v, &format!("{path}.{k}"))?;
            }
            Ok(())
        }
        _ => Ok(()),
    }
}

/// Returns the set of top-level object keys of a serialized value.
pub fn top_level_keys(serialized: &[u8]) -> Result<BTreeSet<String>, CanonError> {
    let value: serde_json::Value =
        serde_json::from_slice(serialized).map_err(|e| CanonError::Parse(e.to_string()))?;
    match value {
        serde_json::Value::Object(map) => Ok(map.keys().cloned().collect()),
        _ => Err(CanonError::NotAnObject),
    }
}
