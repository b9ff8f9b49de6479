use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

/// Check parameters, kept in key order so reports serialize stably.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Params(BTreeMap<String, Value>);

impl Params {
    pub fn insert(&mut self, key: &str, value: Value) {
        self.0.insert(key.to_string(), value);
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.0.get(key)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.0.keys().map(String::as_str)
    }

    /// Parses `key=value`; the value becomes an integer or boolean when it
    /// reads as one and a string otherwise.
    pub fn insert_assignment(&mut self, assignment: &str) -> Result<(), CliError> {
        let (key, raw) = assignment.split_once('=').ok_or_else(|| CliError::InvalidParam {
            key: assignment.to_string(),
            reason: "expected key=value".into(),
        })?;
        let value = if let Ok(i) = raw.parse::<i64>() {
            Value::from(i)
        } else if let Ok(b) = raw.parse::<bool>() {
            Value::from(b)
        } else {
            Value::from(raw)
        };
        self.insert(key.trim(), value);
        Ok(())
    }

    fn invalid(key: &str, reason: impl Into<String>) -> CliError {
        CliError::InvalidParam { key: key.to_string(), reason: reason.into() }
    }

    pub fn get_i64(&self, key: &str, default: Option<i64>) -> Result<i64, CliError> {
        match self.0.get(key) {
            None => default.ok_or_else(|| Self::invalid(key, "required")),
            Some(v) => v.as_i64().ok_or_else(|| Self::invalid(key, format!("expected an integer, got {v}"))),
        }
    }

    pub fn get_usize(&self, key: &str, default: Option<usize>) -> Result<usize, CliError> {
        let v = self.get_i64(key, default.map(|d| d as i64))?;
        usize::try_from(v).map_err(|_| Self::invalid(key, "must be non-negative"))
    }

    pub fn get_u32(&self, key: &str, default: Option<u32>) -> Result<u32, CliError> {
        let v = self.get_i64(key, default.map(i64::from))?;
        u32::try_from(v).map_err(|_| Self::invalid(key, "out of range"))
    }

    pub fn get_u64(&self, key: &str, default: Option<u64>) -> Result<u64, CliError> {
        let v = self.get_i64(key, default.map(|d| d as i64))?;
        u64::try_from(v).map_err(|_| Self::invalid(key, "must be non-negative"))
    }

    pub fn get_bool(&self, key: &str, default: bool) -> Result<bool, CliError> {
        match self.0.get(key) {
            None => Ok(default),
            Some(v) => v.as_bool().ok_or_else(|| Self::invalid(key, format!("expected a boolean, got {v}"))),
        }
    }

    pub fn get_str<'a>(&'a self, key: &str, default: &'a str) -> Result<&'a str, CliError> {
        match self.0.get(key) {
            None => Ok(default),
            Some(v) => v.as_str().ok_or_else(|| Self::invalid(key, format!("expected a string, got {v}"))),
        }
    }

    /// Rejects keys outside `allowed`.
    pub fn check_keys(&self, allowed: &[&str]) -> Result<(), CliError> {
        match self.keys().find(|k| !allowed.contains(k) && *k != "selftest_negate") {
            Some(k) => Err(Self::invalid(k, format!("not a parameter of this check (allowed: {})", allowed.join(", ")))),
            None => Ok(()),
        }
    }
}
