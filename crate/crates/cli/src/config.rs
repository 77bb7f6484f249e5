//! Scenario files: loading, `--set` overrides and typed parsing with
//! line or field diagnostics.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::Value;

use crate::error::{CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Simulate,
    Bound,
    MinDim,
    Lyapunov,
    Chain,
    OracleCompare,
    SelfTest,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Simulate => "simulate",
            Kind::Bound => "bound",
            Kind::MinDim => "min-dim",
            Kind::Lyapunov => "lyapunov",
            Kind::Chain => "chain",
            Kind::OracleCompare => "oracle-compare",
            Kind::SelfTest => "self-test",
        }
    }
}

/// Top level of every scenario file.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub kind: Option<Kind>,
    #[serde(default)]
    pub description: Option<String>,
    /// System document, or `{"file": path}` relative to the config file.
    #[serde(default)]
    pub system: Option<Value>,
    #[serde(default)]
    pub params: Value,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub seed: Option<u64>,
}

/// A loaded configuration with overrides applied.
#[derive(Debug)]
pub struct LoadedConfig {
    pub path: Option<PathBuf>,
    pub base_dir: PathBuf,
    pub text: String,
    pub value: Value,
    pub overridden: bool,
    pub scenario: Scenario,
}

impl LoadedConfig {
    pub fn read(path: &Path, sets: &[String]) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::schema(format!("cannot read {}: {e}", path.display())))?;
        let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_text(text, Some(path.to_path_buf()), base_dir, sets)
    }

    /// Empty configuration for commands where the file is optional.
    pub fn empty(sets: &[String]) -> CliResult<Self> {
        Self::from_text("{}".into(), None, PathBuf::from("."), sets)
    }

    pub fn from_text(text: String, path: Option<PathBuf>, base_dir: PathBuf, sets: &[String]) -> CliResult<Self> {
        let label = path
            .as_ref()
            .map(|p| p.display().to_string())
            .unwrap_or_else(|| "<config>".into());
        let mut value: Value = serde_json::from_str(&text)
            .map_err(|e| CliError::schema(format!("{label}:{}:{}: {e}", e.line(), e.column())))?;
        for s in sets {
            apply_set(&mut value, s)?;
        }
        let overridden = !sets.is_empty();
        let scenario: Scenario = if overridden {
            typed_from_value(&value, "")?
        } else {
            typed_from_text(&text, &label)?
        };
        Ok(Self {
            path,
            base_dir,
            text,
            value,
            overridden,
            scenario,
        })
    }

    /// Parses `params` into the kind-specific record.
    pub fn params<T: DeserializeOwned>(&self) -> CliResult<T> {
        let params = if self.scenario.params.is_null() {
            Value::Object(Default::default())
        } else {
            self.scenario.params.clone()
        };
        typed_from_value(&params, "params")
    }

    pub fn resolve(&self, file: &str) -> PathBuf {
        let p = PathBuf::from(file);
        if p.is_absolute() {
            p
        } else {
            self.base_dir.join(p)
        }
    }
}

fn typed_from_text<T: DeserializeOwned>(text: &str, label: &str) -> CliResult<T> {
    let mut de = serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let inner = e.inner();
        CliError::schema(format!(
            "{label}:{}:{}: field `{}`: {inner}",
            inner.line(),
            inner.column(),
            e.path()
        ))
    })
}

pub fn typed_from_value<T: DeserializeOwned>(value: &Value, prefix: &str) -> CliResult<T> {
    serde_path_to_error::deserialize(value.clone()).map_err(|e| {
        let path = e.path().to_string();
        let field = match (prefix.is_empty(), path.as_str()) {
            (true, p) => p.to_string(),
            (false, ".") => prefix.to_string(),
            (false, p) => format!("{prefix}.{p}"),
        };
        CliError::schema(format!("field `{field}`: {}", e.inner()))
    })
}

/// Applies `a.b.c=value`; the value is read as JSON when it parses, else as a string.
pub fn apply_set(root: &mut Value, assignment: &str) -> CliResult<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| CliError::schema(format!("--set expects key=value, got `{assignment}`")))?;
    if key.is_empty() || key.split('.').any(str::is_empty) {
        return Err(CliError::schema(format!("--set has an empty key segment in `{key}`")));
    }
    let parsed = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = root;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let obj = match node {
            Value::Object(map) => map,
            Value::Null => {
                *node = Value::Object(Default::default());
                node.as_object_mut().expect("just created")
            }
            _ => {
                return Err(CliError::schema(format!(
                    "--set {key}: `{}` is not an object",
                    parts[..i].join(".")
                )))
            }
        };
        if i + 1 == parts.len() {
            obj.insert(part.to_string(), parsed);
            return Ok(());
        }
        node = obj.entry(part.to_string()).or_insert(Value::Null);
    }
    unreachable!("loop returns on the last segment")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_creates_nested_keys() {
        let mut v = serde_json::json!({"params": {"K": 1}});
        apply_set(&mut v, "params.K=4").unwrap();
        apply_set(&mut v, "params.method=tridiagonal").unwrap();
        apply_set(&mut v, "system.model=\"rotor\"").unwrap();
        assert_eq!(v["params"]["K"], 4);
        assert_eq!(v["params"]["method"], "tridiagonal");
        assert_eq!(v["system"]["model"], "rotor");
        assert!(apply_set(&mut v, "params.K.x=1").is_err());
        assert!(apply_set(&mut v, "novalue").is_err());
    }

    #[test]
    fn diagnostics_carry_location() {
        let err = LoadedConfig::from_text("{\n \"kind\": \"bound\",\n}".into(), None, ".".into(), &[]).unwrap_err();
        assert!(err.to_string().contains(":3:"), "{err}");
        let err = LoadedConfig::from_text("{\"kind\": \"bound\", \"bogus\": 1}".into(), None, ".".into(), &[])
            .unwrap_err();
        assert!(err.to_string().contains("bogus"), "{err}");
        let err = LoadedConfig::from_text("{\"kind\": \"nope\"}".into(), None, ".".into(), &[]).unwrap_err();
        assert!(err.to_string().contains("kind"), "{err}");
    }
}
