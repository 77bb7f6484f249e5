//! Systems, controls and initial states referenced from scenario files.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use serde_json::Value;
use weakly_coupled::io::{ControlSpec, SystemSpec};
use weakly_coupled::{Complex64, Control64, ControlSystem64, QuantumState64, Segment};

use crate::config::{typed_from_value, LoadedConfig};
use crate::error::{CliError, CliResult};

/// Reads `value`, following `{"file": path}` indirection.
fn follow_file(config: &LoadedConfig, value: &Value, what: &str) -> CliResult<Value> {
    match value.get("file").and_then(Value::as_str) {
        Some(file) if value.as_object().is_some_and(|o| o.len() == 1) => {
            let path = config.resolve(file);
            let text = std::fs::read_to_string(&path)
                .map_err(|e| CliError::schema(format!("{what}: cannot read {}: {e}", path.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::schema(format!("{}:{}:{}: {e}", path.display(), e.line(), e.column())))
        }
        _ => Ok(value.clone()),
    }
}

pub fn system_spec(config: &LoadedConfig) -> CliResult<SystemSpec> {
    let raw = config
        .scenario
        .system
        .as_ref()
        .ok_or_else(|| CliError::schema("field `system` is required for this kind"))?;
    let doc = follow_file(config, raw, "system")?;
    SystemSpec::from_value(&doc).map_err(|e| CliError::schema(format!("field `system`: {e}")))
}

pub fn load_system(config: &LoadedConfig) -> CliResult<ControlSystem64> {
    Ok(system_spec(config)?.build()?)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RandomControl {
    segments: usize,
    #[serde(rename = "T")]
    duration: f64,
    #[serde(rename = "K")]
    l1_budget: f64,
    #[serde(default = "one")]
    channels: usize,
    #[serde(default)]
    seed: Option<u64>,
}

fn one() -> usize {
    1
}

/// `{"segments": [...]}`, `{"file": path}` or
/// `{"random": {"segments", "T", "K", "channels"?, "seed"?}}`.
pub fn load_control(config: &LoadedConfig, value: &Value, field: &str) -> CliResult<Control64> {
    let doc = follow_file(config, value, field)?;
    if let Some(r) = doc.get("random") {
        let spec: RandomControl = typed_from_value(r, &format!("{field}.random"))?;
        let seed = spec.seed.or(config.scenario.seed).ok_or_else(|| {
            CliError::schema(format!("field `{field}.random`: a `seed` (here or at top level) is required"))
        })?;
        return random_control(&spec, seed);
    }
    let spec: ControlSpec = typed_from_value(&doc, field)?;
    Ok(spec.build()?)
}

fn random_control(spec: &RandomControl, seed: u64) -> CliResult<Control64> {
    if spec.segments == 0 || spec.channels == 0 || !(spec.duration > 0.0) || !(spec.l1_budget >= 0.0) {
        return Err(CliError::schema(
            "random control needs segments ≥ 1, channels ≥ 1, T > 0 and K ≥ 0",
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weights: Vec<f64> = (0..spec.segments).map(|_| rng.random_range(0.1..1.0)).collect();
    let total: f64 = weights.iter().sum();
    let mut segments: Vec<Segment<f64>> = weights
        .iter()
        .map(|w| Segment {
            duration: spec.duration * w / total,
            values: (0..spec.channels).map(|_| rng.random_range(-1.0..1.0)).collect(),
        })
        .collect();
    let l1: f64 = segments
        .iter()
        .map(|s| s.duration * s.values.iter().map(|v: &f64| v.abs()).sum::<f64>())
        .sum();
    if l1 > 0.0 {
        for s in &mut segments {
            for v in &mut s.values {
                *v *= spec.l1_budget / l1;
            }
        }
    }
    Ok(Control64::new(segments)?)
}

#[derive(Clone, Debug, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialSpec {
    /// `φ_n`.
    Basis(usize),
    /// `cos θ φ_1 + sin θ φ_2`.
    Tilted(f64),
    /// `[[re, im], ...]`; must have unit norm.
    Coefficients(Vec<[f64; 2]>),
}

impl Default for InitialSpec {
    fn default() -> Self {
        InitialSpec::Basis(1)
    }
}

impl InitialSpec {
    pub fn build(&self, dim: usize) -> CliResult<QuantumState64> {
        Ok(match self {
            InitialSpec::Basis(n) => QuantumState64::basis(dim, *n)?,
            InitialSpec::Tilted(theta) => QuantumState64::tilted(dim, *theta)?,
            InitialSpec::Coefficients(c) => {
                if c.len() > dim {
                    return Err(CliError::schema(format!(
                        "field `params.initial`: {} coefficients for N = {dim}",
                        c.len()
                    )));
                }
                let v = DVector::from_fn(dim, |j, _| {
                    c.get(j).map_or(Complex64::new(0.0, 0.0), |p| Complex64::new(p[0], p[1]))
                });
                QuantumState64::new(v)?
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn config(v: Value) -> LoadedConfig {
        LoadedConfig::from_text(v.to_string(), None, ".".into(), &[]).unwrap()
    }

    #[test]
    fn random_controls_hit_the_budget_and_repeat() {
        let c = config(json!({"seed": 3}));
        let spec = json!({"random": {"segments": 7, "T": 2.0, "K": 3.0, "channels": 2}});
        let a = load_control(&c, &spec, "control").unwrap();
        let b = load_control(&c, &spec, "control").unwrap();
        assert_eq!(a, b);
        assert_eq!(a.segments().len(), 7);
        assert_eq!(a.channels(), Some(2));
        assert!((a.l1_norm() - 3.0).abs() < 1e-12);
        assert!((a.total_duration() - 2.0).abs() < 1e-12);
        let other = load_control(&c, &json!({"random": {"segments": 7, "T": 2.0, "K": 3.0, "channels": 2, "seed": 4}}), "control").unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn random_controls_need_a_seed() {
        let c = config(json!({}));
        let err = load_control(&c, &json!({"random": {"segments": 2, "T": 1.0, "K": 1.0}}), "params.control").unwrap_err();
        assert!(err.to_string().contains("seed"));
    }

    #[test]
    fn initial_states() {
        let s = InitialSpec::Tilted(0.25).build(4).unwrap();
        assert!((s.coefficient(2).re - 0.25f64.sin()).abs() < 1e-16);
        let s = InitialSpec::Coefficients(vec![[0.0, 1.0]]).build(3).unwrap();
        assert_eq!(s.coefficient(1), Complex64::new(0.0, 1.0));
        assert!(InitialSpec::Coefficients(vec![[1.0, 0.0]; 4]).build(3).is_err());
        assert!(InitialSpec::Basis(5).build(3).is_err());
    }
}
