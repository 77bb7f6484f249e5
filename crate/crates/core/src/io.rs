//! JSON documents for systems and controls.
//!
//! Systems are either `{"model": name, "params": {...}}` for a built-in or
//! `{"spectrum": [...], "couplings": [{"j", "k", "re", "im", "l"?}, ...]}` for
//! a tabulated system. Controls are `{"segments": [{"dt", "u": [...]}, ...]}`.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::control::{PiecewiseConstantControl, Segment};
use crate::error::{Error, Result};
use crate::models;
use crate::scalar::Real;
use crate::system::{ControlSystem, CouplingKind, ModelTag, SpectrumKind};
use crate::Complex;

fn one() -> usize {
    1
}

fn is_one(l: &usize) -> bool {
    *l == 1
}

fn is_zero(x: &f64) -> bool {
    *x == 0.0
}

/// One tabulated matrix element `b_{j,k}` of channel `l` (1-based).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingEntry {
    pub j: usize,
    pub k: usize,
    pub re: f64,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub im: f64,
    #[serde(default = "one", skip_serializing_if = "is_one")]
    pub l: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BuiltinSpec {
    pub model: String,
    #[serde(default, skip_serializing_if = "Value::is_null")]
    pub params: Value,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TabulatedSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub spectrum: Vec<f64>,
    pub couplings: Vec<CouplingEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum SystemSpec {
    Builtin(BuiltinSpec),
    Tabulated(TabulatedSpec),
}

impl SystemSpec {
    pub fn builtin(model: &str, params: Value) -> Self {
        SystemSpec::Builtin(BuiltinSpec {
            model: model.into(),
            params,
        })
    }

    /// Dispatches on the presence of `model` or `spectrum`.
    pub fn from_value(v: &Value) -> Result<Self> {
        let obj = v
            .as_object()
            .ok_or_else(|| Error::Parse("system must be a JSON object".into()))?;
        let parsed = if obj.contains_key("model") {
            serde_json::from_value(v.clone()).map(SystemSpec::Builtin)
        } else if obj.contains_key("spectrum") {
            serde_json::from_value(v.clone()).map(SystemSpec::Tabulated)
        } else {
            return Err(Error::Parse("system needs either `model` or `spectrum`".into()));
        };
        parsed.map_err(|e| Error::Parse(format!("system: {e}")))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::from_value(&v)
    }

    pub fn build<T: Real>(&self) -> Result<ControlSystem<T>> {
        match self {
            SystemSpec::Builtin(b) => models::by_name(&b.model, &b.params),
            SystemSpec::Tabulated(t) => {
                let entries: Vec<_> = t
                    .couplings
                    .iter()
                    .map(|c| (c.l, c.j, c.k, Complex::new(T::c(c.re), T::c(c.im))))
                    .collect();
                let spectrum = t.spectrum.iter().map(|&x| T::c(x)).collect();
                models::tabulated(t.name.as_deref().unwrap_or("tabulated"), spectrum, &entries)
            }
        }
    }

    /// Document that rebuilds `system`. Tabulated systems list every nonzero
    /// element, mirrors included, and the spectrum before any positivity shift.
    pub fn of_system<T: Real>(system: &ControlSystem<T>) -> Result<Self> {
        let builtin = |model: &str, params: Value| Ok(Self::builtin(model, params));
        match system.tag {
            ModelTag::Rotor => return builtin("rotor", Value::Null),
            ModelTag::Oscillator => return builtin("oscillator", Value::Null),
            ModelTag::TrappedIon => {
                let p = &system.params;
                let get = |k: &str| {
                    p.get(k)
                        .copied()
                        .ok_or_else(|| Error::ModelSpec(format!("trapped-ion record lacks `{k}`")))
                };
                return builtin(
                    "trapped-ion",
                    serde_json::json!({
                        "omega": get("omega")?,
                        "Omega": get("Omega")?,
                        "eta": get("eta")?,
                        "levels": get("levels")? as usize,
                    }),
                );
            }
            ModelTag::Tabulated => {}
        }
        let SpectrumKind::Table(values) = system.spectrum.kind() else {
            return Err(Error::Unsupported("tabulated export needs a table spectrum".into()));
        };
        let mut couplings = Vec::new();
        let mut push = |l: usize, j: usize, k: usize, b: Complex<T>| {
            if b != Complex::new(T::zero(), T::zero()) {
                couplings.push(CouplingEntry {
                    j,
                    k,
                    re: b.re.to_f64(),
                    im: b.im.to_f64(),
                    l,
                });
            }
        };
        match system.couplings.kind() {
            CouplingKind::Sparse { entries, .. } => {
                for (l, map) in entries.iter().enumerate() {
                    for (&(j, k), &b) in map {
                        push(l + 1, j, k, b);
                    }
                }
            }
            CouplingKind::Dense(ms) => {
                for (l, m) in ms.iter().enumerate() {
                    for j in 0..m.nrows() {
                        for k in 0..m.ncols() {
                            push(l + 1, j + 1, k + 1, m[(j, k)]);
                        }
                    }
                }
            }
            _ => return Err(Error::Unsupported("closed-form couplings on a tabulated system".into())),
        }
        Ok(SystemSpec::Tabulated(TabulatedSpec {
            name: Some(system.name.clone()),
            spectrum: values.iter().map(|v| v.to_f64()).collect(),
            couplings,
        }))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("system spec serializes")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentSpec {
    pub dt: f64,
    pub u: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlSpec {
    pub segments: Vec<SegmentSpec>,
}

impl ControlSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("control: {e}")))
    }

    pub fn from_value(v: &Value) -> Result<Self> {
        serde_json::from_value(v.clone()).map_err(|e| Error::Parse(format!("control: {e}")))
    }

    pub fn of_control<T: Real>(control: &PiecewiseConstantControl<T>) -> Self {
        ControlSpec {
            segments: control
                .segments()
                .iter()
                .map(|s| SegmentSpec {
                    dt: s.duration.to_f64(),
                    u: s.values.iter().map(|v| v.to_f64()).collect(),
                })
                .collect(),
        }
    }

    pub fn build<T: Real>(&self) -> Result<PiecewiseConstantControl<T>> {
        PiecewiseConstantControl::new(
            self.segments
                .iter()
                .map(|s| Segment {
                    duration: T::c(s.dt),
                    values: s.u.iter().map(|&v| T::c(v)).collect(),
                })
                .collect(),
        )
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("control spec serializes")
    }
}
