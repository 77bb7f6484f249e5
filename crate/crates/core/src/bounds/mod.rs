//! Quantitative estimates for weakly-coupled systems: coupling constants,
//! energy growth, Galerkin truncation errors and minimal truncation orders.
//!
//! Anything involving factorials or long products is evaluated as a natural
//! logarithm; [`BoundReport`] renders both the log and, when representable,
//! the linear value.

mod coupling;
mod generic;
mod lnfact;
mod tridiagonal;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use coupling::{
    coupling_constant_numeric, coupling_constant_tridiagonal, max_eigenvalue_ratio, CouplingConstantEstimate,
    EstimateKind, DEFAULT_N_MAX,
};
pub use generic::{
    energy_growth_bound, galerkin_error_bound, min_galerkin_dim, tail_coupling_bound, GenericBoundInputs, MinDim,
};
pub use lnfact::{ln_factorial, ln_gamma};
pub use tridiagonal::{
    min_galerkin_dim_tridiagonal, transition_bound, tridiagonal_projection_error_bound, CouplingEnvelope,
    TridiagonalBounds, TridiagonalMinDim,
};

/// Smallest magnitude rendered in linear form.
pub const LINEAR_FLOOR: f64 = 1e-300;

/// A certified inequality `quantity ≤ value`, with its inputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub name: String,
    pub inputs: BTreeMap<String, f64>,
    /// `log10(value)`; `null` when the value is exactly zero.
    pub log10_value: Option<f64>,
    /// Linear value; `null` when it under- or overflows.
    pub value: Option<f64>,
    pub anchor: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl BoundReport {
    /// Builds a report from a natural-log value (`-inf` encodes zero).
    pub fn from_ln(name: &str, inputs: BTreeMap<String, f64>, ln_value: f64, anchor: &str) -> Self {
        let (log10_value, value) = if ln_value == f64::NEG_INFINITY {
            (None, Some(0.0))
        } else {
            let v = ln_value.exp();
            let linear = (v.is_finite() && v >= LINEAR_FLOOR).then_some(v);
            (Some(ln_value / std::f64::consts::LN_10), linear)
        };
        Self {
            name: name.to_string(),
            inputs,
            log10_value,
            value,
            anchor: anchor.to_string(),
            warnings: Vec::new(),
        }
    }

    /// Builds a report from a linear value `≥ 0`.
    pub fn from_value(name: &str, inputs: BTreeMap<String, f64>, value: f64, anchor: &str) -> Self {
        let ln = if value == 0.0 { f64::NEG_INFINITY } else { value.ln() };
        let mut r = Self::from_ln(name, inputs, ln, anchor);
        if value.is_finite() {
            r.value = Some(value);
        }
        r
    }

    pub fn with_warnings(mut self, warnings: Vec<String>) -> Self {
        self.warnings = warnings;
        self
    }

    /// Natural log of the value.
    pub fn ln_value(&self) -> f64 {
        match self.log10_value {
            Some(l) => l * std::f64::consts::LN_10,
            None => f64::NEG_INFINITY,
        }
    }
}

/// Collects named inputs for a report.
pub fn inputs<const N: usize>(pairs: [(&str, f64); N]) -> BTreeMap<String, f64> {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}
