//! Built-in example systems.
//!
//! All models use 1-based indices. The oscillator and ion levels, usually
//! numbered from 0 in physics texts, are shifted so that `φ_1` is the ground
//! state.

use std::collections::BTreeMap;

use nalgebra::{Complex, DMatrix};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::GaussHermite;
use crate::scalar::{rabs, Real};
use crate::system::{ControlSystem, Couplings, ModelTag, Spectrum};

/// Largest tolerated change in any ion matrix element when the quadrature
/// order is doubled.
pub const QUADRATURE_TOL: f64 = 1e-10;

/// Physical constants of the trapped-ion model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrappedIonParams {
    /// Trap frequency `ω`.
    pub omega: f64,
    /// Internal level spacing `Ω`.
    #[serde(rename = "Omega")]
    pub detuning: f64,
    /// Lamb-Dicke parameter `η`.
    pub eta: f64,
    /// Oscillator levels `M` per internal state; the system has `2M` states.
    pub levels: usize,
}

/// Planar rotor: `λ_n = n²`, `b_{j,j±1} = −i/2`.
pub fn planar_rotor<T: Real>() -> ControlSystem<T> {
    ControlSystem::new(
        "planar-rotor",
        ModelTag::Rotor,
        Spectrum::rotor(),
        Couplings::rotor(),
        BTreeMap::new(),
    )
    .expect("closed-form rotor is consistent")
}

/// Harmonic oscillator with dipole control: `λ_n = n − 1/2`,
/// `b_{k−1,k} = −i√(k−1)`, `b_{k+1,k} = −i√k`.
pub fn harmonic_oscillator<T: Real>() -> ControlSystem<T> {
    ControlSystem::new(
        "harmonic-oscillator",
        ModelTag::Oscillator,
        Spectrum::oscillator(),
        Couplings::oscillator(),
        BTreeMap::new(),
    )
    .expect("closed-form oscillator is consistent")
}

/// Ion trapped in a harmonic well, two internal levels, two controls.
///
/// Basis order `(f_1,0), (0,f_1), (f_2,0), (0,f_2), …` with `f_m` the Hermite
/// functions, so `λ_{2m−1} = λ_{2m} = ω(m − 1/2) + Ω`. The controls couple the
/// internal levels through `cos(√2 η x)` and `sin(√2 η x)`:
/// `b_{2m−1,2n} = b_{2m,2n−1} = −i C_{mn}` (channel 1) and likewise with
/// `S_{mn}` (channel 2), where `C_{mn} = ∫ f_m cos(√2ηx) f_n` and
/// `S_{mn} = ∫ f_m sin(√2ηx) f_n` are computed with a `4M + 32` point
/// Gauss-Hermite rule and checked against twice that order.
pub fn trapped_ion<T: Real>(params: &TrappedIonParams) -> Result<ControlSystem<T>> {
    let TrappedIonParams {
        omega,
        detuning,
        eta,
        levels,
    } = *params;
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(Error::ModelSpec(format!("trapped ion needs η > 0, got {eta}")));
    }
    if levels == 0 {
        return Err(Error::ModelSpec("trapped ion needs at least one oscillator level".into()));
    }
    let spectrum = Spectrum::trapped_ion(T::c(omega), T::c(detuning))?;
    let (cos_m, sin_m) = ion_matrices::<T>(eta, levels)?;
    let dim = 2 * levels;
    let swap = |m: &DMatrix<T>| {
        let mut b = DMatrix::from_element(dim, dim, Complex::new(T::zero(), T::zero()));
        for a in 0..levels {
            for c in 0..levels {
                let v = Complex::new(T::zero(), -m[(a, c)]);
                b[(2 * a, 2 * c + 1)] = v;
                b[(2 * a + 1, 2 * c)] = v;
            }
        }
        b
    };
    let couplings = Couplings::dense(vec![swap(&cos_m), swap(&sin_m)])?;
    let mut record = BTreeMap::new();
    record.insert("omega".to_string(), omega);
    record.insert("Omega".to_string(), detuning);
    record.insert("eta".to_string(), eta);
    record.insert("levels".to_string(), levels as f64);
    ControlSystem::new("trapped-ion", ModelTag::TrappedIon, spectrum, couplings, record)
}

/// `(C, S)` over `levels` Hermite functions with the doubling convergence check.
pub fn ion_matrices<T: Real>(eta: f64, levels: usize) -> Result<(DMatrix<T>, DMatrix<T>)> {
    let q = 4 * levels + 32;
    let k = T::c(2.0f64.sqrt() * eta);
    let build = |order: usize| -> Result<(DMatrix<T>, DMatrix<T>)> {
        let gh = GaussHermite::<T>::new(order)?;
        Ok((
            gh.hermite_matrix(levels, |x| (k * x).cos()),
            gh.hermite_matrix(levels, |x| (k * x).sin()),
        ))
    };
    let (c1, s1) = build(q)?;
    let (c2, s2) = build(2 * q)?;
    let diff = (&c1 - &c2)
        .iter()
        .chain((&s1 - &s2).iter())
        .fold(T::zero(), |a, d| a.max(rabs(*d)));
    if diff > T::c(QUADRATURE_TOL) {
        return Err(Error::ModelSpec(format!(
            "ion matrix elements not converged: orders {q} and {} differ by {diff:e}",
            2 * q
        )));
    }
    Ok((c2, s2))
}

/// Tabulated system from explicit spectrum and coupling entries
/// `(channel, j, k, b_{j,k})`, all 1-based.
pub fn tabulated<T: Real>(
    name: &str,
    spectrum: Vec<T>,
    entries: &[(usize, usize, usize, Complex<T>)],
) -> Result<ControlSystem<T>> {
    let dim = spectrum.len();
    let channels = entries.iter().map(|e| e.0).max().unwrap_or(1).max(1);
    let spectrum = Spectrum::table(spectrum)?;
    let couplings = Couplings::sparse(dim, channels, entries)?;
    ControlSystem::new(name, ModelTag::Tabulated, spectrum, couplings, BTreeMap::new())
}

/// Built-in model by name (`rotor`, `oscillator`, `trapped-ion`).
pub fn by_name<T: Real>(name: &str, params: &serde_json::Value) -> Result<ControlSystem<T>> {
    match name {
        "rotor" | "planar-rotor" => Ok(planar_rotor()),
        "oscillator" | "harmonic-oscillator" => Ok(harmonic_oscillator()),
        "trapped-ion" | "ion" => {
            let p: TrappedIonParams = serde_json::from_value(params.clone())
                .map_err(|e| Error::ModelSpec(format!("trapped-ion params: {e}")))?;
            trapped_ion(&p)
        }
        other => Err(Error::ModelSpec(format!("unknown model `{other}`"))),
    }
}
