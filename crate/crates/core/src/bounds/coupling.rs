use nalgebra::{Complex, DMatrix};

use crate::error::{Error, Result};
use crate::galerkin::GalerkinSystem;
use crate::scalar::{cabs, rabs, Real};
use crate::system::{ControlSystem, ModelTag};

/// Default scan length for "sup over n" constants of closed-form spectra.
pub const DEFAULT_N_MAX: usize = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EstimateKind {
    /// The supremum over all `n` is attained inside the scanned range and the
    /// summand is known to decrease afterwards.
    ExactSupremum,
    /// Supremum over a finite truncation only.
    TruncationNumeric,
}

/// Estimate of the coupling constant `c_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct CouplingConstantEstimate<T> {
    pub k: T,
    pub value: T,
    pub kind: EstimateKind,
    /// Truncation order (numeric estimator) or scan length (tri-diagonal).
    pub truncation_order: Option<usize>,
    /// Index `n` attaining the scanned maximum.
    pub argmax: Option<usize>,
    pub warnings: Vec<String>,
}

/// Upper bound `sup_n |b_{n,n+1}| ((λ_{n+1}/λ_n)^k − 1)` for tri-diagonal systems.
///
/// The scan covers `n ≤ n_max` (and `n + 1` within the defined states). For the
/// rotor, `½((1 + 1/n)^{2k} − 1)` decreases in `n`; for the oscillator
/// `√n((1 + 1/(n − ½))^k − 1) = Σ_i C(k,i) √n (n − ½)^{-i}` and every term
/// decreases for `n ≥ 1`. Both are therefore exact suprema at `n = 1`.
///
/// The hypotheses that make the bound meaningful (`λ_{n+1}/λ_n` bounded,
/// `b_{n,n}/λ_n → 0`, `b_{n,n-1}/λ_n → 0`) are checked numerically on the scan
/// and reported as warnings.
pub fn coupling_constant_tridiagonal<T: Real>(
    system: &ControlSystem<T>,
    k: u32,
    n_max: usize,
) -> Result<CouplingConstantEstimate<T>> {
    if k == 0 {
        return Err(Error::InvalidExponent("coupling order k must be ≥ 1".into()));
    }
    if !system.is_tridiagonal() {
        return Err(Error::Shape(format!(
            "`{}` is not tri-diagonal (bandwidth {:?})",
            system.name,
            system.couplings.bandwidth()
        )));
    }
    let last = match system.max_dimension() {
        Some(d) => n_max.min(d.saturating_sub(1)),
        None => n_max,
    };
    if last == 0 {
        return Err(Error::InvalidDimension("need at least two states".into()));
    }
    let ki = k as i32;
    let mut best = T::zero();
    let mut argmax = 1;
    let mut lam_n = system.spectrum.eigenvalue(1)?;
    let mut diag_ratio = Vec::with_capacity(last);
    let mut sub_ratio = Vec::with_capacity(last);
    for n in 1..=last {
        let lam_next = system.spectrum.eigenvalue(n + 1)?;
        let ratio = lam_next / lam_n;
        let mut b_up = T::zero();
        let mut b_diag = T::zero();
        let mut b_down = T::zero();
        for l in 1..=system.channels() {
            b_up = b_up.max(cabs(system.couplings.element(l, n, n + 1)?));
            b_diag = b_diag.max(cabs(system.couplings.element(l, n, n)?));
            if n > 1 {
                b_down = b_down.max(cabs(system.couplings.element(l, n, n - 1)?));
            }
        }
        let term = b_up * (ratio.powi(ki) - T::one());
        if term > best {
            best = term;
            argmax = n;
        }
        diag_ratio.push(b_diag / lam_n);
        sub_ratio.push(b_down / lam_n);
        lam_n = lam_next;
    }
    let mut warnings = Vec::new();
    for (name, seq) in [("b_{n,n}/λ_n", &diag_ratio), ("b_{n,n-1}/λ_n", &sub_ratio)] {
        if !tends_to_zero(seq) {
            warnings.push(format!("{name} does not appear to tend to zero on n ≤ {last}"));
        }
    }
    if argmax == last && last > 1 {
        warnings.push(format!("maximum attained at the end of the scan (n = {last}); increase n_max"));
    }
    let closed = matches!(system.tag, ModelTag::Rotor | ModelTag::Oscillator);
    let kind = if closed && argmax < last {
        EstimateKind::ExactSupremum
    } else {
        EstimateKind::TruncationNumeric
    };
    Ok(CouplingConstantEstimate {
        k: T::idx(k as usize),
        value: best,
        kind,
        truncation_order: Some(last),
        argmax: Some(argmax),
        warnings,
    })
}

/// Largest `λ_{n+1}/λ_n` over `n < n_max`; the tri-diagonal hypotheses need it bounded.
pub fn max_eigenvalue_ratio<T: Real>(system: &ControlSystem<T>, n_max: usize) -> Result<T> {
    let last = system.max_dimension().map_or(n_max, |d| n_max.min(d.saturating_sub(1)));
    let mut best = T::zero();
    for n in 1..=last {
        best = best.max(system.spectrum.eigenvalue(n + 1)? / system.spectrum.eigenvalue(n)?);
    }
    Ok(best)
}

// Advisory: the tail maximum must be small against the head maximum and
// not growing.
fn tends_to_zero<T: Real>(seq: &[T]) -> bool {
    if seq.len() < 8 {
        return true;
    }
    let q = seq.len() / 4;
    let head = seq[..q].iter().fold(T::zero(), |a, v| a.max(*v));
    let mid = seq[q..3 * q].iter().fold(T::zero(), |a, v| a.max(*v));
    let tail = seq[3 * q..].iter().fold(T::zero(), |a, v| a.max(*v));
    tail <= T::c(1e-12) || (tail <= mid && tail < head.max(T::c(1e-300)))
}

/// Coupling constant of the compression itself,
/// `sup_ψ |Re⟨Λ^k ψ, B ψ⟩| / ⟨Λ^k ψ, ψ⟩`, as the largest-modulus eigenvalue of
/// `Λ^{-k/2} H Λ^{-k/2}` with `H = (Λ^k B + (Λ^k B)†)/2`.
pub fn coupling_constant_numeric<T: Real>(
    galerkin: &GalerkinSystem<T>,
    k: T,
    channel: usize,
) -> Result<CouplingConstantEstimate<T>> {
    let n = galerkin.order();
    if n < 2 {
        return Err(Error::InvalidDimension("numeric coupling constant needs N ≥ 2".into()));
    }
    if !(k > T::zero()) {
        return Err(Error::InvalidExponent(format!("k must be positive, got {k}")));
    }
    let b = galerkin.b_matrix(channel)?;
    let lam = galerkin.eigenvalues();
    if lam.iter().any(|l| !(*l > T::zero())) {
        return Err(Error::Numerical("non-positive eigenvalue in Λ".into()));
    }
    let half_k = k * T::c(0.5);
    // Entry (j,k) of Λ^{-k/2} H Λ^{-k/2}, written with ratios to avoid overflow.
    let m = DMatrix::from_fn(n, n, |j, q| {
        let r = (lam[j] / lam[q]).powf(half_k);
        let a = b[(j, q)] * Complex::new(r, T::zero());
        let c = b[(q, j)].conj() * Complex::new(T::one() / r, T::zero());
        (a + c) * Complex::new(T::c(0.5), T::zero())
    });
    let eig = m.symmetric_eigenvalues();
    let value = eig.iter().fold(T::zero(), |a, w| a.max(rabs(*w)));
    if !value.is_finite() {
        return Err(Error::Numerical("eigensolver returned a non-finite value".into()));
    }
    Ok(CouplingConstantEstimate {
        k,
        value,
        kind: EstimateKind::TruncationNumeric,
        truncation_order: Some(n),
        argmax: None,
        warnings: Vec::new(),
    })
}
