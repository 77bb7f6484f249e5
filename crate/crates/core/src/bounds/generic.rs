use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::system::ControlSystem;

/// `e^{c_k K} ‖ψ0‖_{k/2}`: growth of the `k/2`-norm under any control of
/// `L¹`-norm at most `K`.
pub fn energy_growth_bound<T: Real>(c_k: T, l1_budget: T, initial_snorm: T) -> Result<T> {
    for (name, v) in [("c_k", c_k), ("K", l1_budget), ("initial_snorm", initial_snorm)] {
        if !(v >= T::zero()) {
            return Err(Error::arg(name, format!("must be ≥ 0, got {v}")));
        }
    }
    Ok((c_k * l1_budget).exp() * initial_snorm)
}

/// Inputs shared by the generic (non tri-diagonal) truncation estimates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GenericBoundInputs<T> {
    /// `‖B_l ψ‖ ≤ d ‖ψ‖_{r/2}` constant.
    pub d: T,
    pub r: T,
    pub k: T,
    pub c_k: T,
    /// `L¹` budget `K`.
    pub l1_budget: T,
    /// `‖ψ0‖_{k/2}`.
    pub snorm: T,
}

impl<T: Real> GenericBoundInputs<T> {
    fn validate(&self) -> Result<()> {
        if !(self.r >= T::zero()) || !(self.r < self.k) {
            return Err(Error::InvalidExponent(format!(
                "need 0 ≤ r < k, got r = {}, k = {}",
                self.r, self.k
            )));
        }
        for (name, v) in [
            ("d", self.d),
            ("c_k", self.c_k),
            ("K", self.l1_budget),
            ("snorm", self.snorm),
        ] {
            if !(v >= T::zero()) || !v.is_finite() {
                return Err(Error::arg(name, format!("must be finite and ≥ 0, got {v}")));
            }
        }
        Ok(())
    }

    /// `ln(d e^{c_k K} ‖ψ0‖_{k/2})`.
    fn ln_amplitude(&self) -> T {
        self.d.ln() + self.c_k * self.l1_budget + self.snorm.ln()
    }
}

fn check_lambda<T: Real>(lambda_next: T) -> Result<()> {
    if !(lambda_next > T::zero()) {
        return Err(Error::arg("lambda_next", format!("must be positive, got {lambda_next}")));
    }
    Ok(())
}

/// `d λ_{N+1}^{(r−k)/2} e^{c_k K} ‖ψ0‖_{k/2}`: bound on `‖B (Id − π_N) Υ^u_t ψ0‖`.
pub fn tail_coupling_bound<T: Real>(inputs: &GenericBoundInputs<T>, lambda_next: T) -> Result<T> {
    inputs.validate()?;
    check_lambda(lambda_next)?;
    let ln = inputs.ln_amplitude() + (inputs.r - inputs.k) * T::c(0.5) * lambda_next.ln();
    Ok(ln.exp())
}

/// `λ_{N+1}^{−k/2} e^{c_k K}‖ψ0‖_{k/2} + K d λ_{N+1}^{(r−k)/2} e^{c_k K}‖ψ0‖_{k/2}`:
/// bound on `‖Υ^u_t ψ0 − X^u_{(N)}(t,0) π_N ψ0‖`, uniform in `t` and in controls
/// with `L¹`-norm at most `K`.
pub fn galerkin_error_bound<T: Real>(inputs: &GenericBoundInputs<T>, lambda_next: T) -> Result<T> {
    inputs.validate()?;
    check_lambda(lambda_next)?;
    let growth = inputs.c_k * inputs.l1_budget + inputs.snorm.ln();
    let ln_l = lambda_next.ln();
    let projection = (growth - inputs.k * T::c(0.5) * ln_l).exp();
    let coupling = inputs.l1_budget * tail_coupling_bound(inputs, lambda_next)?;
    Ok(projection + coupling)
}

/// Result of the generic truncation search.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MinDim<T> {
    /// Smallest `N` with `λ_{N+1}` above the threshold.
    Found { n: usize, ln_threshold: T },
    /// No `N ≤ n_cap` qualifies.
    Unsat { ln_threshold: T, n_cap: usize },
}

impl<T: Real> MinDim<T> {
    pub fn ln_threshold(&self) -> T {
        match self {
            MinDim::Found { ln_threshold, .. } | MinDim::Unsat { ln_threshold, .. } => *ln_threshold,
        }
    }

    pub fn order(&self) -> Option<usize> {
        match self {
            MinDim::Found { n, .. } => Some(*n),
            MinDim::Unsat { .. } => None,
        }
    }
}

/// Smallest `N ≤ n_cap` with `λ_{N+1} > (K d e^{c_k K} ‖ψ0‖_{k/2} / ε)^{2/(k−r)}`.
///
/// The spectrum is non-decreasing, so the search is a bisection on `N`.
pub fn min_galerkin_dim<T: Real>(
    system: &ControlSystem<T>,
    inputs: &GenericBoundInputs<T>,
    epsilon: T,
    n_cap: usize,
) -> Result<MinDim<T>> {
    inputs.validate()?;
    if !(epsilon > T::zero()) {
        return Err(Error::arg("epsilon", format!("must be positive, got {epsilon}")));
    }
    let ln_threshold = (inputs.l1_budget.ln() + inputs.ln_amplitude() - epsilon.ln()) * T::c(2.0)
        / (inputs.k - inputs.r);
    let cap = match system.max_dimension() {
        Some(d) => n_cap.min(d.saturating_sub(1)),
        None => n_cap,
    };
    let passes = |n: usize| -> Result<bool> { Ok(system.spectrum.eigenvalue(n + 1)?.ln() > ln_threshold) };
    if cap == 0 || !passes(cap)? {
        return Ok(MinDim::Unsat { ln_threshold, n_cap: cap });
    }
    let (mut lo, mut hi) = (1usize, cap);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if passes(mid)? {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(MinDim::Found { n: lo, ln_threshold })
}
