//! Combinatorial transition and truncation bounds for tri-diagonal systems.
//!
//! With `L(j) = sup_{p,q ≤ j} |b_{p,q}|` and `β = 2` when `B` has a zero
//! diagonal (`β = 3` otherwise), for `u` of `L¹`-norm `K`:
//!
//! * `|⟨φ_l, Υ^u_t φ_n⟩| ≤ β^{l−n} K^{l−n} ∏_{j=l+1}^{2l−n} L(j) / (l−n)!`
//! * `‖π_N Υ^u_t φ_n − X^u_{(N)}(t,0) φ_n‖ ≤ β^{N−n} L(N+1) ∏_{j=N+1}^{2N−n} L(j) K^{N−n+1} / (N−n)!`
//!
//! The second follows from `|b_{N,N+1}| ≤ L(N+1)` times the first at `l = N`.
//! For the planar rotor and the harmonic oscillator the published closed forms
//! `K^{N−1}/(N−2)!` (any unit state in `span(φ_1, φ_2)`) and
//! `2^{N−1} √(N+2) √((2N)!/(N+1)!) K^N / (N−1)!` (from `φ_1`) are used as
//! well; the reported value is the larger of the closed form and the general
//! expression, so it is a valid bound either way.

use crate::error::{Error, Result};
use crate::scalar::{cabs, Real};
use crate::system::{ControlSystem, ModelTag};

use super::lnfact::ln_factorial;

/// Running maximum `L(j) = sup_{p,q ≤ j} |b_{p,q}|`, grown on demand.
#[derive(Clone, Debug)]
pub struct CouplingEnvelope<'a, T: Real> {
    system: &'a ControlSystem<T>,
    running: Vec<T>,
}

impl<'a, T: Real> CouplingEnvelope<'a, T> {
    pub fn new(system: &'a ControlSystem<T>) -> Self {
        Self {
            system,
            running: Vec::new(),
        }
    }

    /// `L(j)` for `j ≥ 1`.
    pub fn get(&mut self, j: usize) -> Result<T> {
        if j == 0 {
            return Err(Error::InvalidDimension("L(j) is defined for j ≥ 1".into()));
        }
        if let Some(max) = self.system.max_dimension() {
            if j > max {
                return Err(Error::InvalidDimension(format!(
                    "L({j}) needs couplings beyond the {max} defined states"
                )));
            }
        }
        let couplings = &self.system.couplings;
        while self.running.len() < j {
            let m = self.running.len() + 1;
            let band = couplings.bandwidth().unwrap_or(m);
            let mut best = self.running.last().copied().unwrap_or_else(T::zero);
            for l in 1..=couplings.channels() {
                for q in m.saturating_sub(band).max(1)..=m {
                    best = best.max(cabs(couplings.element(l, m, q)?));
                    best = best.max(cabs(couplings.element(l, q, m)?));
                }
            }
            self.running.push(best);
        }
        Ok(self.running[j - 1])
    }

    /// `Σ_{j=from}^{to} ln L(j)` (zero for an empty range).
    pub fn ln_product(&mut self, from: usize, to: usize) -> Result<T> {
        let mut acc = T::zero();
        for j in from..=to {
            acc += self.get(j)?.ln();
        }
        Ok(acc)
    }
}

/// Tri-diagonal bound evaluator with a cached envelope.
#[derive(Clone, Debug)]
pub struct TridiagonalBounds<'a, T: Real> {
    system: &'a ControlSystem<T>,
    envelope: CouplingEnvelope<'a, T>,
    base: T,
}

impl<'a, T: Real> TridiagonalBounds<'a, T> {
    pub fn new(system: &'a ControlSystem<T>) -> Result<Self> {
        if !system.is_tridiagonal() {
            return Err(Error::Shape(format!(
                "`{}` is not tri-diagonal (bandwidth {:?})",
                system.name,
                system.couplings.bandwidth()
            )));
        }
        if system.channels() != 1 {
            return Err(Error::Unsupported(format!(
                "tri-diagonal bounds need a single control channel, `{}` has {}",
                system.name,
                system.channels()
            )));
        }
        let base = if system.couplings.diagonal_is_zero() {
            T::c(2.0)
        } else {
            T::c(3.0)
        };
        Ok(Self {
            system,
            envelope: CouplingEnvelope::new(system),
            base,
        })
    }

    pub fn envelope(&mut self) -> &mut CouplingEnvelope<'a, T> {
        &mut self.envelope
    }

    /// `ln` of the bound on `|⟨φ_l, Υ^u_t φ_n⟩|`; `-inf` when `K = 0`.
    pub fn transition(&mut self, n: usize, l: usize, l1_budget: T) -> Result<T> {
        if n == 0 || l <= n {
            return Err(Error::arg("l", format!("need l > n ≥ 1, got n = {n}, l = {l}")));
        }
        check_budget(l1_budget)?;
        let m = l - n;
        let ln_l = self.envelope.ln_product(l + 1, 2 * l - n)?;
        Ok(T::idx(m) * (self.base.ln() + l1_budget.ln()) + ln_l - ln_factorial::<T>(m))
    }

    /// General expression for `‖π_N Υ^u_t φ_n − X^u_{(N)}(t,0) φ_n‖`.
    pub fn projection_general(&mut self, n: usize, order: usize, l1_budget: T) -> Result<T> {
        if n == 0 || order < n {
            return Err(Error::arg("N", format!("need N ≥ n ≥ 1, got n = {n}, N = {order}")));
        }
        check_budget(l1_budget)?;
        let m = order - n;
        let ln_l = self.envelope.get(order + 1)?.ln() + self.envelope.ln_product(order + 1, 2 * order - n)?;
        Ok(T::idx(m) * self.base.ln() - ln_factorial::<T>(m) + ln_l + T::idx(m + 1) * l1_budget.ln())
    }

    /// Published closed form for the built-in model, if one applies to `(n, N)`.
    pub fn projection_closed_form(&self, n: usize, order: usize, l1_budget: T) -> Option<T> {
        let ln_k = l1_budget.ln();
        match self.system.tag {
            ModelTag::Rotor if n <= 2 && order >= 2 => {
                Some(T::idx(order - 1) * ln_k - ln_factorial::<T>(order - 2))
            }
            ModelTag::Oscillator if n == 1 => {
                let nn = order;
                Some(
                    T::idx(nn - 1) * T::c(2.0).ln() + T::c(0.5) * T::idx(nn + 2).ln() - ln_factorial::<T>(nn - 1)
                        + T::c(0.5) * (ln_factorial::<T>(2 * nn) - ln_factorial::<T>(nn + 1))
                        + T::idx(nn) * ln_k,
                )
            }
            _ => None,
        }
    }

    /// `ln` of the projection-error bound: the larger of the general
    /// expression and the model's closed form.
    pub fn projection(&mut self, n: usize, order: usize, l1_budget: T) -> Result<T> {
        let general = self.projection_general(n, order, l1_budget)?;
        Ok(match self.projection_closed_form(n, order, l1_budget) {
            Some(c) => c.max(general),
            None => general,
        })
    }

    /// First order at which the projection bound is defined for `n`.
    pub fn first_order(&self, n: usize) -> usize {
        match self.system.tag {
            ModelTag::Rotor if n <= 2 => 2,
            _ => n,
        }
    }
}

fn check_budget<T: Real>(k: T) -> Result<()> {
    if !(k >= T::zero()) || !k.is_finite() {
        return Err(Error::arg("K", format!("must be finite and ≥ 0, got {k}")));
    }
    Ok(())
}

/// `ln` of the bound on `|⟨φ_l, Υ^u_t φ_n⟩|` for `‖u‖_{L¹} ≤ K`.
pub fn transition_bound<T: Real>(system: &ControlSystem<T>, n: usize, l: usize, l1_budget: T) -> Result<T> {
    TridiagonalBounds::new(system)?.transition(n, l, l1_budget)
}

/// `ln` of the bound on `‖π_N Υ^u_t φ_n − X^u_{(N)}(t,0) φ_n‖` for `‖u‖_{L¹} ≤ K`.
pub fn tridiagonal_projection_error_bound<T: Real>(
    system: &ControlSystem<T>,
    n: usize,
    order: usize,
    l1_budget: T,
) -> Result<T> {
    TridiagonalBounds::new(system)?.projection(n, order, l1_budget)
}

/// Outcome of the tri-diagonal truncation search.
#[derive(Clone, Debug, PartialEq)]
pub struct TridiagonalMinDim<T> {
    /// First qualifying order, `None` if unsatisfiable below the cap.
    pub order: Option<usize>,
    /// `ln` bound at `order`.
    pub ln_bound: Option<T>,
    /// The order just below `order` and its `ln` bound, when it was evaluated.
    pub previous: Option<(usize, T)>,
    /// Whether the bound keeps decreasing over the few orders after `order`.
    pub tail_monotone: bool,
    pub n_cap: usize,
}

/// Smallest `N ≤ n_cap` whose projection-error bound is below `ε`.
pub fn min_galerkin_dim_tridiagonal<T: Real>(
    system: &ControlSystem<T>,
    n: usize,
    l1_budget: T,
    epsilon: T,
    n_cap: usize,
) -> Result<TridiagonalMinDim<T>> {
    if !(epsilon > T::zero()) {
        return Err(Error::arg("epsilon", format!("must be positive, got {epsilon}")));
    }
    let mut tb = TridiagonalBounds::new(system)?;
    let ln_eps = epsilon.ln();
    let start = tb.first_order(n);
    let mut previous = None;
    for order in start..=n_cap {
        let ln_b = tb.projection(n, order, l1_budget)?;
        if ln_b < ln_eps {
            let mut tail_monotone = true;
            let mut last = ln_b;
            for extra in 1..=3 {
                match tb.projection(n, order + extra, l1_budget) {
                    Ok(next) => {
                        tail_monotone &= next <= last;
                        last = next;
                    }
                    Err(_) => break,
                }
            }
            return Ok(TridiagonalMinDim {
                order: Some(order),
                ln_bound: Some(ln_b),
                previous,
                tail_monotone,
                n_cap,
            });
        }
        previous = Some((order, ln_b));
    }
    Ok(TridiagonalMinDim {
        order: None,
        ln_bound: None,
        previous,
        tail_monotone: false,
        n_cap,
    })
}
