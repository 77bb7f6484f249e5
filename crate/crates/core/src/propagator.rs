//! Galerkin propagators `X^u_{(N)}(t, 0)` as ordered products of exact
//! segment exponentials, and a fixed-step RK4 oracle used to cross-check them.

use std::collections::VecDeque;
use std::io::Write;
use std::sync::Arc;

use nalgebra::{Complex, DMatrix, DVector};

use crate::control::PiecewiseConstantControl;
use crate::error::{Error, Result};
use crate::galerkin::GalerkinSystem;
use crate::scalar::{cabs2, phase, Real};
use crate::state::QuantumState;

/// Relative tolerance on `‖G + G†‖_F / ‖G‖_F` accepted as skew-Hermitian.
pub const SKEW_HERMITIAN_TOL: f64 = 1e-12;

/// Cached eigen-decompositions per propagator.
pub const CACHE_CAPACITY: usize = 64;

/// `i·G = V diag(w) V†` for a skew-Hermitian generator `G`, so that
/// `e^{tG} = V diag(e^{-i w t}) V†`.
#[derive(Clone, Debug)]
pub struct HermitianDecomposition<T: Real> {
    values: DVector<T>,
    vectors: DMatrix<Complex<T>>,
}

impl<T: Real> HermitianDecomposition<T> {
    pub fn new(generator: &DMatrix<Complex<T>>) -> Result<Self> {
        let n = generator.nrows();
        if n == 0 || generator.ncols() != n {
            return Err(Error::Shape(format!(
                "generator must be square and non-empty, got {}x{}",
                generator.nrows(),
                generator.ncols()
            )));
        }
        let scale = generator.norm();
        let defect = (generator + generator.adjoint()).norm();
        if !(defect <= T::c(SKEW_HERMITIAN_TOL) * T::one().max(scale)) {
            return Err(Error::Contract(format!(
                "generator is not skew-Hermitian: ‖G + G†‖_F = {defect:e}, ‖G‖_F = {scale:e}"
            )));
        }
        let i = Complex::new(T::zero(), T::one());
        let h = generator * i;
        let h = (&h + h.adjoint()) * Complex::new(T::c(0.5), T::zero());
        let eig = h.symmetric_eigen();
        if eig.eigenvalues.iter().any(|w| !w.is_finite()) {
            return Err(Error::Numerical("eigensolver returned non-finite eigenvalues".into()));
        }
        Ok(Self {
            values: eig.eigenvalues,
            vectors: eig.eigenvectors,
        })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Eigenvalues of `i·G`.
    pub fn values(&self) -> &DVector<T> {
        &self.values
    }

    /// `e^{tG} ψ`.
    pub fn apply(&self, t: T, psi: &DVector<Complex<T>>) -> DVector<Complex<T>> {
        let mut coeff = self.vectors.ad_mul(psi);
        for (c, w) in coeff.iter_mut().zip(self.values.iter()) {
            *c *= phase(-*w * t);
        }
        &self.vectors * coeff
    }

    /// `e^{tG}` as a dense matrix.
    pub fn exponential(&self, t: T) -> DMatrix<Complex<T>> {
        let mut scaled = self.vectors.clone();
        for (mut col, w) in scaled.column_iter_mut().zip(self.values.iter()) {
            col *= phase(-*w * t);
        }
        scaled * self.vectors.adjoint()
    }
}

/// `e^{tG}` for skew-Hermitian `G`, via the Hermitian eigen-decomposition of `iG`.
pub fn expm_unitary<T: Real>(generator: &DMatrix<Complex<T>>, t: T) -> Result<DMatrix<Complex<T>>> {
    Ok(HermitianDecomposition::new(generator)?.exponential(t))
}

/// Final state and optional samples of one propagation.
#[derive(Clone, Debug)]
pub struct PropagationResult<T: Real> {
    pub final_state: QuantumState<T>,
    pub trajectory: Vec<(T, QuantumState<T>)>,
    pub sample_every: Option<T>,
    /// `max |‖ψ(t)‖ - ‖ψ0‖|` over the final state and every sample.
    pub max_norm_drift: T,
}

/// Propagation driver owning a bounded LRU cache of decompositions keyed by
/// the exact bit pattern of the control vector. One per task.
#[derive(Debug)]
pub struct Propagator<'a, T: Real> {
    galerkin: &'a GalerkinSystem<T>,
    cache: VecDeque<(Vec<u64>, Arc<HermitianDecomposition<T>>)>,
    capacity: usize,
}

impl<'a, T: Real> Propagator<'a, T> {
    pub fn new(galerkin: &'a GalerkinSystem<T>) -> Self {
        Self::with_capacity(galerkin, CACHE_CAPACITY)
    }

    pub fn with_capacity(galerkin: &'a GalerkinSystem<T>, capacity: usize) -> Self {
        Self {
            galerkin,
            cache: VecDeque::new(),
            capacity: capacity.max(1),
        }
    }

    pub fn galerkin(&self) -> &'a GalerkinSystem<T> {
        self.galerkin
    }

    pub fn cached(&self) -> usize {
        self.cache.len()
    }

    /// Decomposition of `A⁽ᴺ⁾ + Σ u_l B_l⁽ᴺ⁾`, from cache when possible.
    pub fn decomposition(&mut self, u: &[T]) -> Result<Arc<HermitianDecomposition<T>>> {
        let key: Vec<u64> = u.iter().map(|v| v.key_bits()).collect();
        if let Some(pos) = self.cache.iter().position(|(k, _)| *k == key) {
            let entry = self.cache.remove(pos).expect("position is in range");
            let dec = entry.1.clone();
            self.cache.push_front(entry);
            return Ok(dec);
        }
        let dec = Arc::new(HermitianDecomposition::new(&self.galerkin.generator(u)?)?);
        self.cache.push_front((key, dec.clone()));
        self.cache.truncate(self.capacity);
        Ok(dec)
    }

    /// One held segment: `e^{dt(A + Σ u_l B_l)} ψ`.
    pub fn step(&mut self, u: &[T], dt: T, psi: &DVector<Complex<T>>) -> Result<DVector<Complex<T>>> {
        if dt == T::zero() {
            return Ok(psi.clone());
        }
        Ok(self.decomposition(u)?.apply(dt, psi))
    }

    /// Ordered product of segment exponentials applied to `psi0`.
    pub fn propagate(
        &mut self,
        control: &PiecewiseConstantControl<T>,
        psi0: &QuantumState<T>,
        sample_every: Option<T>,
    ) -> Result<PropagationResult<T>> {
        self.check_inputs(control, psi0)?;
        if let Some(h) = sample_every {
            if !(h > T::zero()) {
                return Err(Error::arg("sample_every", format!("must be positive, got {h}")));
            }
        }
        let norm0 = psi0.norm();
        let mut drift = T::zero();
        let mut track = |psi: &DVector<Complex<T>>| {
            let n = psi.iter().fold(T::zero(), |a, c| a + cabs2(*c)).sqrt();
            drift = drift.max(crate::scalar::rabs(n - norm0));
        };
        let mut psi = psi0.coefficients().clone();
        let mut trajectory = Vec::new();
        if sample_every.is_some() {
            trajectory.push((T::zero(), psi0.clone()));
        }
        let mut t0 = T::zero();
        let mut next_index = 1usize;
        for seg in control.segments() {
            if seg.duration == T::zero() {
                continue;
            }
            let dec = self.decomposition(&seg.values)?;
            let t1 = t0 + seg.duration;
            if let Some(h) = sample_every {
                loop {
                    let ts = h * T::idx(next_index);
                    if ts >= t1 {
                        break;
                    }
                    if ts > t0 {
                        let inner = dec.apply(ts - t0, &psi);
                        track(&inner);
                        trajectory.push((ts, QuantumState::unnormalized(inner)));
                    }
                    next_index += 1;
                }
            }
            psi = dec.apply(seg.duration, &psi);
            track(&psi);
            if sample_every.is_some() {
                trajectory.push((t1, QuantumState::unnormalized(psi.clone())));
            }
            t0 = t1;
        }
        Ok(PropagationResult {
            final_state: wrap_like(psi0, psi),
            trajectory,
            sample_every,
            max_norm_drift: drift,
        })
    }

    /// Inverts [`Propagator::propagate`]: applies the factors in reverse
    /// order with negated durations.
    pub fn propagate_backward(
        &mut self,
        control: &PiecewiseConstantControl<T>,
        psi_t: &QuantumState<T>,
    ) -> Result<QuantumState<T>> {
        self.check_inputs(control, psi_t)?;
        let mut psi = psi_t.coefficients().clone();
        for seg in control.segments().iter().rev() {
            if seg.duration == T::zero() {
                continue;
            }
            psi = self.decomposition(&seg.values)?.apply(-seg.duration, &psi);
        }
        Ok(wrap_like(psi_t, psi))
    }

    fn check_inputs(&self, control: &PiecewiseConstantControl<T>, psi0: &QuantumState<T>) -> Result<()> {
        check_inputs(self.galerkin, control, psi0)
    }
}

fn check_inputs<T: Real>(
    galerkin: &GalerkinSystem<T>,
    control: &PiecewiseConstantControl<T>,
    psi0: &QuantumState<T>,
) -> Result<()> {
    if psi0.dim() != galerkin.order() {
        return Err(Error::Shape(format!(
            "initial state has dimension {}, Galerkin order is {}",
            psi0.dim(),
            galerkin.order()
        )));
    }
    if let Some(c) = control.channels() {
        if c != galerkin.channels() {
            return Err(Error::Shape(format!(
                "control has {c} channels, system has {}",
                galerkin.channels()
            )));
        }
    }
    Ok(())
}

fn wrap_like<T: Real>(template: &QuantumState<T>, psi: DVector<Complex<T>>) -> QuantumState<T> {
    if template.is_physical() {
        QuantumState::new(psi.clone()).unwrap_or_else(|_| QuantumState::unnormalized(psi))
    } else {
        QuantumState::unnormalized(psi)
    }
}

/// Convenience wrapper with a fresh cache.
pub fn propagate<T: Real>(
    galerkin: &GalerkinSystem<T>,
    control: &PiecewiseConstantControl<T>,
    psi0: &QuantumState<T>,
    sample_every: Option<T>,
) -> Result<PropagationResult<T>> {
    Propagator::new(galerkin).propagate(control, psi0, sample_every)
}

/// Default oracle step: `1e-4 ×` the shortest non-empty segment, floored at `1e-6`.
pub fn default_oracle_step<T: Real>(control: &PiecewiseConstantControl<T>) -> T {
    let shortest = control
        .segments()
        .iter()
        .map(|s| s.duration)
        .filter(|d| *d > T::zero())
        .fold(None, |acc: Option<T>, d| Some(acc.map_or(d, |a| a.min(d))));
    match shortest {
        Some(d) => (d * T::c(1e-4)).max(T::c(1e-6)),
        None => T::c(1e-6),
    }
}

/// Classical fixed-step RK4 on `ψ' = (A⁽ᴺ⁾ + Σ u_l B_l⁽ᴺ⁾)ψ`. The last step of
/// each segment is shortened to land on the boundary. No renormalisation.
pub fn propagate_oracle<T: Real>(
    galerkin: &GalerkinSystem<T>,
    control: &PiecewiseConstantControl<T>,
    psi0: &QuantumState<T>,
    dt: T,
) -> Result<QuantumState<T>> {
    if !(dt > T::zero()) {
        return Err(Error::arg("dt", format!("oracle step must be positive, got {dt}")));
    }
    check_inputs(galerkin, control, psi0)?;
    let half = T::c(0.5);
    let sixth = T::one() / T::c(6.0);
    let mut psi = psi0.coefficients().clone();
    for seg in control.segments() {
        if seg.duration == T::zero() {
            continue;
        }
        let g = galerkin.generator(&seg.values)?;
        let steps = (seg.duration / dt).ceil().to_f64().max(1.0) as usize;
        let mut done = T::zero();
        for i in 0..steps {
            let h = if i + 1 == steps { seg.duration - done } else { dt };
            if h <= T::zero() {
                break;
            }
            let hc = Complex::new(h, T::zero());
            let k1 = &g * &psi;
            let k2 = &g * (&psi + &k1 * (hc * half));
            let k3 = &g * (&psi + &k2 * (hc * half));
            let k4 = &g * (&psi + &k3 * hc);
            let two = Complex::new(T::c(2.0), T::zero());
            psi += (k1 + k2 * two + k3 * two + k4) * (hc * sixth);
            done += h;
        }
    }
    Ok(QuantumState::unnormalized(psi))
}

/// Writes `t, re_c1, im_c1, …, re_cN, im_cN, norm, snorm_half` rows with
/// 17 significant digits.
pub fn write_trajectory_csv<T: Real, W: Write>(
    out: &mut W,
    trajectory: &[(T, QuantumState<T>)],
    eigenvalues: &[T],
) -> Result<()> {
    let io = |e: std::io::Error| Error::Numerical(format!("write failed: {e}"));
    let n = eigenvalues.len();
    let mut header = String::from("t");
    for j in 1..=n {
        header.push_str(&format!(",re_c{j},im_c{j}"));
    }
    header.push_str(",norm,snorm_half");
    writeln!(out, "{header}").map_err(io)?;
    for (t, psi) in trajectory {
        let mut line = fmt17(t.to_f64());
        for j in 1..=n {
            let c = psi.coefficient(j);
            line.push(',');
            line.push_str(&fmt17(c.re.to_f64()));
            line.push(',');
            line.push_str(&fmt17(c.im.to_f64()));
        }
        line.push(',');
        line.push_str(&fmt17(psi.norm().to_f64()));
        line.push(',');
        line.push_str(&fmt17(psi.s_norm_with(eigenvalues, T::c(0.5))?.to_f64()));
        writeln!(out, "{line}").map_err(io)?;
    }
    Ok(())
}

/// Fixed 17-significant-digit scientific rendering.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}
