//! Open-loop control synthesis by sampled Lyapunov descent on a Galerkin
//! approximation, with an a posteriori certificate for the full system.
//!
//! With `V(ψ) = 1 − |⟨φ_t, ψ⟩|²` one has
//! `dV/dt = −2u Re(⟨φ_t, Bψ⟩ conj(⟨φ_t, ψ⟩))`, so the feedback
//! `u = gain · Re(⟨φ_t, Bψ⟩ conj(⟨φ_t, ψ⟩))` gives `dV/dt = −2u²/gain ≤ 0`.
//! The feedback is sampled every `sample_dt` and held, which yields a
//! piecewise-constant control that can be replayed through
//! [`Propagator::propagate`](crate::propagator::Propagator::propagate).

use std::io::Write;

use crate::bounds::{inputs, BoundReport, TridiagonalBounds};
use crate::control::{PiecewiseConstantControl, Segment};
use crate::error::{Error, Result};
use crate::galerkin::GalerkinSystem;
use crate::propagator::{fmt17, Propagator};
use crate::scalar::{cabs, cabs2, Real};
use crate::state::{QuantumState, UNIT_NORM_TOL};
use crate::system::ControlSystem;

/// `1 − |⟨φ_target, ψ⟩|²` for a unit-norm state.
pub fn lyapunov_value<T: Real>(psi: &QuantumState<T>, target: usize) -> Result<T> {
    let dev = crate::scalar::rabs(psi.norm() - T::one());
    if dev > T::c(UNIT_NORM_TOL) {
        return Err(Error::Contract(format!("Lyapunov value needs a unit state (norm off by {dev:e})")));
    }
    check_target(target, psi.dim())?;
    Ok(value_of(psi.coefficients().as_slice(), target))
}

fn value_of<T: Real>(psi: &[nalgebra::Complex<T>], target: usize) -> T {
    (T::one() - cabs2(psi[target - 1])).max(T::zero()).min(T::one())
}

fn check_target(target: usize, dim: usize) -> Result<()> {
    if target == 0 || target > dim {
        return Err(Error::arg("target", format!("{target} outside 1..={dim}")));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct LyapunovConfig<T> {
    pub target: usize,
    pub horizon: T,
    pub sample_dt: T,
    pub gain: T,
    /// Halve a held value until the exact step does not increase `V`.
    pub descent_safeguard: bool,
    pub max_backtracks: usize,
}

impl<T: Real> Default for LyapunovConfig<T> {
    fn default() -> Self {
        Self {
            target: 2,
            horizon: T::c(120.0),
            sample_dt: T::c(1e-2),
            gain: T::one(),
            descent_safeguard: true,
            max_backtracks: 60,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LyapunovRun<T: Real> {
    pub config: LyapunovConfig<T>,
    pub initial_state: QuantumState<T>,
    pub control: PiecewiseConstantControl<T>,
    /// Un-safeguarded feedback value computed at each sample.
    pub feedback: Vec<T>,
    /// `(t_i, V(ψ(t_i)))` for `i = 0..=steps`.
    pub v_trace: Vec<(T, T)>,
    pub final_state: QuantumState<T>,
    pub final_fidelity: T,
    pub backtracks: usize,
    /// `max(0, max_i V_{i+1} − V_i) / sample_dt²`.
    pub descent_constant: T,
    pub stagnation: Option<String>,
}

/// Sample-and-hold Lyapunov loop on a single-channel Galerkin system.
pub fn synthesize<T: Real>(
    galerkin: &GalerkinSystem<T>,
    psi0: &QuantumState<T>,
    config: &LyapunovConfig<T>,
) -> Result<LyapunovRun<T>> {
    if galerkin.channels() != 1 {
        return Err(Error::Unsupported(format!(
            "Lyapunov synthesis needs one control channel, got {}",
            galerkin.channels()
        )));
    }
    if !(config.gain > T::zero()) {
        return Err(Error::arg("gain", format!("must be positive, got {}", config.gain)));
    }
    if !(config.sample_dt > T::zero()) || !(config.horizon >= T::zero()) {
        return Err(Error::arg(
            "sample_dt",
            format!("need sample_dt > 0 and T ≥ 0, got {} and {}", config.sample_dt, config.horizon),
        ));
    }
    if psi0.dim() != galerkin.order() {
        return Err(Error::Shape(format!(
            "initial state has dimension {}, Galerkin order is {}",
            psi0.dim(),
            galerkin.order()
        )));
    }
    check_target(config.target, galerkin.order())?;
    let v0 = lyapunov_value(psi0, config.target)?;
    let ratio = (config.horizon / config.sample_dt).to_f64();
    let steps = ratio.round() as usize;
    if (ratio - steps as f64).abs() > 1e-9 * ratio.max(1.0) {
        return Err(Error::arg(
            "sample_dt",
            format!("{} does not divide the horizon {}", config.sample_dt, config.horizon),
        ));
    }

    let b = galerkin.b_matrix(1)?;
    let ti = config.target - 1;
    let mut prop = Propagator::new(galerkin);
    let mut psi = psi0.coefficients().clone();
    let mut v = v0;
    let mut control = PiecewiseConstantControl::empty();
    let mut feedback = Vec::with_capacity(steps);
    let mut v_trace = Vec::with_capacity(steps + 1);
    v_trace.push((T::zero(), v));
    let mut backtracks = 0;
    let mut max_increase = T::zero();
    let stagnation = (v0 > T::zero() && cabs(psi[ti]) == T::zero()).then(|| {
        format!(
            "⟨φ_{}, ψ0⟩ = 0: the feedback vanishes identically and the loop cannot leave ψ0's orbit",
            config.target
        )
    });

    for i in 0..steps {
        let b_psi = b.row(ti) * &psi;
        let fb = config.gain * (b_psi[(0, 0)] * psi[ti].conj()).re;
        feedback.push(fb);
        let mut u = fb;
        let mut next = prop.step(&[u], config.sample_dt, &psi)?;
        let mut v_next = value_of(next.as_slice(), config.target);
        if config.descent_safeguard && v_next > v {
            let mut tries = 0;
            while v_next > v && tries < config.max_backtracks {
                u *= T::c(0.5);
                next = prop.step(&[u], config.sample_dt, &psi)?;
                v_next = value_of(next.as_slice(), config.target);
                tries += 1;
                backtracks += 1;
            }
            if v_next > v {
                u = T::zero();
                next = prop.step(&[u], config.sample_dt, &psi)?;
                v_next = value_of(next.as_slice(), config.target);
            }
        }
        max_increase = max_increase.max(v_next - v);
        control.push(Segment {
            duration: config.sample_dt,
            values: vec![u],
        })?;
        psi = next;
        v = v_next;
        v_trace.push((config.sample_dt * T::idx(i + 1), v));
    }

    let final_fidelity = cabs2(psi[ti]);
    Ok(LyapunovRun {
        config: config.clone(),
        initial_state: psi0.clone(),
        control,
        feedback,
        v_trace,
        final_state: QuantumState::unnormalized(psi),
        final_fidelity,
        backtracks,
        descent_constant: max_increase / (config.sample_dt * config.sample_dt),
        stagnation,
    })
}

impl<T: Real> LyapunovRun<T> {
    /// `t,V,u` rows; `u` is the value held on `[t, t + sample_dt)` and is empty
    /// on the final row.
    pub fn write_v_trace_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        let io = |e: std::io::Error| Error::Numerical(format!("write failed: {e}"));
        writeln!(out, "t,V,u").map_err(io)?;
        let segs = self.control.segments();
        for (i, (t, v)) in self.v_trace.iter().enumerate() {
            let u = segs.get(i).map(|s| fmt17(s.values[0].to_f64())).unwrap_or_default();
            writeln!(out, "{},{},{}", fmt17(t.to_f64()), fmt17(v.to_f64()), u).map_err(io)?;
        }
        Ok(())
    }
}

/// Certified statement about the infinite-dimensional system.
#[derive(Clone, Debug, PartialEq)]
pub enum CertificateStatus {
    Certified,
    /// The truncation bound is not below the requested margin.
    Unavailable(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct FidelityCertificate {
    pub status: CertificateStatus,
    pub order: usize,
    pub l1_norm: f64,
    /// Bound on `‖π_N Υ^u_T ψ0 − X^u_{(N)}(T,0) ψ0‖`.
    pub error_bound: f64,
    pub final_amplitude: f64,
    pub final_fidelity: f64,
    /// Lower bound on `|⟨φ_t, Υ^u_T ψ0⟩|`.
    pub certified_amplitude: f64,
    /// Lower bound on `|⟨φ_t, Υ^u_T ψ0⟩|²`.
    pub certified_fidelity: f64,
    pub report: BoundReport,
}

/// Transfers a finite-dimensional run to the full tri-diagonal system.
///
/// `ψ0` must lie in a finite span of eigenstates; by the triangle inequality the
/// projection error is at most `Σ_m |⟨φ_m, ψ0⟩| · bound(m, N, K)`, and since
/// `φ_t` lies in the range of `π_N`,
/// `|⟨φ_t, Υ^u_T ψ0⟩| ≥ |⟨φ_t, X^u_{(N)} ψ0⟩| − error`.
pub fn certify_infinite_dim<T: Real>(
    run: &LyapunovRun<T>,
    system: &ControlSystem<T>,
    order: usize,
    margin: T,
) -> Result<FidelityCertificate> {
    if !(margin > T::zero()) {
        return Err(Error::arg("margin", format!("must be positive, got {margin}")));
    }
    if run.initial_state.dim() != order {
        return Err(Error::Shape(format!(
            "run has dimension {}, certificate requested for N = {order}",
            run.initial_state.dim()
        )));
    }
    let mut tb = TridiagonalBounds::new(system)?;
    let k = run.control.l1_norm();
    let mut error = T::zero();
    for m in 1..=order {
        let c = cabs(run.initial_state.coefficient(m));
        if c == T::zero() {
            continue;
        }
        if order < tb.first_order(m) {
            return Err(Error::InvalidDimension(format!("no projection bound for n = {m} at N = {order}")));
        }
        error += c * tb.projection(m, order, k)?.exp();
    }
    let amplitude = cabs(run.final_state.coefficient(run.config.target));
    let certified_amplitude = (amplitude - error).max(T::zero());
    let certified_fidelity = if error == T::zero() {
        run.final_fidelity
    } else {
        certified_amplitude * certified_amplitude
    };
    let status = if error < margin {
        CertificateStatus::Certified
    } else {
        CertificateStatus::Unavailable(format!(
            "projection bound {:e} is not below the margin {:e} at N = {order}",
            error.to_f64(),
            margin.to_f64()
        ))
    };
    let report = BoundReport::from_value(
        "infinite-dim-fidelity-lower-bound",
        inputs([
            ("N", order as f64),
            ("K", k.to_f64()),
            ("margin", margin.to_f64()),
            ("error_bound", error.to_f64()),
            ("final_fidelity", run.final_fidelity.to_f64()),
            ("target", run.config.target as f64),
        ]),
        certified_fidelity.to_f64(),
        "(|<phi_t, X_N psi0>| - sum_m |c_m| * projection_bound(m, N, K))^2",
    );
    Ok(FidelityCertificate {
        status,
        order,
        l1_norm: k.to_f64(),
        error_bound: error.to_f64(),
        final_amplitude: amplitude.to_f64(),
        final_fidelity: run.final_fidelity.to_f64(),
        certified_amplitude: certified_amplitude.to_f64(),
        certified_fidelity: certified_fidelity.to_f64(),
        report,
    })
}
