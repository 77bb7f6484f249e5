//! Galerkin approximations of bilinear quantum control systems with
//! certified a priori truncation bounds.
//!
//! A system `dψ/dt = (A + Σ u_l B_l)ψ` is described spectrally (eigenvalues of
//! `-iA`, matrix elements of each `B_l`), compressed onto its first `N`
//! eigenstates, and propagated under piecewise-constant controls. The
//! [`bounds`] module evaluates coupling constants and error estimates that
//! say how large `N` must be for the compression to track the full dynamics.
//!
//! All numerics are generic over [`Real`]; the `*64` aliases below fix `f64`.

// `!(x > 0)` is deliberate: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod chains;
pub mod control;
pub mod error;
pub mod galerkin;
pub mod io;
pub mod lyapunov;
pub mod models;
pub mod propagator;
pub mod quadrature;
pub mod scalar;
pub mod state;
pub mod system;

pub use control::{PiecewiseConstantControl, Segment};
pub use error::{Error, Result};
pub use galerkin::{build_galerkin, GalerkinSystem};
pub use propagator::{expm_unitary, propagate, propagate_oracle, PropagationResult, Propagator};
pub use scalar::Real;
pub use state::QuantumState;
pub use system::{ControlSystem, Couplings, ModelTag, Spectrum};

pub use nalgebra::Complex;

/// Library version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub type Complex64 = Complex<f64>;
pub type ControlSystem64 = ControlSystem<f64>;
pub type GalerkinSystem64 = GalerkinSystem<f64>;
pub type QuantumState64 = QuantumState<f64>;
pub type Control64 = PiecewiseConstantControl<f64>;
pub type Spectrum64 = Spectrum<f64>;
pub type Couplings64 = Couplings<f64>;
