use nalgebra::{Complex, DVector};

use crate::error::{Error, Result};
use crate::scalar::{cabs2, Real};
use crate::system::Spectrum;

/// Tolerance on `|‖ψ‖ - 1|` for states declared physical.
pub const UNIT_NORM_TOL: f64 = 1e-8;

/// Coefficients `c_j = ⟨φ_j, ψ⟩` of a state in the eigenbasis, `j = 1..N`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumState<T: Real> {
    coefficients: DVector<Complex<T>>,
    physical: bool,
}

impl<T: Real> QuantumState<T> {
    /// A unit-norm state; fails if the norm differs from one by more than
    /// [`UNIT_NORM_TOL`].
    pub fn new(coefficients: DVector<Complex<T>>) -> Result<Self> {
        let s = Self {
            coefficients,
            physical: true,
        };
        if s.dim() == 0 {
            return Err(Error::InvalidDimension("empty state".into()));
        }
        let dev = crate::scalar::rabs(s.norm() - T::one());
        if dev > T::c(UNIT_NORM_TOL) {
            return Err(Error::Contract(format!("state norm deviates from 1 by {dev:e}")));
        }
        Ok(s)
    }

    /// A vector used as intermediate data; no norm requirement.
    pub fn unnormalized(coefficients: DVector<Complex<T>>) -> Self {
        Self {
            coefficients,
            physical: false,
        }
    }

    /// `φ_n` in dimension `dim`.
    pub fn basis(dim: usize, n: usize) -> Result<Self> {
        if n == 0 || n > dim {
            return Err(Error::InvalidDimension(format!("basis index {n} outside 1..={dim}")));
        }
        let mut c = DVector::zeros(dim);
        c[n - 1] = Complex::new(T::one(), T::zero());
        Ok(Self {
            coefficients: c,
            physical: true,
        })
    }

    /// `cos(θ) φ_1 + sin(θ) φ_2` in dimension `dim ≥ 2`.
    pub fn tilted(dim: usize, theta: T) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidDimension("tilted state needs dimension ≥ 2".into()));
        }
        let mut c = DVector::zeros(dim);
        c[0] = Complex::new(theta.cos(), T::zero());
        c[1] = Complex::new(theta.sin(), T::zero());
        Ok(Self {
            coefficients: c,
            physical: true,
        })
    }

    pub fn dim(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_physical(&self) -> bool {
        self.physical
    }

    pub fn coefficients(&self) -> &DVector<Complex<T>> {
        &self.coefficients
    }

    pub fn into_coefficients(self) -> DVector<Complex<T>> {
        self.coefficients
    }

    /// `⟨φ_j, ψ⟩`, 1-based; zero beyond the stored dimension.
    pub fn coefficient(&self, j: usize) -> Complex<T> {
        if j == 0 || j > self.dim() {
            Complex::new(T::zero(), T::zero())
        } else {
            self.coefficients[j - 1]
        }
    }

    pub fn norm(&self) -> T {
        self.coefficients.iter().fold(T::zero(), |acc, c| acc + cabs2(*c)).sqrt()
    }

    /// `‖ψ‖_s` with the spectrum evaluated lazily.
    pub fn s_norm(&self, spectrum: &Spectrum<T>, s: T) -> Result<T> {
        let lam = spectrum.first(self.dim())?;
        self.s_norm_with(&lam, s)
    }

    /// `‖ψ‖_s = sqrt(Σ λ_j^{2s} |c_j|²)` given `λ_1..λ_N`.
    pub fn s_norm_with(&self, eigenvalues: &[T], s: T) -> Result<T> {
        if !(s >= T::zero()) {
            return Err(Error::InvalidExponent(format!("s-norm needs s ≥ 0, got {s}")));
        }
        if eigenvalues.len() < self.dim() {
            return Err(Error::InvalidDimension(format!(
                "state of dimension {} but only {} eigenvalues",
                self.dim(),
                eigenvalues.len()
            )));
        }
        if s == T::zero() {
            return Ok(self.norm());
        }
        let two_s = s + s;
        let sum = self
            .coefficients
            .iter()
            .zip(eigenvalues)
            .fold(T::zero(), |acc, (c, l)| acc + l.powf(two_s) * cabs2(*c));
        Ok(sum.sqrt())
    }

    /// `π_N ψ`: keeps the first `n` coefficients.
    pub fn project(&self, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidDimension("projection order must be ≥ 1".into()));
        }
        let keep = n.min(self.dim());
        Ok(Self {
            coefficients: self.coefficients.rows(0, keep).into_owned(),
            physical: false,
        })
    }

    /// Zero-pads (or truncates) to dimension `n`.
    pub fn resized(&self, n: usize) -> Self {
        let mut c = DVector::zeros(n);
        let keep = n.min(self.dim());
        c.rows_mut(0, keep).copy_from(&self.coefficients.rows(0, keep));
        Self {
            coefficients: c,
            physical: self.physical && keep == self.dim(),
        }
    }

    /// Euclidean distance after zero-padding the shorter vector.
    pub fn distance(&self, other: &Self) -> T {
        let n = self.dim().max(other.dim());
        let mut acc = T::zero();
        for j in 1..=n {
            acc += cabs2(self.coefficient(j) - other.coefficient(j));
        }
        acc.sqrt()
    }
}
