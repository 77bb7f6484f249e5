use nalgebra::{Complex, DMatrix};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::system::ControlSystem;

/// Order-`N` compression of a system onto `span(φ_1, …, φ_N)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GalerkinSystem<T: Real> {
    eigenvalues: Vec<T>,
    a_matrix: DMatrix<Complex<T>>,
    b_matrices: Vec<DMatrix<Complex<T>>>,
    tridiagonal: bool,
    diagonal_is_zero: bool,
}

/// Builds `A⁽ᴺ⁾ = π_N A π_N` and `B_l⁽ᴺ⁾ = π_N B_l π_N`.
pub fn build_galerkin<T: Real>(system: &ControlSystem<T>, n: usize) -> Result<GalerkinSystem<T>> {
    if n == 0 {
        return Err(Error::InvalidDimension("Galerkin order must be ≥ 1".into()));
    }
    if let Some(max) = system.max_dimension() {
        if n > max {
            return Err(Error::InvalidDimension(format!(
                "order {n} exceeds the {max} states defined by `{}`",
                system.name
            )));
        }
    }
    let eigenvalues = system.spectrum.first(n)?;
    let a_matrix = DMatrix::from_fn(n, n, |j, k| {
        if j == k {
            Complex::new(T::zero(), -eigenvalues[j])
        } else {
            Complex::new(T::zero(), T::zero())
        }
    });
    let mut b_matrices = Vec::with_capacity(system.channels());
    for l in 1..=system.channels() {
        let mut b = DMatrix::zeros(n, n);
        for j in 1..=n {
            let band = system.couplings.bandwidth().unwrap_or(n);
            let lo = j.saturating_sub(band).max(1);
            let hi = (j + band).min(n);
            for k in lo..=hi {
                b[(j - 1, k - 1)] = system.couplings.element(l, j, k)?;
            }
        }
        b_matrices.push(b);
    }
    Ok(GalerkinSystem {
        eigenvalues,
        a_matrix,
        b_matrices,
        tridiagonal: system.is_tridiagonal(),
        diagonal_is_zero: system.couplings.diagonal_is_zero(),
    })
}

impl<T: Real> GalerkinSystem<T> {
    pub fn order(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn channels(&self) -> usize {
        self.b_matrices.len()
    }

    /// `λ_1..λ_N`.
    pub fn eigenvalues(&self) -> &[T] {
        &self.eigenvalues
    }

    pub fn a_matrix(&self) -> &DMatrix<Complex<T>> {
        &self.a_matrix
    }

    pub fn b_matrices(&self) -> &[DMatrix<Complex<T>>] {
        &self.b_matrices
    }

    pub fn b_matrix(&self, channel: usize) -> Result<&DMatrix<Complex<T>>> {
        if channel == 0 || channel > self.channels() {
            return Err(Error::arg("channel", format!("{channel} outside 1..={}", self.channels())));
        }
        Ok(&self.b_matrices[channel - 1])
    }

    pub fn is_tridiagonal(&self) -> bool {
        self.tridiagonal
    }

    pub fn diagonal_is_zero(&self) -> bool {
        self.diagonal_is_zero
    }

    /// `A⁽ᴺ⁾ + Σ_l u_l B_l⁽ᴺ⁾`.
    pub fn generator(&self, u: &[T]) -> Result<DMatrix<Complex<T>>> {
        if u.len() != self.channels() {
            return Err(Error::Shape(format!(
                "control has {} channels, system has {}",
                u.len(),
                self.channels()
            )));
        }
        let mut g = self.a_matrix.clone();
        for (ul, b) in u.iter().zip(&self.b_matrices) {
            if *ul != T::zero() {
                g += b * Complex::new(*ul, T::zero());
            }
        }
        Ok(g)
    }
}
