//! Gauss-Hermite quadrature and normalised Hermite functions.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::scalar::{rabs, Real};

/// Normalised Hermite functions `ψ_0(x), …, ψ_{count-1}(x)`, orthonormal in
/// `L²(ℝ)`, by the three-term recurrence.
pub fn hermite_functions<T: Real>(x: T, count: usize) -> Vec<T> {
    let mut out = Vec::with_capacity(count);
    if count == 0 {
        return out;
    }
    let pi = T::pi();
    let psi0 = (-(x * x) * T::c(0.5)).exp() / pi.sqrt().sqrt();
    out.push(psi0);
    if count == 1 {
        return out;
    }
    out.push(T::c(2.0).sqrt() * x * psi0);
    for n in 1..count - 1 {
        let nf = T::idx(n);
        let next = (T::c(2.0) / (nf + T::one())).sqrt() * x * out[n] - (nf / (nf + T::one())).sqrt() * out[n - 1];
        out.push(next);
    }
    out
}

/// `q`-point Gauss-Hermite rule for the weight `e^{-x²}`.
#[derive(Clone, Debug)]
pub struct GaussHermite<T> {
    pub nodes: Vec<T>,
    /// `w_i e^{x_i²}`, so that `∫ f ≈ Σ scaled_i f(x_i)` for `f = g·e^{-x²}`
    /// with `g` polynomial of degree `< 2q`.
    pub scaled_weights: Vec<T>,
}

impl<T: Real> GaussHermite<T> {
    /// Nodes from the Jacobi matrix eigenvalues, refined by Newton on `ψ_q`
    /// and symmetrised; weights from the Christoffel function.
    pub fn new(q: usize) -> Result<Self> {
        if q == 0 {
            return Err(Error::arg("q", "quadrature order must be ≥ 1"));
        }
        let jacobi = DMatrix::from_fn(q, q, |i, j| {
            if i.abs_diff(j) == 1 {
                (T::idx(i.max(j)) * T::c(0.5)).sqrt()
            } else {
                T::zero()
            }
        });
        let mut nodes: Vec<T> = jacobi.symmetric_eigenvalues().iter().copied().collect();
        nodes.sort_by(|a, b| a.partial_cmp(b).expect("finite nodes"));
        let two_q = (T::c(2.0) * T::idx(q)).sqrt();
        for x in nodes.iter_mut() {
            for _ in 0..8 {
                let h = hermite_functions(*x, q + 1);
                if h[q - 1] == T::zero() {
                    break;
                }
                let dx = h[q] / (two_q * h[q - 1]);
                *x -= dx;
                if rabs(dx) <= T::EPSILON * T::one().max(rabs(*x)) {
                    break;
                }
            }
        }
        for i in 0..q / 2 {
            let a = (nodes[q - 1 - i] - nodes[i]) * T::c(0.5);
            nodes[i] = -a;
            nodes[q - 1 - i] = a;
        }
        if q % 2 == 1 {
            nodes[q / 2] = T::zero();
        }
        let scaled_weights = nodes
            .iter()
            .map(|x| {
                let s = hermite_functions(*x, q).iter().fold(T::zero(), |a, h| a + *h * *h);
                T::one() / s
            })
            .collect::<Vec<_>>();
        if scaled_weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::Numerical(format!("Gauss-Hermite weights overflow at q = {q}")));
        }
        Ok(Self { nodes, scaled_weights })
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// `M_{mn} = ∫ ψ_m(x) g(x) ψ_n(x) dx` for `m, n < levels`.
    pub fn hermite_matrix(&self, levels: usize, g: impl Fn(T) -> T) -> DMatrix<T> {
        let mut m = DMatrix::zeros(levels, levels);
        for (x, w) in self.nodes.iter().zip(&self.scaled_weights) {
            let h = hermite_functions(*x, levels);
            let gw = g(*x) * *w;
            for a in 0..levels {
                let ha = h[a] * gw;
                for b in a..levels {
                    m[(a, b)] += ha * h[b];
                }
            }
        }
        for a in 0..levels {
            for b in 0..a {
                m[(a, b)] = m[(b, a)];
            }
        }
        m
    }
}
