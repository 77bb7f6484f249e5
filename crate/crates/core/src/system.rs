//! Spectral description of bilinear control systems `dψ/dt = (A + Σ u_l B_l) ψ`.
//!
//! `A` is diagonal in the basis `(φ_n)_{n ≥ 1}` with `Aφ_n = -iλ_n φ_n`, and each
//! control operator is given by its matrix elements `b_{j,k} = ⟨φ_j, B_l φ_k⟩`.
//! All indices in this module are 1-based.

use std::collections::BTreeMap;

use nalgebra::{Complex, DMatrix};

use crate::error::{Error, Result};
use crate::scalar::{cabs, Real};

/// Skew-adjointness tolerance used when validating coupling tables.
pub const SKEW_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub enum SpectrumKind<T> {
    /// `λ_n = n²`.
    Rotor,
    /// `λ_n = n - 1/2`.
    Oscillator,
    /// `λ_{2m-1} = λ_{2m} = ω(m - 1/2) + Ω`.
    TrappedIon { omega: T, detuning: T },
    /// Explicit finite list.
    Table(Vec<T>),
}

/// Eigenvalue sequence `(λ_n)` of `-iA`: positive, non-decreasing, unbounded.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum<T> {
    kind: SpectrumKind<T>,
    shift: T,
}

impl<T: Real> Spectrum<T> {
    pub fn rotor() -> Self {
        Self {
            kind: SpectrumKind::Rotor,
            shift: T::zero(),
        }
    }

    pub fn oscillator() -> Self {
        Self {
            kind: SpectrumKind::Oscillator,
            shift: T::zero(),
        }
    }

    pub fn trapped_ion(omega: T, detuning: T) -> Result<Self> {
        if !(omega > T::zero()) || !(detuning > T::zero()) {
            return Err(Error::ModelSpec(format!(
                "trapped ion needs ω > 0 and Ω > 0, got ω = {omega}, Ω = {detuning}"
            )));
        }
        Ok(Self {
            kind: SpectrumKind::TrappedIon { omega, detuning },
            shift: T::zero(),
        })
    }

    /// Tabulated spectrum. If `λ_1 ≤ 0` every value is shifted by `1 - λ_1`
    /// (a global phase) and the shift is recorded.
    pub fn table(values: Vec<T>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::ModelSpec("empty spectrum table".into()));
        }
        for (i, v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::ModelSpec(format!("λ_{} is not finite", i + 1)));
            }
        }
        for (i, w) in values.windows(2).enumerate() {
            if w[1] < w[0] {
                return Err(Error::ModelSpec(format!(
                    "spectrum must be non-decreasing: λ_{} = {} > λ_{} = {}",
                    i + 1,
                    w[0],
                    i + 2,
                    w[1]
                )));
            }
        }
        let shift = if values[0] <= T::zero() {
            T::one() - values[0]
        } else {
            T::zero()
        };
        Ok(Self {
            kind: SpectrumKind::Table(values),
            shift,
        })
    }

    pub fn kind(&self) -> &SpectrumKind<T> {
        &self.kind
    }

    /// Positivity shift applied at construction (zero for built-ins).
    pub fn shift(&self) -> T {
        self.shift
    }

    /// Number of available eigenvalues, `None` for closed forms.
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> Option<usize> {
        match &self.kind {
            SpectrumKind::Table(v) => Some(v.len()),
            _ => None,
        }
    }

    pub fn is_closed_form(&self) -> bool {
        !matches!(self.kind, SpectrumKind::Table(_))
    }

    pub fn closed_form_tag(&self) -> Option<&'static str> {
        match self.kind {
            SpectrumKind::Rotor => Some("rotor: n^2"),
            SpectrumKind::Oscillator => Some("oscillator: n - 1/2"),
            SpectrumKind::TrappedIon { .. } => Some("trapped-ion: omega*(m - 1/2) + Omega, m = ceil(n/2)"),
            SpectrumKind::Table(_) => None,
        }
    }

    /// `λ_n` for `n ≥ 1`.
    pub fn eigenvalue(&self, n: usize) -> Result<T> {
        if n == 0 {
            return Err(Error::InvalidDimension("eigenvalue index starts at 1".into()));
        }
        let raw = match &self.kind {
            SpectrumKind::Rotor => {
                let x = T::idx(n);
                x * x
            }
            SpectrumKind::Oscillator => T::idx(n) - T::c(0.5),
            SpectrumKind::TrappedIon { omega, detuning } => {
                let m = n.div_ceil(2);
                *omega * (T::idx(m) - T::c(0.5)) + *detuning
            }
            SpectrumKind::Table(v) => *v.get(n - 1).ok_or_else(|| {
                Error::InvalidDimension(format!(
                    "λ_{n} requested but the table holds {} values",
                    v.len()
                ))
            })?,
        };
        Ok(raw + self.shift)
    }

    /// `(λ_1, …, λ_n)`.
    pub fn first(&self, n: usize) -> Result<Vec<T>> {
        (1..=n).map(|j| self.eigenvalue(j)).collect()
    }
}

/// Where the matrix elements come from.
#[derive(Clone, Debug, PartialEq)]
pub enum CouplingKind<T> {
    /// `b_{j,j±1} = -i/2`.
    Rotor,
    /// `b_{k-1,k} = -i√(k-1)`, `b_{k+1,k} = -i√k`.
    Oscillator,
    /// One dense matrix per channel (quadrature-built models).
    Dense(Vec<DMatrix<Complex<T>>>),
    /// Sparse table, one map per channel, keyed by 1-based `(j, k)`.
    Sparse {
        dim: usize,
        entries: Vec<BTreeMap<(usize, usize), Complex<T>>>,
    },
}

/// Matrix elements `b_{j,k} = ⟨φ_j, B_l φ_k⟩` for every channel `l`.
#[derive(Clone, Debug, PartialEq)]
pub struct Couplings<T> {
    kind: CouplingKind<T>,
    bandwidth: Option<usize>,
    diagonal_is_zero: bool,
}

impl<T: Real> Couplings<T> {
    pub fn rotor() -> Self {
        Self {
            kind: CouplingKind::Rotor,
            bandwidth: Some(1),
            diagonal_is_zero: true,
        }
    }

    pub fn oscillator() -> Self {
        Self {
            kind: CouplingKind::Oscillator,
            bandwidth: Some(1),
            diagonal_is_zero: true,
        }
    }

    /// Dense per-channel matrices; checked for skew-Hermiticity.
    pub fn dense(channels: Vec<DMatrix<Complex<T>>>) -> Result<Self> {
        let Some(first) = channels.first() else {
            return Err(Error::ModelSpec("at least one control channel is required".into()));
        };
        let dim = first.nrows();
        for (l, m) in channels.iter().enumerate() {
            if m.nrows() != dim || m.ncols() != dim {
                return Err(Error::ModelSpec(format!(
                    "channel {} matrix is {}x{}, expected {dim}x{dim}",
                    l + 1,
                    m.nrows(),
                    m.ncols()
                )));
            }
        }
        let mut bandwidth = 0;
        let mut diagonal_is_zero = true;
        for m in &channels {
            for j in 0..dim {
                for k in 0..dim {
                    if m[(j, k)] != Complex::new(T::zero(), T::zero()) {
                        bandwidth = bandwidth.max(j.abs_diff(k));
                        if j == k {
                            diagonal_is_zero = false;
                        }
                    }
                }
            }
        }
        let out = Self {
            kind: CouplingKind::Dense(channels),
            bandwidth: Some(bandwidth),
            diagonal_is_zero,
        };
        out.check_skew_adjoint(dim)?;
        Ok(out)
    }

    /// Sparse table over `dim` basis states. Missing mirror entries are filled
    /// in by skew-adjointness; present mirrors must agree.
    pub fn sparse(dim: usize, channels: usize, entries: &[(usize, usize, usize, Complex<T>)]) -> Result<Self> {
        if channels == 0 {
            return Err(Error::ModelSpec("at least one control channel is required".into()));
        }
        let mut maps = vec![BTreeMap::new(); channels];
        for &(l, j, k, b) in entries {
            if l == 0 || l > channels || j == 0 || k == 0 || j > dim || k > dim {
                return Err(Error::Model {
                    channel: l,
                    j,
                    k,
                    message: format!("index out of range (channels {channels}, dimension {dim})"),
                });
            }
            if !b.re.is_finite() || !b.im.is_finite() {
                return Err(Error::Model {
                    channel: l,
                    j,
                    k,
                    message: "non-finite coupling".into(),
                });
            }
            if maps[l - 1].insert((j, k), b).is_some() {
                return Err(Error::Model {
                    channel: l,
                    j,
                    k,
                    message: "duplicate entry".into(),
                });
            }
        }
        let tol = T::c(SKEW_TOL);
        for (l, map) in maps.iter_mut().enumerate() {
            let keys: Vec<_> = map.keys().copied().collect();
            for (j, k) in keys {
                let b = map[&(j, k)];
                let mirror = -b.conj();
                match map.get(&(k, j)) {
                    Some(&m) => {
                        if cabs(m - mirror) > tol * (T::one() + cabs(b)) {
                            return Err(Error::Model {
                                channel: l + 1,
                                j,
                                k,
                                message: format!("not skew-adjoint: b_jk = {b}, b_kj = {m}"),
                            });
                        }
                    }
                    None => {
                        map.insert((k, j), mirror);
                    }
                }
            }
            map.retain(|_, b| *b != Complex::new(T::zero(), T::zero()));
        }
        let bandwidth = maps
            .iter()
            .flat_map(|m| m.keys())
            .map(|(j, k)| j.abs_diff(*k))
            .max()
            .unwrap_or(0);
        let diagonal_is_zero = maps.iter().all(|m| m.keys().all(|(j, k)| j != k));
        Ok(Self {
            kind: CouplingKind::Sparse { dim, entries: maps },
            bandwidth: Some(bandwidth),
            diagonal_is_zero,
        })
    }

    pub fn kind(&self) -> &CouplingKind<T> {
        &self.kind
    }

    pub fn channels(&self) -> usize {
        match &self.kind {
            CouplingKind::Rotor | CouplingKind::Oscillator => 1,
            CouplingKind::Dense(m) => m.len(),
            CouplingKind::Sparse { entries, .. } => entries.len(),
        }
    }

    /// Largest `|j - k|` with a non-zero entry (`Some(1)` for tri-diagonal).
    pub fn bandwidth(&self) -> Option<usize> {
        self.bandwidth
    }

    pub fn diagonal_is_zero(&self) -> bool {
        self.diagonal_is_zero
    }

    /// Largest basis index with defined elements, `None` when unbounded.
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> Option<usize> {
        match &self.kind {
            CouplingKind::Rotor | CouplingKind::Oscillator => None,
            CouplingKind::Dense(m) => Some(m[0].nrows()),
            CouplingKind::Sparse { dim, .. } => Some(*dim),
        }
    }

    /// `b_{j,k}` of channel `l` (all 1-based).
    pub fn element(&self, l: usize, j: usize, k: usize) -> Result<Complex<T>> {
        let zero = Complex::new(T::zero(), T::zero());
        if l == 0 || l > self.channels() || j == 0 || k == 0 {
            return Err(Error::Model {
                channel: l,
                j,
                k,
                message: format!("indices are 1-based; {} channel(s)", self.channels()),
            });
        }
        if let Some(n) = self.len() {
            if j > n || k > n {
                return Err(Error::Model {
                    channel: l,
                    j,
                    k,
                    message: format!("coupling defined only up to index {n}"),
                });
            }
        }
        Ok(match &self.kind {
            CouplingKind::Rotor => {
                if j.abs_diff(k) == 1 {
                    Complex::new(T::zero(), T::c(-0.5))
                } else {
                    zero
                }
            }
            CouplingKind::Oscillator => {
                if j + 1 == k {
                    Complex::new(T::zero(), -T::idx(j).sqrt())
                } else if j == k + 1 {
                    Complex::new(T::zero(), -T::idx(k).sqrt())
                } else {
                    zero
                }
            }
            CouplingKind::Dense(m) => m[l - 1][(j - 1, k - 1)],
            CouplingKind::Sparse { entries, .. } => entries[l - 1].get(&(j, k)).copied().unwrap_or(zero),
        })
    }

    /// Checks `b_{j,k} = -conj(b_{k,j})` for all `j, k ≤ n`.
    pub fn check_skew_adjoint(&self, n: usize) -> Result<()> {
        let tol = T::c(SKEW_TOL);
        for l in 1..=self.channels() {
            for j in 1..=n {
                for k in j..=n {
                    let a = self.element(l, j, k)?;
                    let b = self.element(l, k, j)?;
                    if cabs(a + b.conj()) > tol * (T::one() + cabs(a)) {
                        return Err(Error::Model {
                            channel: l,
                            j,
                            k,
                            message: format!("not skew-adjoint: b_jk = {a}, b_kj = {b}"),
                        });
                    }
                }
            }
        }
        Ok(())
    }
}

/// Which constructor produced a system.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelTag {
    Rotor,
    Oscillator,
    TrappedIon,
    Tabulated,
}

impl ModelTag {
    pub fn name(self) -> &'static str {
        match self {
            ModelTag::Rotor => "rotor",
            ModelTag::Oscillator => "oscillator",
            ModelTag::TrappedIon => "trapped-ion",
            ModelTag::Tabulated => "tabulated",
        }
    }
}

/// A full system `(A, B_1, …, B_p)` in the eigenbasis of `A`.
#[derive(Clone, Debug, PartialEq)]
pub struct ControlSystem<T> {
    pub name: String,
    pub tag: ModelTag,
    pub spectrum: Spectrum<T>,
    pub couplings: Couplings<T>,
    /// Physical parameters, plus `shift` when a positivity shift was applied.
    pub params: BTreeMap<String, f64>,
}

impl<T: Real> ControlSystem<T> {
    pub fn new(
        name: impl Into<String>,
        tag: ModelTag,
        spectrum: Spectrum<T>,
        couplings: Couplings<T>,
        mut params: BTreeMap<String, f64>,
    ) -> Result<Self> {
        if let (Some(a), Some(b)) = (spectrum.len(), couplings.len()) {
            if a != b {
                return Err(Error::ModelSpec(format!(
                    "spectrum has {a} values but couplings are defined on {b} states"
                )));
            }
        }
        if spectrum.shift() != T::zero() {
            params.insert("shift".into(), spectrum.shift().to_f64());
        }
        Ok(Self {
            name: name.into(),
            tag,
            spectrum,
            couplings,
            params,
        })
    }

    /// Largest usable truncation order, `None` when unbounded.
    pub fn max_dimension(&self) -> Option<usize> {
        match (self.spectrum.len(), self.couplings.len()) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }

    pub fn is_tridiagonal(&self) -> bool {
        self.couplings.bandwidth().is_some_and(|b| b <= 1)
    }

    pub fn channels(&self) -> usize {
        self.couplings.channels()
    }

    /// Validates positivity and monotonicity of `λ_1..λ_n` and
    /// skew-adjointness of the couplings on the same range.
    pub fn validate(&self, n: usize) -> Result<()> {
        let lam = self.spectrum.first(n)?;
        if let Some(first) = lam.first() {
            if !(*first > T::zero()) {
                return Err(Error::ModelSpec(format!("λ_1 = {first} is not positive")));
            }
        }
        if let Some(i) = lam.windows(2).position(|w| w[1] < w[0]) {
            return Err(Error::ModelSpec(format!("spectrum decreases at n = {}", i + 1)));
        }
        self.couplings.check_skew_adjoint(n)
    }
}
