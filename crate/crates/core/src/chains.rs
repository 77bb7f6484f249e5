//! Connectedness and non-degeneracy of the coupling graph on a truncation.
//!
//! Everything here certifies a finite truncation only; reports carry
//! `finite_truncation = true`.

use std::collections::{BTreeSet, VecDeque};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::galerkin::GalerkinSystem;
use crate::scalar::{cabs, rabs, Real};

/// Entries with `|b_{j,k}|` at or below this are treated as exact zeros.
pub const DEFAULT_TOL: f64 = 1e-12;
/// Gap collisions are flagged within `DEFAULT_GAP_REL · λ_N`.
pub const DEFAULT_GAP_REL: f64 = 1e-9;

/// Undirected coupling graph on `{1, …, N}`; edges stored with `j < k`.
pub type EdgeSet = BTreeSet<(usize, usize)>;

/// Off-diagonal pairs with `|b_{j,k}| > tol` in the given channel.
pub fn coupling_graph<T: Real>(galerkin: &GalerkinSystem<T>, channel: usize, tol: T) -> Result<EdgeSet> {
    if !(tol > T::zero()) {
        return Err(Error::arg("tol", format!("must be positive, got {tol}")));
    }
    let b = galerkin.b_matrix(channel)?;
    let n = galerkin.order();
    let mut edges = EdgeSet::new();
    for j in 0..n {
        for k in 0..n {
            if j != k && cabs(b[(j, k)]) > tol {
                edges.insert((j.min(k) + 1, j.max(k) + 1));
            }
        }
    }
    Ok(edges)
}

/// Breadth-first connectivity of the graph on `{1, …, n}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Connectivity {
    pub connected: bool,
    /// Connected components, each sorted.
    pub components: Vec<Vec<usize>>,
    /// Path from level 1 to level `n` when they are connected.
    pub witness: Option<Vec<usize>>,
}

pub fn is_chain_connected(edges: &EdgeSet, n: usize) -> Result<Connectivity> {
    if n == 0 {
        return Err(Error::InvalidDimension("chain analysis needs N ≥ 1".into()));
    }
    let mut adj = vec![Vec::new(); n + 1];
    for &(j, k) in edges {
        if k > n {
            continue;
        }
        adj[j].push(k);
        adj[k].push(j);
    }
    let mut seen = vec![false; n + 1];
    let mut parent = vec![0usize; n + 1];
    let mut components = Vec::new();
    for root in 1..=n {
        if seen[root] {
            continue;
        }
        let mut comp = Vec::new();
        let mut queue = VecDeque::from([root]);
        seen[root] = true;
        while let Some(v) = queue.pop_front() {
            comp.push(v);
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    parent[w] = v;
                    queue.push_back(w);
                }
            }
        }
        comp.sort_unstable();
        components.push(comp);
    }
    let connected = components.len() == 1;
    let witness = connected.then(|| {
        let mut path = vec![n];
        let mut v = n;
        while v != 1 {
            v = parent[v];
            path.push(v);
        }
        path.reverse();
        path
    });
    Ok(Connectivity {
        connected,
        components,
        witness,
    })
}

/// Two coupled pairs whose spectral gaps coincide within tolerance.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapCollision {
    pub first: (usize, usize),
    pub second: (usize, usize),
    pub gap_difference: f64,
}

/// Truncation certificate for a connectedness chain.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChainReport {
    pub truncation: usize,
    pub coupled_pairs: Vec<(usize, usize)>,
    pub connected: bool,
    pub witness: Option<Vec<usize>>,
    pub degenerate_collisions: Vec<GapCollision>,
    pub non_degenerate: bool,
    pub finite_truncation: bool,
}

/// Compares `|λ_j − λ_k|` over every pair of distinct coupled edges and lists
/// coincidences within `gap_tol`, in lexicographic order.
pub fn nondegeneracy_check<T: Real>(eigenvalues: &[T], edges: &EdgeSet, n: usize, gap_tol: T) -> Result<ChainReport> {
    if !(gap_tol > T::zero()) {
        return Err(Error::arg("gap_tol", format!("must be positive, got {gap_tol}")));
    }
    if eigenvalues.len() < n {
        return Err(Error::InvalidDimension(format!(
            "{} eigenvalues for truncation {n}",
            eigenvalues.len()
        )));
    }
    let pairs: Vec<(usize, usize)> = edges.iter().copied().filter(|&(_, k)| k <= n).collect();
    let gap = |(j, k): (usize, usize)| rabs(eigenvalues[j - 1] - eigenvalues[k - 1]);
    let mut collisions = Vec::new();
    for (a, &p) in pairs.iter().enumerate() {
        for &q in &pairs[a + 1..] {
            let d = rabs(gap(p) - gap(q));
            if d <= gap_tol {
                collisions.push(GapCollision {
                    first: p,
                    second: q,
                    gap_difference: d.to_f64(),
                });
            }
        }
    }
    let conn = is_chain_connected(edges, n)?;
    Ok(ChainReport {
        truncation: n,
        coupled_pairs: pairs,
        connected: conn.connected,
        witness: conn.witness,
        non_degenerate: collisions.is_empty(),
        degenerate_collisions: collisions,
        finite_truncation: true,
    })
}

/// Full report with the default relative gap tolerance.
pub fn chain_report<T: Real>(galerkin: &GalerkinSystem<T>, channel: usize, tol: T) -> Result<ChainReport> {
    let edges = coupling_graph(galerkin, channel, tol)?;
    let n = galerkin.order();
    let lam = galerkin.eigenvalues();
    let gap_tol = T::c(DEFAULT_GAP_REL) * lam[n - 1];
    nondegeneracy_check(lam, &edges, n, gap_tol)
}
