//! Labeled simple graphs and the rewiring metric.

mod distance;
mod enumerate;
mod io;

pub use distance::{node_distance, node_distance_with_budget, DEFAULT_COVER_BUDGET};
pub use enumerate::{adjacent_graphs, GraphSpaceIterator, MAX_ENUMERATION_N};
pub use io::{from_edge_list, from_hex, to_edge_list, to_hex};

use crate::error::{invalid_input, Result};
use crate::scalar::Scalar;
use std::collections::BTreeSet;

/// Set of vertices, stored sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct VertexSet {
    members: BTreeSet<usize>,
}

impl VertexSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.members.contains(&v)
    }

    pub fn insert(&mut self, v: usize) {
        self.members.insert(v);
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.members.iter().copied()
    }
}

impl FromIterator<usize> for VertexSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        Self { members: iter.into_iter().collect() }
    }
}

/// Undirected graph without self-loops on vertices `0..n`.
///
/// Adjacency rows are bitsets, so the structure is symmetric and
/// irreflexive by construction.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct LabeledGraph {
    n: usize,
    words: usize,
    rows: Vec<u64>,
}

impl std::fmt::Debug for LabeledGraph {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LabeledGraph")
            .field("n", &self.n)
            .field("edges", &self.edges().collect::<Vec<_>>())
            .finish()
    }
}

impl LabeledGraph {
    pub fn empty(n: usize) -> Self {
        let words = n.div_ceil(64).max(1);
        Self { n, words, rows: vec![0; n * words] }
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Self::empty(n);
        for i in 0..n {
            for j in i + 1..n {
                g.set_edge(i, j, true);
            }
        }
        g
    }

    pub fn from_edges<I: IntoIterator<Item = (usize, usize)>>(n: usize, edges: I) -> Result<Self> {
        let mut g = Self::empty(n);
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(invalid_input(format!("edge ({u},{v}) out of range for n={n}")));
            }
            if u == v {
                return Err(invalid_input(format!("self-loop at vertex {u}")));
            }
            g.set_edge(u, v, true);
        }
        Ok(g)
    }

    /// Graph whose upper-triangle pairs (row-major: (0,1),(0,2),…,(1,2),…)
    /// are read from the low bits of `code`.
    pub fn from_code(n: usize, code: u64) -> Self {
        let mut g = Self::empty(n);
        let mut t = 0;
        for i in 0..n {
            for j in i + 1..n {
                if code >> t & 1 == 1 {
                    g.set_edge(i, j, true);
                }
                t += 1;
            }
        }
        g
    }

    /// Inverse of [`LabeledGraph::from_code`]; `None` when there are more
    /// than 64 vertex pairs.
    pub fn code(&self) -> Option<u64> {
        if pair_count(self.n) > 64 {
            return None;
        }
        let mut code = 0u64;
        let mut t = 0;
        for i in 0..self.n {
            for j in i + 1..self.n {
                if self.has_edge(i, j) {
                    code |= 1 << t;
                }
                t += 1;
            }
        }
        Some(code)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn row(&self, v: usize) -> &[u64] {
        &self.rows[v * self.words..(v + 1) * self.words]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.rows[u * self.words + v / 64] >> (v % 64) & 1 == 1
    }

    pub(crate) fn set_edge(&mut self, u: usize, v: usize, present: bool) {
        debug_assert!(u != v);
        for (a, b) in [(u, v), (v, u)] {
            let w = &mut self.rows[a * self.words + b / 64];
            if present {
                *w |= 1 << (b % 64);
            } else {
                *w &= !(1 << (b % 64));
            }
        }
    }

    pub fn degree(&self, v: usize) -> usize {
        self.row(v).iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.n).map(|v| self.degree(v)).collect()
    }

    pub fn max_degree(&self) -> usize {
        (0..self.n).map(|v| self.degree(v)).max().unwrap_or(0)
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.row(v).iter().enumerate().flat_map(|(wi, &w)| {
            let mut bits = w;
            std::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let b = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(wi * 64 + b)
            })
        })
    }

    pub fn neighborhood(&self, v: usize) -> VertexSet {
        self.neighbors(v).collect()
    }

    pub fn edge_count(&self) -> usize {
        (0..self.n).map(|v| self.degree(v)).sum::<usize>() / 2
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |u| self.neighbors(u).filter(move |&v| v > u).map(move |v| (u, v)))
    }

    /// Symmetric difference graph `self △ other`.
    pub fn symmetric_difference(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(invalid_input(format!("vertex counts differ: {} vs {}", self.n, other.n)));
        }
        let rows = self.rows.iter().zip(&other.rows).map(|(a, b)| a ^ b).collect();
        Ok(Self { n: self.n, words: self.words, rows })
    }

    /// Adjacency matrix as a dense row-major 0/1 matrix with zero diagonal.
    pub fn adjacency_matrix<T: Scalar>(&self) -> Vec<T> {
        let mut m = vec![T::zero(); self.n * self.n];
        for (u, v) in self.edges() {
            m[u * self.n + v] = T::one();
            m[v * self.n + u] = T::one();
        }
        m
    }

    /// Edge density `#edges / C(n,2)`.
    pub fn edge_density(&self) -> Result<f64> {
        if self.n < 2 {
            return Err(invalid_input("edge density needs at least two vertices"));
        }
        Ok(self.edge_count() as f64 / pair_count(self.n) as f64)
    }

    /// Exact edge density in the given scalar type.
    pub fn edge_density_in<T: Scalar>(&self) -> Result<T> {
        if self.n < 2 {
            return Err(invalid_input("edge density needs at least two vertices"));
        }
        Ok(T::ratio(self.edge_count(), pair_count(self.n)))
    }

    /// Replace the neighborhood of `v` by `neighborhood`.
    pub fn rewire(&self, v: usize, neighborhood: &VertexSet) -> Result<Self> {
        if v >= self.n {
            return Err(invalid_input(format!("vertex {v} out of range for n={}", self.n)));
        }
        if neighborhood.contains(v) {
            return Err(invalid_input(format!("neighborhood of {v} contains {v}")));
        }
        if let Some(u) = neighborhood.iter().find(|&u| u >= self.n) {
            return Err(invalid_input(format!("vertex {u} out of range for n={}", self.n)));
        }
        let mut g = self.clone();
        for u in 0..self.n {
            if u != v {
                g.set_edge(v, u, neighborhood.contains(u));
            }
        }
        Ok(g)
    }

    /// Number of edges with at least one endpoint in `s`, i.e. `E(S,Sᶜ) + E(S)`.
    pub fn boundary_edge_count(&self, s: &VertexSet) -> Result<usize> {
        if s.is_empty() {
            return Err(invalid_input("vertex set must be nonempty"));
        }
        if let Some(u) = s.iter().find(|&u| u >= self.n) {
            return Err(invalid_input(format!("vertex {u} out of range for n={}", self.n)));
        }
        Ok(self.edges().filter(|&(u, v)| s.contains(u) || s.contains(v)).count())
    }

    /// Deterministic projection onto graphs of maximum degree `≤ d`.
    ///
    /// Vertices are visited by decreasing initial degree (ties: lower index
    /// first). While the visited vertex has degree above `d`, the incident
    /// edge whose other endpoint currently has the highest degree is
    /// deleted (ties: higher index first).
    pub fn degree_cap(&self, d: usize) -> Self {
        let mut g = self.clone();
        let mut deg = self.degrees();
        if deg.iter().all(|&x| x <= d) {
            return g;
        }
        let mut order: Vec<usize> = (0..self.n).collect();
        order.sort_by(|&a, &b| deg[b].cmp(&deg[a]).then(a.cmp(&b)));
        for v in order {
            while deg[v] > d {
                let u = g
                    .neighbors(v)
                    .max_by(|&a, &b| deg[a].cmp(&deg[b]).then(a.cmp(&b)))
                    .expect("vertex with positive degree has a neighbor");
                g.set_edge(v, u, false);
                deg[v] -= 1;
                deg[u] -= 1;
            }
        }
        g
    }
}

/// `C(n, 2)`.
pub fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Free-function form of [`LabeledGraph::edge_density`].
pub fn edge_density(g: &LabeledGraph) -> Result<f64> {
    g.edge_density()
}
