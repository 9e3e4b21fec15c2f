//! Exact law of the rewired `G(n, m+k)` model.

use crate::error::{invalid_input, invalid_param, Result};
use crate::graph::{pair_count, LabeledGraph};
use crate::scalar::{binomial, Scalar};

fn check_range(n: usize, m: usize, k: usize) -> Result<()> {
    if n == 0 || m + k > pair_count(n) {
        return Err(invalid_param(format!("m+k={} out of range for n={n}", m + k)));
    }
    Ok(())
}

/// `P[G(n,m) = G0] = 1/C(N,m)` for `G0` with `m` edges, zero otherwise.
pub fn gnm_pmf<T: Scalar>(g0: &LabeledGraph, m: usize) -> T {
    if g0.edge_count() != m {
        return T::zero();
    }
    T::one() / binomial(pair_count(g0.n()), m)
}

/// Vertex average `(1/n) Σ_v C(n−d(v)−1, k) / C(d(v)+k, k)` over the degrees
/// of an `m`-edge graph.
pub fn rewired_vertex_average<T: Scalar>(g0: &LabeledGraph, k: usize) -> T {
    let n = g0.n();
    let sum = g0.degrees().into_iter().fold(T::zero(), |acc, d| {
        acc + binomial::<T>(n - d - 1, k) / binomial::<T>(d + k, k)
    });
    sum / T::of_usize(n)
}

/// Exact likelihood ratio `P[rewired = G0] / P[G(n,m) = G0]` for an `m`-edge
/// graph: the vertex average times `C(N,m) / C(N,m+k)`.
pub fn rewired_likelihood_ratio<T: Scalar>(g0: &LabeledGraph, m: usize, k: usize) -> Result<T> {
    let slots = pair_count(g0.n());
    Ok(rewired_model_pmf::<T>(g0, m, k)? * binomial::<T>(slots, m))
}

/// Probability that the rewired model outputs the `m`-edge graph `g0`:
/// `(1/(n·C(N,m+k))) Σ_v C(n−d(v)−1, k) / C(d(v)+k, k)`.
///
/// Outputs with `m` edges are exactly those where the chosen vertex had
/// degree at least `k` in the first stage; the model also puts mass on
/// graphs with more than `m` edges (see [`rewired_model_pmf_full`]), so this
/// function alone does not sum to one over the `m`-edge slice.
pub fn rewired_model_pmf<T: Scalar>(g0: &LabeledGraph, m: usize, k: usize) -> Result<T> {
    check_range(g0.n(), m, k)?;
    if g0.edge_count() != m {
        return Err(invalid_input(format!("graph has {} edges, expected {m}", g0.edge_count())));
    }
    Ok(rewired_vertex_average::<T>(g0, k) / binomial::<T>(pair_count(g0.n()), m + k))
}

/// Probability of any outcome of the rewired model.
///
/// If the chosen vertex had degree `d' < k` in the first stage it is left
/// isolated and the output has `m + k − d'` edges; such a graph arises from
/// every isolated vertex `v` and every one of the `C(n−1, d')` neighborhoods
/// it could have had.
pub fn rewired_model_pmf_full<T: Scalar>(g0: &LabeledGraph, m: usize, k: usize) -> Result<T> {
    check_range(g0.n(), m, k)?;
    let e = g0.edge_count();
    if e == m {
        return rewired_model_pmf(g0, m, k);
    }
    if e < m || e > m + k {
        return Ok(T::zero());
    }
    let n = g0.n();
    let isolated = g0.degrees().into_iter().filter(|&d| d == 0).count();
    let ways = T::of_usize(isolated) * binomial::<T>(n - 1, m + k - e);
    Ok(ways / (T::of_usize(n) * binomial::<T>(pair_count(n), m + k)))
}
