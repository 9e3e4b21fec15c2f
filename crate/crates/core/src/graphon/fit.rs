//! Permutation- and equipartition-minimized L2 distances, and the agnostic
//! and sampling errors of step graphons.

use itertools::Itertools;

use crate::error::{invalid_input, invalid_param, resource_limit, Result};
use crate::rng::stream;
use crate::scalar::Scalar;

use super::equipartition::{equipartition_count, for_each_equipartition, local_search_max};
use super::sample::WRandomSample;
use super::{normalized_sq_l2, BlockMatrix, Equipartition, SquareMatrix, StepGraphon};

pub const MAX_PERMUTATION_K: usize = 8;
pub const MAX_AGNOSTIC_BLOCKS: usize = 6;
pub const DEFAULT_EQUIPARTITION_BUDGET: f64 = 1e7;

/// `min_σ ‖B1^σ − B2‖₂²` over simultaneous row/column permutations.
pub fn delta2_hat_blocks_sq<T: Scalar>(b1: &BlockMatrix<T>, b2: &BlockMatrix<T>) -> Result<T> {
    let k = b1.k();
    if k != b2.k() {
        return Err(invalid_input(format!("block counts differ: {} vs {}", k, b2.k())));
    }
    if k > MAX_PERMUTATION_K {
        return Err(resource_limit(format!("k={k} exceeds the permutation limit {MAX_PERMUTATION_K}")));
    }
    let mut best: Option<T> = None;
    for sigma in (0..k).permutations(k) {
        let d = normalized_sq_l2(b1.permuted(&sigma).matrix(), b2.matrix())?;
        if best.as_ref().is_none_or(|b| &d < b) {
            best = Some(d);
        }
    }
    Ok(best.unwrap_or_else(T::zero))
}

pub fn delta2_hat_blocks(b1: &BlockMatrix<f64>, b2: &BlockMatrix<f64>) -> Result<f64> {
    delta2_hat_blocks_sq(b1, b2).map(f64::sqrt)
}

#[derive(Debug, Clone, Copy)]
pub struct FitOptions {
    /// Largest equipartition count searched exhaustively.
    pub budget: f64,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { budget: DEFAULT_EQUIPARTITION_BUDGET, restarts: 20, seed: 0 }
    }
}

#[derive(Debug, Clone)]
pub struct FitResult {
    pub value: f64,
    pub partition: Equipartition,
    /// `false` when local search was used; `value` is then an upper bound.
    pub exact: bool,
}

/// `‖B_π − Q‖₂²` from per-block sums of `Q`.
fn fit_sq(b: &BlockMatrix<f64>, q_sq: f64, q: &SquareMatrix<f64>, assignment: &[usize]) -> f64 {
    let k = b.k();
    let n = assignment.len();
    let mut sums = vec![0.0; k * k];
    let mut sizes = vec![0usize; k];
    for i in 0..n {
        sizes[assignment[i]] += 1;
        for j in 0..n {
            sums[assignment[i] * k + assignment[j]] += q.get(i, j);
        }
    }
    let mut acc = q_sq;
    for a in 0..k {
        for c in 0..k {
            let v = b.get(a, c);
            acc += -2.0 * v * sums[a * k + c] + v * v * (sizes[a] * sizes[c]) as f64;
        }
    }
    (acc / (n * n) as f64).max(0.0)
}

/// `min_π ‖B_π − Q‖₂` over `k`-equipartitions, exhaustive within the budget.
pub fn delta2_hat_fit(b: &BlockMatrix<f64>, q: &SquareMatrix<f64>, opts: &FitOptions) -> Result<FitResult> {
    let n = q.dim();
    let k = b.k();
    let q_sq: f64 = q.entries().iter().map(|v| v * v).sum();
    if equipartition_count(n, k) <= opts.budget {
        let mut best: Option<(Vec<usize>, f64)> = None;
        for_each_equipartition(n, k, |a| {
            let v = fit_sq(b, q_sq, q, a);
            if best.as_ref().is_none_or(|(_, bv)| v < *bv) {
                best = Some((a.to_vec(), v));
            }
        })?;
        let (a, v) = best.expect("at least one equipartition");
        return Ok(FitResult { value: v.sqrt(), partition: Equipartition::new(k, a)?, exact: true });
    }
    let mut rng = stream(opts.seed);
    let (p, v) = local_search_max(n, k, opts.restarts, &mut rng, |a| -fit_sq(b, q_sq, q, a))?;
    Ok(FitResult { value: (-v).max(0.0).sqrt(), partition: p, exact: false })
}

/// `∫∫ (W1 − W2)²` over the common refinement of the two partitions.
pub fn step_sq_distance<T: Scalar>(w1: &StepGraphon<T>, w2: &StepGraphon<T>) -> T {
    let mut cuts: Vec<T> = w1.boundaries().iter().chain(w2.boundaries()).cloned().collect();
    cuts.sort_by(|a, b| a.partial_cmp(b).expect("boundaries are ordered"));
    cuts.dedup();
    let two = T::of_usize(2);
    let cells: Vec<(T, usize, usize)> = cuts
        .windows(2)
        .map(|w| {
            let mid = (w[0].clone() + w[1].clone()) / two.clone();
            (w[1].clone() - w[0].clone(), w1.block_of(&mid), w2.block_of(&mid))
        })
        .collect();
    let mut acc = T::zero();
    for (lx, ax, bx) in &cells {
        for (ly, ay, by) in &cells {
            let d = w1.values().get(*ax, *ay).clone() - w2.values().get(*bx, *by).clone();
            acc = acc + d.clone() * d * lx.clone() * ly.clone();
        }
    }
    acc
}

/// Distance from `W` to the nearest equal-size `k`-block graphon, minimized
/// over orderings of `W`'s blocks; block values are conditional means.
pub fn agnostic_error(w: &StepGraphon<f64>, k: usize) -> Result<f64> {
    if k == 0 {
        return Err(invalid_param("k must be positive"));
    }
    if w.k() > MAX_AGNOSTIC_BLOCKS {
        return Err(resource_limit(format!("graphon has {} blocks, limit is {MAX_AGNOSTIC_BLOCKS}", w.k())));
    }
    let norm = w.sq_norm();
    let mut best = f64::INFINITY;
    for sigma in (0..w.k()).permutations(w.k()) {
        let ws = w.reordered(&sigma);
        // overlap[a][c] = |[a/k, (a+1)/k) ∩ J_c|
        let overlap: Vec<Vec<f64>> = (0..k)
            .map(|a| {
                let (lo, hi) = (a as f64 / k as f64, (a + 1) as f64 / k as f64);
                (0..ws.k()).map(|c| (hi.min(ws.boundaries()[c + 1]) - lo.max(ws.boundaries()[c])).max(0.0)).collect()
            })
            .collect();
        let mut proj = 0.0;
        for a in 0..k {
            for b in 0..k {
                let mut mass = 0.0;
                for c in 0..ws.k() {
                    for d in 0..ws.k() {
                        mass += ws.values().get(c, d) * overlap[a][c] * overlap[b][d];
                    }
                }
                let mean = mass * (k * k) as f64;
                proj += mean * mean / (k * k) as f64;
            }
        }
        best = best.min(norm - proj);
    }
    Ok(best.max(0.0).sqrt())
}

/// L2 distance between `H_n/ρ`, laid out in sorted-label order as an
/// `n`-block graphon, and `W`. Labels make the alignment explicit, so this
/// upper-bounds the permutation-minimized distance. The diagonal cells use
/// `W(x_i, x_i)`.
pub fn sampling_error(sample: &WRandomSample, w: &StepGraphon<f64>) -> Result<f64> {
    if sample.rho <= 0.0 {
        return Err(invalid_param("sampling error is undefined for rho = 0"));
    }
    let n = sample.labels.len();
    if n == 0 {
        return Err(invalid_input("empty sample"));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| sample.labels[a].total_cmp(&sample.labels[b]));
    let values = SquareMatrix::from_fn(n, |i, j| {
        let (a, b) = (order[i], order[j]);
        if a == b {
            w.value(&sample.labels[a], &sample.labels[a])
        } else {
            sample.edge_probabilities.get(a, b) / sample.rho
        }
    });
    let h = StepGraphon::equal_blocks(BlockMatrix::from_matrix(values)?);
    Ok(step_sq_distance(&h, w).max(0.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::LabeledGraph;
    use crate::graphon::{sample_w_random, two_clique_graphon};
    use crate::graphon::equipartition::all_equipartitions;

    fn bm(k: usize, v: &[f64]) -> BlockMatrix<f64> {
        BlockMatrix::new(k, v.to_vec()).unwrap()
    }

    #[test]
    fn blocks_examples() {
        let a = bm(2, &[0.7, 0.1, 0.1, 0.3]);
        assert_eq!(delta2_hat_blocks(&a, &a).unwrap(), 0.0);
        assert_eq!(delta2_hat_blocks(&a, &bm(2, &[0.3, 0.1, 0.1, 0.7])).unwrap(), 0.0);
        let id = bm(2, &[1.0, 0.0, 0.0, 1.0]);
        assert!((delta2_hat_blocks(&id, &bm(2, &[0.0; 4])).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
        assert!(delta2_hat_blocks(&id, &bm(1, &[0.0])).is_err());
        assert!(delta2_hat_blocks(&bm(9, &[0.0; 81]), &bm(9, &[0.0; 81])).is_err());
    }

    #[test]
    fn fit_zero_when_expanded() {
        let b = bm(2, &[0.9, 0.2, 0.2, 0.4]);
        let pi = Equipartition::new(2, vec![1, 0, 0, 1, 1, 0]).unwrap();
        let q = b.expand(pi.assignment());
        let r = delta2_hat_fit(&b, &q, &FitOptions::default()).unwrap();
        assert!(r.exact);
        assert!(r.value < 1e-7);
    }

    #[test]
    fn fit_k1_is_plain_distance() {
        let g = LabeledGraph::from_edges(5, [(0, 1), (1, 2), (2, 4)]).unwrap();
        let q = SquareMatrix::from_vec(5, g.adjacency_matrix()).unwrap();
        let b = bm(1, &[0.3]);
        let direct = normalized_sq_l2(&SquareMatrix::from_vec(5, vec![0.3f64; 25]).unwrap(), &q).unwrap().sqrt();
        assert!((delta2_hat_fit(&b, &q, &FitOptions::default()).unwrap().value - direct).abs() < 1e-12);
    }

    #[test]
    fn fit_matches_brute_force() {
        // two disjoint edges plus identity on the diagonal
        let g = LabeledGraph::from_edges(4, [(0, 2), (1, 3)]).unwrap();
        let q = SquareMatrix::from_fn(4, |i, j| if i == j || g.has_edge(i, j) { 1.0 } else { 0.0 });
        let b = bm(2, &[1.0, 0.0, 0.0, 1.0]);
        let brute = all_equipartitions(4, 2)
            .unwrap()
            .iter()
            .map(|p| normalized_sq_l2(&b.expand(p.assignment()), &q).unwrap().sqrt())
            .fold(f64::INFINITY, f64::min);
        let r = delta2_hat_fit(&b, &q, &FitOptions::default()).unwrap();
        assert!((r.value - brute).abs() < 1e-12);
        assert_eq!(r.value, 0.0);
        assert_eq!(r.partition.class_of(0), r.partition.class_of(2));
    }

    #[test]
    fn fit_fallback_is_flagged_upper_bound() {
        let g = LabeledGraph::from_edges(8, [(0, 1), (0, 2), (1, 2), (5, 6), (6, 7), (5, 7)]).unwrap();
        let q = SquareMatrix::from_vec(8, g.adjacency_matrix()).unwrap();
        let b = bm(2, &[0.5, 0.0, 0.0, 0.5]);
        let exact = delta2_hat_fit(&b, &q, &FitOptions::default()).unwrap();
        let approx = delta2_hat_fit(&b, &q, &FitOptions { budget: 1.0, restarts: 20, seed: 9 }).unwrap();
        assert!(!approx.exact);
        assert!(approx.value >= exact.value - 1e-12);
    }

    #[test]
    fn agnostic_examples() {
        let eq = StepGraphon::equal_blocks(bm(2, &[0.8, 0.2, 0.2, 0.8]));
        assert!(agnostic_error(&eq, 2).unwrap() < 1e-7);
        assert!(agnostic_error(&eq, 4).unwrap() < 1e-7);
        let w = two_clique_graphon(0.25).unwrap();
        assert!((agnostic_error(&w, 1).unwrap() - 15f64.sqrt() / 8.0).abs() < 1e-12);
        // q = 1/2 is already equal-block
        assert!(agnostic_error(&two_clique_graphon(0.5).unwrap(), 2).unwrap() < 1e-7);
    }

    #[test]
    fn sampling_error_small_for_block_graphon() {
        let w = StepGraphon::equal_blocks(bm(2, &[0.8, 0.2, 0.2, 0.8]));
        let mut rng = crate::rng::stream(8);
        let s = sample_w_random(&w, 0.5, 200, &mut rng).unwrap();
        let e = sampling_error(&s, &w).unwrap();
        assert!(e < 0.3, "{e}");
        let below = s.labels.iter().filter(|&&x| x <= 0.5).count();
        assert_eq!(e == 0.0, below == 100);
    }

    #[test]
    fn step_distance_exact() {
        use num_rational::BigRational;
        let q = |a: i64, b: i64| BigRational::new(a.into(), b.into());
        let one = BlockMatrix::new(1, vec![q(1, 1)]).unwrap();
        let w1 = StepGraphon::equal_blocks(one);
        let w2 = StepGraphon::new(vec![q(0, 1), q(1, 4), q(1, 1)], BlockMatrix::new(2, vec![q(1, 1), q(0, 1), q(0, 1), q(1, 1)]).unwrap()).unwrap();
        // off-diagonal mass 2 · 1/4 · 3/4
        assert_eq!(step_sq_distance(&w1, &w2), q(3, 8));
    }
}
