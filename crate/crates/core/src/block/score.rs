//! `Score(B, π, A) = ‖A‖₂² − ‖A − B_π‖₂²` under the `1/n²`-normalized norm.
//! The diagonal takes part: `A_ii = 0` and `(B_π)_ii = B_{π(i)π(i)}`.

use rand::Rng;
use std::collections::BTreeMap;

use crate::error::{invalid_input, Result};
use crate::graph::LabeledGraph;
use crate::graphon::{equipartition_count, for_each_equipartition, local_search_max, BlockMatrix, Equipartition, SquareMatrix};
use crate::scalar::Scalar;

fn check_dims(k: usize, pi: &Equipartition, n: usize) -> Result<()> {
    if pi.k() != k || pi.n() != n {
        return Err(invalid_input(format!(
            "block matrix has k={k}, partition has k={} over {} vertices, graph has {n}",
            pi.k(),
            pi.n()
        )));
    }
    Ok(())
}

/// Score from per-block sufficient statistics: `(1/n²) Σ_ab (2 B_ab E_ab − B_ab² s_a s_b)`
/// where `E_ab` counts ordered adjacent pairs between blocks and `s` holds block sizes.
pub fn profile_score<T: Scalar>(b: &BlockMatrix<T>, sizes: &[usize], e: &[usize], n: usize) -> T {
    let k = b.k();
    let two = T::of_usize(2);
    let mut acc = T::zero();
    for a in 0..k {
        for c in 0..k {
            let v = b.get(a, c).clone();
            acc = acc + two.clone() * v.clone() * T::of_usize(e[a * k + c]) - v.clone() * v * T::of_usize(sizes[a] * sizes[c]);
        }
    }
    acc / T::of_usize(n * n)
}

fn block_profile(a: &LabeledGraph, assignment: &[usize], k: usize) -> (Vec<usize>, Vec<usize>) {
    let mut sizes = vec![0; k];
    let mut e = vec![0; k * k];
    for &c in assignment {
        sizes[c] += 1;
    }
    for (u, v) in a.edges() {
        let (cu, cv) = (assignment[u], assignment[v]);
        e[cu * k + cv] += 1;
        e[cv * k + cu] += 1;
    }
    (sizes, e)
}

pub fn score<T: Scalar>(b: &BlockMatrix<T>, pi: &Equipartition, a: &LabeledGraph) -> Result<T> {
    check_dims(b.k(), pi, a.n())?;
    let (sizes, e) = block_profile(a, pi.assignment(), b.k());
    Ok(profile_score(b, &sizes, &e, a.n()))
}

/// `‖Q‖₂² − ‖Q − B_π‖₂²` for an arbitrary (weighted) symmetric matrix, by
/// direct summation.
pub fn score_matrix<T: Scalar>(b: &BlockMatrix<T>, pi: &Equipartition, q: &SquareMatrix<T>) -> Result<T> {
    check_dims(b.k(), pi, q.dim())?;
    let n = q.dim();
    let bp = b.expand(pi.assignment());
    let mut acc = T::zero();
    for i in 0..n {
        for j in 0..n {
            let x = q.get(i, j).clone();
            let d = x.clone() - bp.get(i, j).clone();
            acc = acc + x.clone() * x - d.clone() * d;
        }
    }
    Ok(acc / T::of_usize(n * n))
}

/// Distinct block profiles of a graph over all visited equipartitions, each
/// with the lexicographically first assignment that realizes it.
#[derive(Debug, Clone)]
pub struct ProfileSet {
    n: usize,
    k: usize,
    profiles: Vec<(Vec<usize>, Vec<usize>, Vec<usize>)>,
}

impl ProfileSet {
    pub fn build(a: &LabeledGraph, k: usize) -> Result<Self> {
        let mut seen: BTreeMap<(Vec<usize>, Vec<usize>), Vec<usize>> = BTreeMap::new();
        for_each_equipartition(a.n(), k, |asg| {
            let key = block_profile(a, asg, k);
            seen.entry(key).or_insert_with(|| asg.to_vec());
        })?;
        let mut profiles: Vec<_> = seen.into_iter().map(|((s, e), asg)| (s, e, asg)).collect();
        profiles.sort_by(|x, y| x.2.cmp(&y.2));
        Ok(Self { n: a.n(), k, profiles })
    }

    pub fn len(&self) -> usize {
        self.profiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.profiles.is_empty()
    }

    /// Maximum score and the lexicographically smallest maximizing assignment.
    pub fn best<T: Scalar>(&self, b: &BlockMatrix<T>) -> (T, &[usize]) {
        let mut best: Option<(T, &[usize])> = None;
        // profiles are sorted by their first assignment, so strict improvement keeps the smallest
        for (s, e, asg) in &self.profiles {
            let v = profile_score(b, s, e, self.n);
            if best.as_ref().is_none_or(|(bv, _)| v > *bv) {
                best = Some((v, asg));
            }
        }
        best.expect("at least one equipartition")
    }

    pub fn k(&self) -> usize {
        self.k
    }
}

#[derive(Debug, Clone)]
pub struct BestScore<T> {
    pub value: T,
    pub partition: Equipartition,
    pub exact: bool,
}

/// `max_π Score(B, π, A)`: exhaustive when the equipartition count is within
/// `budget`, otherwise restarted local search (flagged non-exact).
pub fn best_score<R: Rng + ?Sized>(
    b: &BlockMatrix<f64>,
    a: &LabeledGraph,
    budget: f64,
    restarts: usize,
    rng: &mut R,
) -> Result<BestScore<f64>> {
    if equipartition_count(a.n(), b.k()) <= budget {
        let set = ProfileSet::build(a, b.k())?;
        let (v, asg) = set.best(b);
        return Ok(BestScore { value: v, partition: Equipartition::new(b.k(), asg.to_vec())?, exact: true });
    }
    let k = b.k();
    let (p, v) = local_search_max(a.n(), k, restarts, rng, |asg| {
        let (s, e) = block_profile(a, asg, k);
        profile_score(b, &s, &e, a.n())
    })?;
    Ok(BestScore { value: v, partition: p, exact: false })
}

/// Best score against the degree-capped graph.
pub fn lipschitz_score<R: Rng + ?Sized>(
    b: &BlockMatrix<f64>,
    a: &LabeledGraph,
    d: usize,
    budget: f64,
    restarts: usize,
    rng: &mut R,
) -> Result<BestScore<f64>> {
    best_score(b, &a.degree_cap(d), budget, restarts, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphon::all_equipartitions;
    use crate::rng::stream;
    use crate::Rational;
    use num_traits::Zero;

    fn bm(k: usize, v: &[f64]) -> BlockMatrix<f64> {
        BlockMatrix::new(k, v.to_vec()).unwrap()
    }

    fn norm_sq(q: &SquareMatrix<f64>) -> f64 {
        q.entries().iter().map(|x| x * x).sum::<f64>() / (q.dim() * q.dim()) as f64
    }

    #[test]
    fn zero_matrix_scores_zero() {
        let g = LabeledGraph::from_edges(5, [(0, 1), (2, 3), (1, 4)]).unwrap();
        let pi = Equipartition::canonical(5, 2).unwrap();
        assert_eq!(score(&bm(2, &[0.0; 4]), &pi, &g).unwrap(), 0.0);
    }

    #[test]
    fn two_disjoint_edges() {
        let g = LabeledGraph::from_edges(4, [(0, 1), (2, 3)]).unwrap();
        let pi = Equipartition::new(2, vec![0, 0, 1, 1]).unwrap();
        let b = bm(2, &[1.0, 0.0, 0.0, 1.0]);
        let q = SquareMatrix::from_vec(4, g.adjacency_matrix()).unwrap();
        let direct = score_matrix(&b, &pi, &q).unwrap();
        let fast = score(&b, &pi, &g).unwrap();
        // 4 ordered edge pairs score 2 each, 8 in-block cells cost 1 each: (8 − 8)/16
        assert_eq!(fast, 0.0);
        assert!((fast - direct).abs() < 1e-15);
        let half = bm(2, &[0.5, 0.0, 0.0, 0.5]);
        // (2·0.5·4 − 0.25·8)/16 = 2/16
        assert!((score(&half, &pi, &g).unwrap() - 0.125).abs() < 1e-15);
    }

    #[test]
    fn exact_block_graph_scores_its_norm() {
        // two triangles on {0,1,2},{3,4,5}, with a loop-free diagonal the
        // best B_π differs from A only on the diagonal
        let g = LabeledGraph::from_edges(6, [(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5)]).unwrap();
        let pi = Equipartition::new(2, vec![0, 0, 0, 1, 1, 1]).unwrap();
        let b = bm(2, &[1.0, 0.0, 0.0, 1.0]);
        let q = SquareMatrix::from_vec(6, g.adjacency_matrix()).unwrap();
        let s = score(&b, &pi, &g).unwrap();
        assert!((s - (norm_sq(&q) - 6.0 / 36.0)).abs() < 1e-15);
    }

    #[test]
    fn fast_matches_direct_exactly() {
        let g = LabeledGraph::from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 4), (0, 4), (1, 3)]).unwrap();
        let r = |a: i64, b: i64| Rational::new(a.into(), b.into());
        let b = BlockMatrix::new(2, vec![r(1, 3), r(1, 5), r(1, 5), r(4, 5)]).unwrap();
        let q = SquareMatrix::from_vec(5, g.adjacency_matrix::<Rational>()).unwrap();
        for p in all_equipartitions(5, 2).unwrap() {
            assert_eq!(score(&b, &p, &g).unwrap(), score_matrix(&b, &p, &q).unwrap());
        }
        assert!(score(&b, &Equipartition::canonical(4, 2).unwrap(), &g).is_err());
        let zero = BlockMatrix::new(2, vec![Rational::zero(); 4]).unwrap();
        assert!(score(&zero, &Equipartition::canonical(5, 2).unwrap(), &g).unwrap().is_zero());
    }

    #[test]
    fn weighted_scale_identity() {
        let g = LabeledGraph::from_edges(6, [(0, 1), (1, 2), (3, 5), (2, 4)]).unwrap();
        let q = SquareMatrix::from_vec(6, g.adjacency_matrix::<f64>()).unwrap();
        let b = bm(2, &[0.4, 0.1, 0.1, 0.7]);
        let pi = Equipartition::new(2, vec![0, 1, 0, 1, 1, 0]).unwrap();
        for c in [0.5, 2.0, 3.7] {
            let cq = q.map(|x| c * x);
            let bp = b.expand(pi.assignment());
            let diff = SquareMatrix::from_fn(6, |i, j| cq.get(i, j) - bp.get(i, j));
            let lhs = score_matrix(&b, &pi, &cq).unwrap();
            let rhs = c * c * norm_sq(&q) - norm_sq(&diff);
            assert!((lhs - rhs).abs() < 1e-12);
        }
    }

    #[test]
    fn best_score_two_triangles() {
        let g = LabeledGraph::from_edges(6, [(0, 2), (0, 4), (2, 4), (1, 3), (1, 5), (3, 5)]).unwrap();
        let b = bm(2, &[1.0, 0.0, 0.0, 1.0]);
        let best = best_score(&b, &g, 1e7, 20, &mut stream(0)).unwrap();
        assert!(best.exact);
        let brute = all_equipartitions(6, 2)
            .unwrap()
            .iter()
            .map(|p| score(&b, p, &g).unwrap())
            .fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(best.value, brute);
        assert_eq!(best.partition.assignment(), &[0, 1, 0, 1, 0, 1]);
    }

    #[test]
    fn best_score_k1_and_zero() {
        let g = LabeledGraph::from_edges(5, [(0, 1), (3, 4)]).unwrap();
        let b = bm(1, &[0.3]);
        let best = best_score(&b, &g, 1e7, 20, &mut stream(0)).unwrap();
        let trivial = Equipartition::canonical(5, 1).unwrap();
        assert_eq!(best.value, score(&b, &trivial, &g).unwrap());
        let z = best_score(&bm(2, &[0.0; 4]), &g, 1e7, 20, &mut stream(0)).unwrap();
        assert_eq!(z.value, 0.0);
        assert_eq!(z.partition, Equipartition::canonical(5, 2).unwrap());
    }

    #[test]
    fn local_search_never_beats_exact() {
        let g = LabeledGraph::from_edges(8, [(0, 1), (0, 2), (1, 2), (5, 6), (6, 7), (5, 7), (3, 4)]).unwrap();
        let b = bm(2, &[0.9, 0.1, 0.1, 0.6]);
        let exact = best_score(&b, &g, 1e7, 20, &mut stream(0)).unwrap();
        let approx = best_score(&b, &g, 1.0, 20, &mut stream(1)).unwrap();
        assert!(!approx.exact);
        assert!(approx.value <= exact.value + 1e-15);
    }

    #[test]
    fn lipschitz_examples() {
        let star = LabeledGraph::from_edges(6, (1..6).map(|v| (0, v))).unwrap();
        let b = bm(2, &[0.5, 0.2, 0.2, 0.3]);
        let mut rng = stream(0);
        // identity below the cap
        let direct = best_score(&b, &star, 1e7, 20, &mut rng).unwrap().value;
        assert_eq!(lipschitz_score(&b, &star, 5, 1e7, 20, &mut rng).unwrap().value, direct);
        // capped star keeps (0,1),(0,2)
        let capped = LabeledGraph::from_edges(6, [(0, 1), (0, 2)]).unwrap();
        assert_eq!(
            lipschitz_score(&b, &star, 2, 1e7, 20, &mut rng).unwrap().value,
            best_score(&b, &capped, 1e7, 20, &mut rng).unwrap().value
        );
        // d = 0 scores the empty graph: −min_π ‖B_π‖², independent of π for equal blocks
        let v = lipschitz_score(&b, &star, 0, 1e7, 20, &mut rng).unwrap().value;
        let want = -(9.0 * (0.25 + 0.09) + 18.0 * 0.04) / 36.0;
        assert!((v - want).abs() < 1e-15);
    }
}
