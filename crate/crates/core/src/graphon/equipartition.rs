//! `k`-equipartitions of `[n]`: maps `π: [n] → [k]` with every class size
//! within one of `n/k`.

use crate::error::{invalid_input, Result};
use crate::scalar::Scalar;
use rand::seq::SliceRandom;
use rand::Rng;

use super::{BlockMatrix, SquareMatrix};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Equipartition {
    k: usize,
    assignment: Vec<usize>,
}

/// Permitted class sizes: `(floor, ceil, number of ceil-sized classes)`.
fn size_profile(n: usize, k: usize) -> (usize, usize, usize) {
    let lo = n / k;
    let r = n % k;
    (lo, if r == 0 { lo } else { lo + 1 }, r)
}

fn valid_sizes(n: usize, k: usize, sizes: &[usize]) -> bool {
    let (lo, hi, r) = size_profile(n, k);
    sizes.iter().all(|&s| s == lo || s == hi) && sizes.iter().filter(|&&s| s == hi && hi != lo).count() == r
}

impl Equipartition {
    pub fn new(k: usize, assignment: Vec<usize>) -> Result<Self> {
        let n = assignment.len();
        if k == 0 || k > n {
            return Err(invalid_input(format!("need 1 <= k <= n, got k={k}, n={n}")));
        }
        if assignment.iter().any(|&c| c >= k) {
            return Err(invalid_input("class label out of range"));
        }
        let p = Self { k, assignment };
        if !valid_sizes(n, k, &p.sizes()) {
            return Err(invalid_input(format!("class sizes {:?} are not within one of n/k", p.sizes())));
        }
        Ok(p)
    }

    /// First equipartition in enumeration order: consecutive runs, larger classes first.
    pub fn canonical(n: usize, k: usize) -> Result<Self> {
        if k == 0 || k > n {
            return Err(invalid_input(format!("need 1 <= k <= n, got k={k}, n={n}")));
        }
        let (lo, hi, r) = size_profile(n, k);
        let mut assignment = Vec::with_capacity(n);
        for c in 0..k {
            assignment.extend(std::iter::repeat_n(c, if c < r { hi } else { lo }));
        }
        Ok(Self { k, assignment })
    }

    pub fn random<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<Self> {
        let mut p = Self::canonical(n, k)?;
        let mut labels: Vec<usize> = (0..k).collect();
        labels.shuffle(rng);
        for c in p.assignment.iter_mut() {
            *c = labels[*c];
        }
        p.assignment.shuffle(rng);
        Ok(p)
    }

    pub fn n(&self) -> usize {
        self.assignment.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn class_of(&self, v: usize) -> usize {
        self.assignment[v]
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.k];
        for &c in &self.assignment {
            s[c] += 1;
        }
        s
    }

    pub fn class(&self, c: usize) -> Vec<usize> {
        (0..self.n()).filter(|&v| self.assignment[v] == c).collect()
    }
}

/// Number of equipartitions visited by [`for_each_equipartition`], as `f64`
/// (it can be huge).
pub fn equipartition_count(n: usize, k: usize) -> f64 {
    if k == 0 || k > n {
        return 0.0;
    }
    let (lo, hi, r) = size_profile(n, k);
    let ln_fact = |x: usize| statrs::function::gamma::ln_gamma(x as f64 + 1.0);
    (ln_fact(n) - r as f64 * ln_fact(hi) - (k - r) as f64 * ln_fact(lo)).exp().round()
}

/// Visit every `k`-equipartition of `[n]` whose first `n mod k` classes have
/// size `⌈n/k⌉`, in lexicographic order of the assignment vector. Every
/// equipartition is a class relabeling of exactly one visited assignment.
pub fn for_each_equipartition(n: usize, k: usize, mut visit: impl FnMut(&[usize])) -> Result<()> {
    if k == 0 || k > n {
        return Err(invalid_input(format!("need 1 <= k <= n, got k={k}, n={n}")));
    }
    let (lo, hi, r) = size_profile(n, k);
    let mut left: Vec<usize> = (0..k).map(|c| if c < r { hi } else { lo }).collect();
    let mut assignment = vec![0; n];
    fn rec(pos: usize, assignment: &mut [usize], left: &mut [usize], visit: &mut dyn FnMut(&[usize])) {
        if pos == assignment.len() {
            visit(assignment);
            return;
        }
        for c in 0..left.len() {
            if left[c] == 0 {
                continue;
            }
            left[c] -= 1;
            assignment[pos] = c;
            rec(pos + 1, assignment, left, visit);
            left[c] += 1;
        }
    }
    rec(0, &mut assignment, &mut left, &mut visit);
    Ok(())
}

pub fn all_equipartitions(n: usize, k: usize) -> Result<Vec<Equipartition>> {
    let mut out = Vec::new();
    for_each_equipartition(n, k, |a| out.push(Equipartition { k, assignment: a.to_vec() }))?;
    Ok(out)
}

/// First-improvement local search over equipartitions, maximizing
/// `objective`, restarted `restarts` times from random starts. Moves are
/// single-vertex relabelings that keep the sizes valid and swaps of two
/// vertices in different classes.
pub fn local_search_max<R: Rng + ?Sized>(
    n: usize,
    k: usize,
    restarts: usize,
    rng: &mut R,
    mut objective: impl FnMut(&[usize]) -> f64,
) -> Result<(Equipartition, f64)> {
    let mut best: Option<(Equipartition, f64)> = None;
    for _ in 0..restarts.max(1) {
        let mut cur = Equipartition::random(n, k, rng)?;
        let mut val = objective(&cur.assignment);
        loop {
            let mut improved = false;
            let mut sizes = cur.sizes();
            'moves: for v in 0..n {
                for c in 0..k {
                    let from = cur.assignment[v];
                    if c == from {
                        continue;
                    }
                    sizes[from] -= 1;
                    sizes[c] += 1;
                    if valid_sizes(n, k, &sizes) {
                        cur.assignment[v] = c;
                        let cand = objective(&cur.assignment);
                        if cand > val + 1e-15 {
                            val = cand;
                            improved = true;
                            continue 'moves;
                        }
                        cur.assignment[v] = from;
                    }
                    sizes[from] += 1;
                    sizes[c] -= 1;
                }
            }
            for u in 0..n {
                for v in u + 1..n {
                    if cur.assignment[u] == cur.assignment[v] {
                        continue;
                    }
                    cur.assignment.swap(u, v);
                    let cand = objective(&cur.assignment);
                    if cand > val + 1e-15 {
                        val = cand;
                        improved = true;
                    } else {
                        cur.assignment.swap(u, v);
                    }
                }
            }
            if !improved {
                break;
            }
        }
        if best.as_ref().is_none_or(|(_, b)| val > *b) {
            best = Some((cur, val));
        }
    }
    Ok(best.expect("at least one restart"))
}

/// Per-block means of `q`: `B(π)_{ab} = Σ_{i∈π⁻¹(a), j∈π⁻¹(b)} Q_ij / (|π⁻¹(a)||π⁻¹(b)|)`.
pub fn block_average<T: Scalar>(q: &SquareMatrix<T>, pi: &Equipartition) -> Result<BlockMatrix<T>> {
    if q.dim() != pi.n() {
        return Err(invalid_input(format!("matrix is {}x{} but partition covers {} vertices", q.dim(), q.dim(), pi.n())));
    }
    let k = pi.k();
    let mut sums = vec![T::zero(); k * k];
    for i in 0..q.dim() {
        for j in 0..q.dim() {
            let idx = pi.class_of(i) * k + pi.class_of(j);
            sums[idx] = sums[idx].clone() + q.get(i, j).clone();
        }
    }
    let sizes = pi.sizes();
    let values = (0..k * k)
        .map(|idx| sums[idx].clone() / T::of_usize(sizes[idx / k] * sizes[idx % k]))
        .collect();
    BlockMatrix::new(k, values)
}

/// [`block_average`] with every entry rounded down to a multiple of `1/n`.
pub fn block_average_grid<T: Scalar>(q: &SquareMatrix<T>, pi: &Equipartition, n: usize) -> Result<BlockMatrix<T>> {
    let b = block_average(q, pi)?;
    let nn = T::of_usize(n);
    let k = b.k();
    let values = b.matrix().entries().iter().map(|v| (v.clone() * nn.clone()).floor_value() / nn.clone()).collect();
    BlockMatrix::new(k, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::LabeledGraph;
    use num_rational::BigRational;

    #[test]
    fn counts_match_enumeration() {
        for n in 1..=8 {
            for k in 1..=n {
                let mut count = 0usize;
                for_each_equipartition(n, k, |a| {
                    assert!(Equipartition::new(k, a.to_vec()).is_ok());
                    count += 1;
                })
                .unwrap();
                assert_eq!(count as f64, equipartition_count(n, k), "n={n} k={k}");
            }
        }
        assert_eq!(equipartition_count(12, 2), 924.0);
        assert_eq!(equipartition_count(4, 2), 6.0);
        assert_eq!(equipartition_count(5, 2), 10.0);
    }

    #[test]
    fn enumeration_is_lexicographic() {
        let parts = all_equipartitions(5, 2).unwrap();
        assert!(parts.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(parts[0].assignment(), Equipartition::canonical(5, 2).unwrap().assignment());
    }

    #[test]
    fn rejects_unbalanced() {
        assert!(Equipartition::new(2, vec![0, 0, 0, 1]).is_err());
        assert!(Equipartition::new(2, vec![0, 1, 1, 0]).is_ok());
        assert!(Equipartition::new(3, vec![0, 1]).is_err());
    }

    #[test]
    fn block_average_examples() {
        let q = SquareMatrix::from_vec(4, vec![0.3f64; 16]).unwrap();
        let pi = Equipartition::canonical(4, 2).unwrap();
        let b = block_average(&q, &pi).unwrap();
        assert!(b.matrix().entries().iter().all(|&v| (v - 0.3).abs() < 1e-15));
        let g = block_average_grid(&q, &pi, 4).unwrap();
        assert!(g.matrix().entries().iter().all(|&v| v == 0.25));

        // singleton classes reproduce the matrix
        let q = SquareMatrix::from_fn(3, |i, j| if i == j { 0.0 } else { 0.1 * (i + j) as f64 });
        let pi = Equipartition::new(3, vec![2, 0, 1]).unwrap();
        let b = block_average(&q, &pi).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(b.get(pi.class_of(i), pi.class_of(j)), q.get(i, j));
            }
        }
    }

    #[test]
    fn block_average_of_path_is_exact() {
        // path 0-1-2-3, classes {0,1}, {2,3}
        let path = LabeledGraph::from_edges(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
        let q = SquareMatrix::from_vec(4, path.adjacency_matrix::<BigRational>()).unwrap();
        let pi = Equipartition::new(2, vec![0, 0, 1, 1]).unwrap();
        let b = block_average(&q, &pi).unwrap();
        let r = |a: i64, b: i64| BigRational::new(a.into(), b.into());
        // within {0,1}: two ordered adjacent pairs over 4 cells; across: one edge (1,2)
        assert_eq!(b.get(0, 0), &r(1, 2));
        assert_eq!(b.get(1, 1), &r(1, 2));
        assert_eq!(b.get(0, 1), &r(1, 4));
    }

    #[test]
    fn local_search_finds_obvious_optimum() {
        let mut rng = crate::rng::stream(3);
        let (p, v) = local_search_max(6, 2, 5, &mut rng, |a| if a[0] == a[1] && a[1] == a[2] { 1.0 } else { 0.0 }).unwrap();
        assert_eq!(v, 1.0);
        assert_eq!(p.class_of(0), p.class_of(2));
    }
}
