use crate::error::{invalid_input, invalid_param, Error, Result};
use crate::scalar::Scalar;

use super::matrix::parse_reals;
use super::BlockMatrix;

/// Step graphon: value `B_ab` on `[t_a, t_{a+1}) × [t_b, t_{b+1})`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepGraphon<T> {
    boundaries: Vec<T>,
    values: BlockMatrix<T>,
}

impl<T: Scalar> StepGraphon<T> {
    pub fn new(boundaries: Vec<T>, values: BlockMatrix<T>) -> Result<Self> {
        if boundaries.len() != values.k() + 1 {
            return Err(invalid_input(format!("{} boundaries for {} blocks", boundaries.len(), values.k())));
        }
        if boundaries[0] != T::zero() || boundaries[values.k()] != T::one() {
            return Err(invalid_input("boundaries must start at 0 and end at 1"));
        }
        if boundaries.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid_input("boundaries must be strictly increasing"));
        }
        Ok(Self { boundaries, values })
    }

    /// Equal-size blocks, `t_i = i/k`.
    pub fn equal_blocks(values: BlockMatrix<T>) -> Self {
        let k = values.k();
        let boundaries = (0..=k).map(|i| T::ratio(i, k)).collect();
        Self { boundaries, values }
    }

    pub fn k(&self) -> usize {
        self.values.k()
    }

    pub fn boundaries(&self) -> &[T] {
        &self.boundaries
    }

    pub fn values(&self) -> &BlockMatrix<T> {
        &self.values
    }

    pub fn block_length(&self, a: usize) -> T {
        self.boundaries[a + 1].clone() - self.boundaries[a].clone()
    }

    /// Block containing `x`; blocks are closed on the right, so `t_1` belongs
    /// to block 0.
    pub fn block_of(&self, x: &T) -> usize {
        (0..self.k()).find(|&a| x <= &self.boundaries[a + 1]).unwrap_or(self.k() - 1)
    }

    pub fn value(&self, x: &T, y: &T) -> T {
        self.values.get(self.block_of(x), self.block_of(y)).clone()
    }

    /// `∫∫ W`.
    pub fn density(&self) -> T {
        let mut acc = T::zero();
        for a in 0..self.k() {
            for b in 0..self.k() {
                acc = acc + self.values.get(a, b).clone() * self.block_length(a) * self.block_length(b);
            }
        }
        acc
    }

    /// `∫∫ W²`.
    pub fn sq_norm(&self) -> T {
        let mut acc = T::zero();
        for a in 0..self.k() {
            for b in 0..self.k() {
                let v = self.values.get(a, b).clone();
                acc = acc + v.clone() * v * self.block_length(a) * self.block_length(b);
            }
        }
        acc
    }

    pub fn sup(&self) -> T {
        self.values.max_entry()
    }

    /// Same graphon with the block order permuted: new block `a` is old block `σ(a)`.
    pub fn reordered(&self, sigma: &[usize]) -> Self {
        let mut boundaries = vec![T::zero()];
        let mut acc = T::zero();
        for &s in sigma {
            acc = acc + self.block_length(s);
            boundaries.push(acc.clone());
        }
        let last = boundaries.len() - 1;
        boundaries[last] = T::one();
        Self { boundaries, values: self.values.permuted(sigma) }
    }

    pub fn to_f64(&self) -> StepGraphon<f64> {
        StepGraphon {
            boundaries: self.boundaries.iter().map(|t| t.to_f64_lossy()).collect(),
            values: self.values.to_f64(),
        }
    }
}

impl StepGraphon<f64> {
    /// Text form: `k`, then the `k+1` boundaries, then `k` rows of `k` values.
    pub fn to_text(&self) -> String {
        let b: Vec<String> = self.boundaries.iter().map(|t| format!("{t}")).collect();
        let m = self.values.to_text();
        let (k, rows) = m.split_once('\n').expect("block text has a header");
        format!("{k}\n{}\n{rows}", b.join(" "))
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (ln, head) = lines.next().ok_or(Error::Parse { line: 1, msg: "empty graphon file".into() })?;
        let k: usize = head.parse().map_err(|_| Error::Parse { line: ln, msg: format!("bad block count `{head}`") })?;
        let (ln, bline) = lines.next().ok_or(Error::Parse { line: ln + 1, msg: "missing boundaries".into() })?;
        let boundaries = parse_reals(bline, ln)?;
        let mut rows = Vec::with_capacity(k);
        for _ in 0..k {
            let (ln, row) = lines.next().ok_or(Error::Parse { line: ln + 1, msg: "missing matrix row".into() })?;
            let r = parse_reals(row, ln)?;
            if r.len() != k {
                return Err(Error::Parse { line: ln, msg: format!("expected {k} values, got {}", r.len()) });
            }
            rows.push(r);
        }
        if let Some((ln, _)) = lines.next() {
            return Err(Error::Parse { line: ln, msg: "trailing content".into() });
        }
        Self::new(boundaries, BlockMatrix::from_rows(&rows)?)
    }
}

/// Two cliques: value 1 on `[0,q]² ∪ (q,1]²`, 0 elsewhere.
pub fn two_clique_graphon(q: f64) -> Result<StepGraphon<f64>> {
    if !(q > 0.0 && q < 1.0) {
        return Err(invalid_param(format!("q must lie in (0,1), got {q}")));
    }
    StepGraphon::new(vec![0.0, q, 1.0], BlockMatrix::new(2, vec![1.0, 0.0, 0.0, 1.0])?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    #[test]
    fn two_clique_density() {
        assert!((two_clique_graphon(0.5).unwrap().density() - 0.5).abs() < 1e-15);
        assert!((two_clique_graphon(0.25).unwrap().density() - 5.0 / 8.0).abs() < 1e-15);
        for q in [0.1, 0.3, 0.7] {
            let w = two_clique_graphon(q).unwrap();
            assert!((w.density() - (0.5 + 2.0 * (q - 0.5) * (q - 0.5))).abs() < 1e-12);
        }
        assert!(two_clique_graphon(0.0).is_err());
        assert!(two_clique_graphon(1.0).is_err());
    }

    #[test]
    fn exact_density() {
        let q = |a: i64, b: i64| BigRational::new(a.into(), b.into());
        let b = BlockMatrix::new(2, vec![q(1, 1), q(0, 1), q(0, 1), q(1, 1)]).unwrap();
        let w = StepGraphon::new(vec![q(0, 1), q(1, 4), q(1, 1)], b).unwrap();
        assert_eq!(w.density(), q(5, 8));
    }

    #[test]
    fn text_roundtrip() {
        let w = two_clique_graphon(0.25).unwrap();
        let back = StepGraphon::from_text(&w.to_text()).unwrap();
        assert_eq!(w, back);
        assert!(StepGraphon::from_text("2\n0 0.6 0.5\n1 0\n0 1\n").is_err());
        assert!(StepGraphon::from_text("2\n0 0.5 1\n1 0\n").is_err());
    }

    #[test]
    fn block_lookup_is_right_closed() {
        let w = two_clique_graphon(0.25).unwrap();
        assert_eq!(w.block_of(&0.25), 0);
        assert_eq!(w.block_of(&0.2500001), 1);
        assert_eq!(w.block_of(&1.0), 1);
    }

    #[test]
    fn reorder_keeps_density() {
        let w = StepGraphon::new(vec![0.0f64, 0.2, 0.5, 1.0], BlockMatrix::new(3, vec![0.9, 0.1, 0.3, 0.1, 0.5, 0.2, 0.3, 0.2, 0.7]).unwrap()).unwrap();
        let r = w.reordered(&[2, 0, 1]);
        assert!((r.density() - w.density()).abs() < 1e-12);
        assert!((r.boundaries()[1] - 0.5).abs() < 1e-12);
        assert_eq!(r.value(&0.1, &0.1), 0.7);
    }
}
