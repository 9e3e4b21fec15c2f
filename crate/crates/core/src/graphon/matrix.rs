use crate::error::{invalid_input, Error, Result};
use crate::scalar::Scalar;
use num_traits::Float;

/// Dense square matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix<T> {
    dim: usize,
    data: Vec<T>,
}

impl<T: Scalar> SquareMatrix<T> {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![T::zero(); dim * dim] }
    }

    pub fn from_vec(dim: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(invalid_input(format!("expected {} entries for a {dim}x{dim} matrix, got {}", dim * dim, data.len())));
        }
        Ok(Self { dim, data })
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        Self { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.dim + j] = v;
    }

    pub fn entries(&self) -> &[T] {
        &self.data
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.dim).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> SquareMatrix<U> {
        SquareMatrix { dim: self.dim, data: self.data.iter().map(f).collect() }
    }
}

/// Normalized squared L2 distance `(1/n²) Σ (A_ij − B_ij)²`.
pub fn normalized_sq_l2<T: Scalar>(a: &SquareMatrix<T>, b: &SquareMatrix<T>) -> Result<T> {
    if a.dim != b.dim {
        return Err(invalid_input(format!("dimension mismatch: {} vs {}", a.dim, b.dim)));
    }
    let n = a.dim;
    if n == 0 {
        return Ok(T::zero());
    }
    let sum = a
        .data
        .iter()
        .zip(&b.data)
        .fold(T::zero(), |acc, (x, y)| {
            let d = x.clone() - y.clone();
            acc + d.clone() * d
        });
    Ok(sum / T::of_usize(n * n))
}

/// Normalized L2 distance `((1/n²) Σ (A_ij − B_ij)²)^{1/2}`.
pub fn normalized_l2<T: Scalar + Float>(a: &SquareMatrix<T>, b: &SquareMatrix<T>) -> Result<T> {
    normalized_sq_l2(a, b).map(Float::sqrt)
}

/// Symmetric `k × k` matrix with nonnegative entries.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockMatrix<T>(SquareMatrix<T>);

impl<T: Scalar> BlockMatrix<T> {
    pub fn new(k: usize, values: Vec<T>) -> Result<Self> {
        Self::from_matrix(SquareMatrix::from_vec(k, values)?)
    }

    pub fn from_matrix(m: SquareMatrix<T>) -> Result<Self> {
        if !m.is_symmetric() {
            return Err(invalid_input("block matrix must be symmetric"));
        }
        if m.data.iter().any(|v| v < &T::zero()) {
            return Err(invalid_input("block matrix entries must be nonnegative"));
        }
        Ok(Self(m))
    }

    pub fn constant(k: usize, v: T) -> Result<Self> {
        Self::new(k, vec![v; k * k])
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let k = rows.len();
        if rows.iter().any(|r| r.len() != k) {
            return Err(invalid_input("block matrix rows must have length k"));
        }
        Self::new(k, rows.iter().flatten().cloned().collect())
    }

    pub fn k(&self) -> usize {
        self.0.dim
    }

    pub fn get(&self, a: usize, b: usize) -> &T {
        self.0.get(a, b)
    }

    pub fn matrix(&self) -> &SquareMatrix<T> {
        &self.0
    }

    pub fn max_entry(&self) -> T {
        self.0.data.iter().cloned().fold(T::zero(), |m, v| if v > m { v } else { m })
    }

    pub fn scaled(&self, c: &T) -> Self {
        Self(self.0.map(|v| v.clone() * c.clone()))
    }

    /// Rows and columns permuted: `(B^σ)_{ab} = B_{σ(a)σ(b)}`.
    pub fn permuted(&self, sigma: &[usize]) -> Self {
        Self(SquareMatrix::from_fn(self.k(), |a, b| self.get(sigma[a], sigma[b]).clone()))
    }

    /// `n × n` matrix `(B_π)_{ij} = B_{π(i)π(j)}`, diagonal included.
    pub fn expand(&self, assignment: &[usize]) -> SquareMatrix<T> {
        SquareMatrix::from_fn(assignment.len(), |i, j| self.get(assignment[i], assignment[j]).clone())
    }

    pub fn to_f64(&self) -> BlockMatrix<f64> {
        BlockMatrix(self.0.map(|v| v.to_f64_lossy()))
    }
}

impl BlockMatrix<f64> {
    /// Text form: `k` on the first line, then `k` rows of `k` values.
    pub fn to_text(&self) -> String {
        let mut out = format!("{}\n", self.k());
        for a in 0..self.k() {
            let row: Vec<String> = (0..self.k()).map(|b| format!("{}", self.get(a, b))).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }
}

pub(crate) fn parse_reals(line: &str, lineno: usize) -> Result<Vec<f64>> {
    line.split_whitespace()
        .map(|t| t.parse::<f64>().map_err(|_| Error::Parse { line: lineno, msg: format!("bad number `{t}`") }))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    #[test]
    fn normalized_l2_examples() {
        let a = SquareMatrix::from_vec(3, vec![0.3; 9]).unwrap();
        assert_eq!(normalized_l2(&a, &a).unwrap(), 0.0);
        for n in 1..6 {
            let ones = SquareMatrix::from_vec(n, vec![1.0; n * n]).unwrap();
            assert!((normalized_l2(&ones, &SquareMatrix::zeros(n)).unwrap() - 1.0).abs() < 1e-15);
        }
        let off = SquareMatrix::from_vec(2, vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        assert!((normalized_l2(&off, &SquareMatrix::zeros(2)).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
        assert!(normalized_l2(&off, &SquareMatrix::zeros(3)).is_err());
    }

    #[test]
    fn exact_squared_norm() {
        let q = |a: i64, b: i64| BigRational::new(a.into(), b.into());
        let a = SquareMatrix::from_vec(2, vec![q(1, 2), q(1, 3), q(1, 3), q(0, 1)]).unwrap();
        let z = SquareMatrix::zeros(2);
        // (1/4 + 2/9) / 4
        assert_eq!(normalized_sq_l2(&a, &z).unwrap(), q(17, 144));
    }

    #[test]
    fn block_matrix_invariants() {
        assert!(BlockMatrix::new(2, vec![0.1, 0.2, 0.3, 0.4]).is_err());
        assert!(BlockMatrix::new(2, vec![0.1, -0.2, -0.2, 0.4]).is_err());
        let b = BlockMatrix::new(2, vec![0.1, 0.2, 0.2, 0.4]).unwrap();
        assert_eq!(b.permuted(&[1, 0]).get(0, 0), &0.4);
        assert_eq!(b.max_entry(), 0.4);
        let e = b.expand(&[0, 1, 1]);
        assert_eq!(e.get(1, 2), &0.4);
        assert_eq!(e.get(0, 0), &0.1);
    }
}
