//! Scalar abstraction shared by the matrix and probability code.
//!
//! Everything that only needs field arithmetic (block averages, scores,
//! squared norms, exact pmfs) is written against [`Scalar`], so it runs on
//! `f32`, `f64` and on exact [`BigRational`] values. Code that needs
//! transcendental functions (sampling, densities) stays on `f64`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, One, Signed, ToPrimitive, Zero};
use std::fmt::Debug;

pub trait Scalar:
    Num + Clone + PartialOrd + Signed + FromPrimitive + ToPrimitive + Debug + Send + Sync
{
    /// Largest integer not greater than `self`.
    fn floor_value(&self) -> Self;

    fn of_usize(v: usize) -> Self {
        <Self as FromPrimitive>::from_usize(v).expect("usize fits scalar")
    }

    fn ratio(num: usize, den: usize) -> Self {
        Self::of_usize(num) / Self::of_usize(den)
    }

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {
    fn floor_value(&self) -> Self {
        self.floor()
    }
}

impl Scalar for f64 {
    fn floor_value(&self) -> Self {
        self.floor()
    }
}

impl Scalar for BigRational {
    fn floor_value(&self) -> Self {
        self.floor()
    }

    fn of_usize(v: usize) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
}

/// Binomial coefficient evaluated in the scalar type; `0` when `k > n`.
pub fn binomial<T: Scalar>(n: usize, k: usize) -> T {
    if k > n {
        return T::zero();
    }
    let k = k.min(n - k);
    let mut acc = T::one();
    for i in 0..k {
        acc = acc * T::of_usize(n - i) / T::of_usize(i + 1);
    }
    acc
}

/// Exact binomial coefficient.
pub fn binomial_exact(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// `ln C(n, k)` via log-gamma.
pub fn ln_binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    use statrs::function::gamma::ln_gamma;
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

/// Numerically stable `ln Σ exp(x_i)`.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}
