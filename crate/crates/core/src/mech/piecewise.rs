//! Densities on `[0,1]` whose logarithm is piecewise linear.
//!
//! Integrals over a segment are taken from its higher end, so every
//! exponential that appears has a nonpositive argument.

use rand::Rng;

use crate::error::{invalid_input, invalid_param, Result};
use crate::rng::open_unit;
use crate::scalar::log_sum_exp;

/// `∫₀¹ u^j e^{−y u} du` for `y ≥ 0`.
fn k_int(j: u32, y: f64) -> f64 {
    if y < 0.5 {
        let mut term = 1.0;
        let mut sum = 0.0;
        for m in 0..40u32 {
            sum += term / (j + m + 1) as f64;
            term *= -y / (m + 1) as f64;
        }
        return sum;
    }
    let e = (-y).exp();
    match j {
        0 => -(-y).exp_m1() / y,
        1 => (1.0 - e * (1.0 + y)) / (y * y),
        2 => (2.0 - e * (2.0 + 2.0 * y + y * y)) / (y * y * y),
        _ => unreachable!("only the first three moments are needed"),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseExpDensity {
    knots: Vec<f64>,
    /// Unnormalized log density at each knot.
    log_values: Vec<f64>,
    log_z: f64,
    /// Normalized mass of each segment.
    seg_mass: Vec<f64>,
    /// Normalized cumulative mass at each knot.
    cum: Vec<f64>,
}

struct Segment {
    a: f64,
    b: f64,
    /// Higher end and its log value.
    h: f64,
    lh: f64,
    /// `+1` when the higher end is `a`.
    dir: f64,
    /// Decay rate away from the higher end.
    alpha: f64,
}

impl Segment {
    fn len(&self) -> f64 {
        self.b - self.a
    }

    fn y(&self) -> f64 {
        self.alpha * self.len()
    }

    fn log_mass(&self) -> f64 {
        if self.len() == 0.0 {
            return f64::NEG_INFINITY;
        }
        self.lh + self.len().ln() + k_int(0, self.y()).ln()
    }

    /// `∫ (x−c)^j e^{l(x)} dx` over the segment, scaled by `e^{−shift}`.
    fn moment(&self, c: f64, j: u32, shift: f64) -> f64 {
        let (l, y) = (self.len(), self.y());
        let w = (self.lh - shift).exp();
        let hc = self.h - c;
        let (k0, k1, k2) = (k_int(0, y), k_int(1, y), k_int(2, y));
        w * match j {
            0 => l * k0,
            1 => hc * l * k0 + self.dir * l * l * k1,
            _ => hc * hc * l * k0 + 2.0 * self.dir * hc * l * l * k1 + l * l * l * k2,
        }
    }

    /// `∫_h^{h ± t} e^{l(x)} dx / e^{lh}` for `t` measured away from the higher end.
    fn rel_mass_from_high(&self, t: f64) -> f64 {
        t * k_int(0, self.alpha * t)
    }

    /// Distance `t` from the higher end enclosing relative mass `r`.
    fn solve_from_high(&self, r: f64) -> f64 {
        let t = if self.alpha == 0.0 { r } else { -(-self.alpha * r).ln_1p() / self.alpha };
        if t.is_nan() { self.len() } else { t.clamp(0.0, self.len()) }
    }
}

impl PiecewiseExpDensity {
    /// Density proportional to `exp(l(q))`, with `l` linear between `knots`.
    pub fn new(knots: Vec<f64>, log_values: Vec<f64>) -> Result<Self> {
        if knots.len() < 2 || knots.len() != log_values.len() {
            return Err(invalid_input("need at least two knots and one value per knot"));
        }
        if knots[0] != 0.0 || knots[knots.len() - 1] != 1.0 {
            return Err(invalid_input("knots must span [0,1]"));
        }
        if knots.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(invalid_input("knots must be strictly increasing"));
        }
        if log_values.iter().any(|v| !v.is_finite()) {
            return Err(invalid_input("log density values must be finite"));
        }
        let mut d = Self { knots, log_values, log_z: 0.0, seg_mass: Vec::new(), cum: Vec::new() };
        let logs: Vec<f64> = (0..d.knots.len() - 1).map(|i| d.segment(i).log_mass()).collect();
        d.log_z = log_sum_exp(&logs);
        d.seg_mass = logs.iter().map(|l| (l - d.log_z).exp()).collect();
        d.cum = std::iter::once(0.0)
            .chain(d.seg_mass.iter().scan(0.0, |acc, m| {
                *acc += m;
                Some(*acc)
            }))
            .collect();
        Ok(d)
    }

    /// `exp(−min{slope·|q − center|, cap})`, normalized on `[0,1]`.
    pub fn clipped_abs(center: f64, slope: f64, cap: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&center) {
            return Err(invalid_param(format!("center must lie in [0,1], got {center}")));
        }
        if !(slope >= 0.0 && slope.is_finite()) || !(cap >= 0.0) {
            return Err(invalid_param("slope must be finite and nonnegative, cap nonnegative"));
        }
        let mut knots = vec![0.0, center, 1.0];
        if slope > 0.0 && cap.is_finite() {
            let w = cap / slope;
            knots.extend([center - w, center + w].into_iter().filter(|x| *x > 0.0 && *x < 1.0));
        }
        knots.sort_by(f64::total_cmp);
        knots.dedup();
        let values = knots.iter().map(|q| -(slope * (q - center).abs()).min(cap)).collect();
        Self::new(knots, values)
    }

    fn segment(&self, i: usize) -> Segment {
        let (a, b) = (self.knots[i], self.knots[i + 1]);
        let (la, lb) = (self.log_values[i], self.log_values[i + 1]);
        let alpha = if b > a { (la - lb).abs() / (b - a) } else { 0.0 };
        if la >= lb {
            Segment { a, b, h: a, lh: la, dir: 1.0, alpha }
        } else {
            Segment { a, b, h: b, lh: lb, dir: -1.0, alpha }
        }
    }

    fn locate(&self, q: f64) -> usize {
        match self.knots.binary_search_by(|k| k.total_cmp(&q)) {
            Ok(i) => i.min(self.knots.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.knots.len() - 2),
        }
    }

    fn unnormalized_log(&self, q: f64) -> f64 {
        let i = self.locate(q);
        let (a, b) = (self.knots[i], self.knots[i + 1]);
        let t = (q - a) / (b - a);
        self.log_values[i] + t * (self.log_values[i + 1] - self.log_values[i])
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn log_values(&self) -> &[f64] {
        &self.log_values
    }

    pub fn log_normalizer(&self) -> f64 {
        self.log_z
    }

    pub fn log_density(&self, q: f64) -> f64 {
        if !(0.0..=1.0).contains(&q) {
            return f64::NEG_INFINITY;
        }
        self.unnormalized_log(q) - self.log_z
    }

    pub fn evaluate(&self, q: f64) -> f64 {
        self.log_density(q).exp()
    }

    pub fn cdf(&self, q: f64) -> f64 {
        if q <= 0.0 {
            return 0.0;
        }
        if q >= 1.0 {
            return 1.0;
        }
        let i = self.locate(q);
        let s = self.segment(i);
        let scale = (s.lh - self.log_z).exp();
        let within = if s.dir > 0.0 {
            scale * s.rel_mass_from_high(q - s.a)
        } else {
            self.seg_mass[i] - scale * s.rel_mass_from_high(s.b - q)
        };
        (self.cum[i] + within).clamp(0.0, 1.0)
    }

    pub fn inverse_cdf(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        let mut i = self.cum.partition_point(|c| *c <= u).saturating_sub(1);
        i = i.min(self.seg_mass.len() - 1);
        while i > 0 && self.seg_mass[i] == 0.0 {
            i -= 1;
        }
        let s = self.segment(i);
        let target = (u - self.cum[i]).clamp(0.0, self.seg_mass[i]);
        let scale = (self.log_z - s.lh).exp();
        if s.dir > 0.0 {
            s.a + s.solve_from_high(target * scale)
        } else {
            s.b - s.solve_from_high((self.seg_mass[i] - target) * scale)
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.inverse_cdf(open_unit(rng))
    }

    /// `E[(X − c)^j]` for `j ≤ 2`, in closed form.
    pub fn moment_about(&self, c: f64, j: u32) -> f64 {
        assert!(j <= 2, "only moments up to order two are available");
        (0..self.seg_mass.len()).map(|i| self.segment(i).moment(c, j, self.log_z)).sum()
    }

    pub fn mean(&self) -> f64 {
        self.moment_about(0.0, 1)
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.moment_about(m, 2)
    }

    /// Density proportional to `min_i exp(offset_i) · f_i(q)` over normalized
    /// inputs `f_i`.
    pub fn lower_envelope(parts: &[(f64, &PiecewiseExpDensity)]) -> Result<Self> {
        let mut iter = parts.iter();
        let (off, first) = iter.next().ok_or_else(|| invalid_input("envelope of no densities"))?;
        let mut knots = first.knots.clone();
        let mut vals: Vec<f64> = first.log_values.iter().map(|v| v - first.log_z + off).collect();
        for (off, d) in iter {
            let other: Vec<f64> = d.log_values.iter().map(|v| v - d.log_z + off).collect();
            (knots, vals) = min_piecewise_linear(&knots, &vals, &d.knots, &other);
        }
        Self::new(knots, vals)
    }
}

fn interp(knots: &[f64], vals: &[f64], q: f64) -> f64 {
    let i = knots.partition_point(|k| *k <= q).clamp(1, knots.len() - 1) - 1;
    let t = (q - knots[i]) / (knots[i + 1] - knots[i]);
    vals[i] + t * (vals[i + 1] - vals[i])
}

/// Pointwise minimum of two piecewise-linear functions on `[0,1]`, with
/// crossing points inserted and collinear knots dropped.
fn min_piecewise_linear(k1: &[f64], v1: &[f64], k2: &[f64], v2: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut merged: Vec<f64> = k1.iter().chain(k2).copied().collect();
    merged.sort_by(f64::total_cmp);
    merged.dedup();
    let f: Vec<f64> = merged.iter().map(|&q| interp(k1, v1, q)).collect();
    let g: Vec<f64> = merged.iter().map(|&q| interp(k2, v2, q)).collect();
    let mut knots = vec![merged[0]];
    let mut vals = vec![f[0].min(g[0])];
    for i in 0..merged.len() - 1 {
        let (d0, d1) = (f[i] - g[i], f[i + 1] - g[i + 1]);
        if d0 * d1 < 0.0 {
            let x = merged[i] + (merged[i + 1] - merged[i]) * d0 / (d0 - d1);
            if x > merged[i] && x < merged[i + 1] {
                knots.push(x);
                vals.push(interp(k1, v1, x).min(interp(k2, v2, x)));
            }
        }
        knots.push(merged[i + 1]);
        vals.push(f[i + 1].min(g[i + 1]));
    }
    // drop interior knots that sit on the chord of their neighbours
    let mut out_k = vec![knots[0]];
    let mut out_v = vec![vals[0]];
    for i in 1..knots.len() - 1 {
        let (pk, pv) = (out_k[out_k.len() - 1], out_v[out_v.len() - 1]);
        let chord = pv + (vals[i + 1] - pv) * (knots[i] - pk) / (knots[i + 1] - pk);
        if (chord - vals[i]).abs() > 1e-14 * (1.0 + vals[i].abs()) {
            out_k.push(knots[i]);
            out_v.push(vals[i]);
        }
    }
    out_k.push(knots[knots.len() - 1]);
    out_v.push(vals[vals.len() - 1]);
    (out_k, out_v)
}

/// `r_n = n^{3/2} / (max{√ρ, √(ln n / n)} · √(ln n))`.
pub fn truncation_rate(n: usize, rho: f64) -> f64 {
    let nf = n as f64;
    let ln = nf.ln();
    nf.powf(1.5) / (rho.sqrt().max((ln / nf).sqrt()) * ln.sqrt())
}

/// Density on `[0,1]` proportional to
/// `exp(−(ε/2)(1/(8C)) · min{r_n |center − q|, n})`.
pub fn truncated_laplace_density(center: f64, epsilon: f64, c: f64, rho: f64, n: usize) -> Result<PiecewiseExpDensity> {
    if !(c > 48.0) {
        return Err(invalid_param(format!("C must exceed 48, got {c}")));
    }
    if n < 3 {
        return Err(invalid_param(format!("n must be at least 3, got {n}")));
    }
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(invalid_param(format!("epsilon must be positive and finite, got {epsilon}")));
    }
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(invalid_param(format!("rho must lie in (0,1], got {rho}")));
    }
    let a = epsilon / 2.0 / (8.0 * c);
    PiecewiseExpDensity::clipped_abs(center, a * truncation_rate(n, rho), a * n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use proptest::prelude::*;

    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let whole = (b - a) / 6.0 * (f(a) + 4.0 * f(m) + f(b));
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let left = (m - a) / 6.0 * (f(a) + 4.0 * f(lm) + f(m));
        let right = (b - m) / 6.0 * (f(m) + 4.0 * f(rm) + f(b));
        if depth == 0 || (left + right - whole).abs() < 15.0 * tol {
            left + right + (left + right - whole) / 15.0
        } else {
            simpson(f, a, m, tol / 2.0, depth - 1) + simpson(f, m, b, tol / 2.0, depth - 1)
        }
    }

    fn quad(f: &dyn Fn(f64) -> f64, knots: &[f64]) -> f64 {
        knots.windows(2).map(|w| simpson(f, w[0], w[1], 1e-14, 40)).sum()
    }

    #[test]
    fn integrates_to_one() {
        for (center, eps, rho, n) in [(0.5, 1.0, 0.5, 256), (0.02, 1.0, 1.0, 10), (0.9, 3.0, 0.1, 64), (0.5, 1.0, 0.5, 4)] {
            let d = truncated_laplace_density(center, eps, 49.0, rho, n).unwrap();
            let total = quad(&|q| d.evaluate(q), &[0.0, 0.25, 0.5, 0.75, 1.0]);
            assert!((total - 1.0).abs() < 1e-10, "{total}");
            assert!((d.cdf(1.0) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn symmetric_and_flat_tail() {
        let n = 256;
        let d = truncated_laplace_density(0.5, 1.0, 49.0, 0.5, n).unwrap();
        for delta in [0.0001, 0.003, 0.2, 0.5] {
            assert!((d.log_density(0.5 + delta) - d.log_density(0.5 - delta)).abs() < 1e-12);
        }
        let w = n as f64 / truncation_rate(n, 0.5);
        assert!(w < 0.3);
        assert!((d.log_density(0.5 + w + 0.01) - d.log_density(0.5 + w + 0.1)).abs() < 1e-12);
        let flat = 0.5 / (8.0 * 49.0) * n as f64;
        assert!((d.log_density(0.5) - d.log_density(0.99) - flat).abs() < 1e-12);
    }

    #[test]
    fn parameter_checks() {
        assert!(truncated_laplace_density(0.5, 1.0, 48.0, 0.5, 10).is_err());
        assert!(truncated_laplace_density(0.5, 1.0, 49.0, 0.5, 2).is_err());
        assert!(truncated_laplace_density(1.5, 1.0, 49.0, 0.5, 10).is_err());
    }

    #[test]
    fn cdf_inverse_roundtrip() {
        let d = PiecewiseExpDensity::new(vec![0.0, 0.3, 0.31, 0.8, 1.0], vec![0.0, 2.0, -40.0, 1.0, 1.0]).unwrap();
        for u in [0.0, 1e-9, 0.1, 0.4, 0.5, 0.77, 0.999999, 1.0] {
            assert!((d.cdf(d.inverse_cdf(u)) - u).abs() < 1e-12, "u={u}");
        }
        // q in (0.3, 0.6) carries almost no mass and cannot be
        // resolved through u
        for q in [0.0, 0.05, 0.3, 0.75, 0.9, 1.0] {
            assert!((d.inverse_cdf(d.cdf(q)) - q).abs() < 1e-9, "q={q}");
        }
        let num = quad(&|x| d.evaluate(x), &[0.0, 0.3, 0.31, 0.6]);
        assert!((d.cdf(0.6) - num).abs() < 1e-10);
    }

    #[test]
    fn moments_match_quadrature() {
        let d = truncated_laplace_density(0.4, 1.0, 49.0, 1.0, 12).unwrap();
        let knots = d.knots().to_vec();
        let m1 = quad(&|x| x * d.evaluate(x), &knots);
        let m2 = quad(&|x| (x - 0.4) * (x - 0.4) * d.evaluate(x), &knots);
        assert!((d.mean() - m1).abs() < 1e-10);
        assert!((d.moment_about(0.4, 2) - m2).abs() < 1e-10);
        assert!((d.moment_about(0.7, 0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sampling_matches_mean() {
        let d = PiecewiseExpDensity::clipped_abs(0.3, 9.0, f64::INFINITY).unwrap();
        let mut rng = stream(17);
        let draws = 100_000;
        let xs: Vec<f64> = (0..draws).map(|_| d.sample(&mut rng)).collect();
        let mean = xs.iter().sum::<f64>() / draws as f64;
        let sd = (d.variance() / draws as f64).sqrt();
        assert!((mean - d.mean()).abs() < 4.0 * sd);
        assert!(xs.iter().all(|x| (0.0..=1.0).contains(x)));
    }

    #[test]
    fn envelope_is_pointwise_min() {
        let a = PiecewiseExpDensity::clipped_abs(0.2, 5.0, 2.0).unwrap();
        let b = PiecewiseExpDensity::clipped_abs(0.7, 8.0, 3.0).unwrap();
        let env = PiecewiseExpDensity::lower_envelope(&[(0.0, &a), (0.5, &b)]).unwrap();
        let shift = env.log_normalizer();
        for i in 0..=1000 {
            let q = i as f64 / 1000.0;
            let want = a.log_density(q).min(0.5 + b.log_density(q));
            assert!((env.log_density(q) + shift - want).abs() < 1e-12, "q={q}");
        }
    }

    proptest! {
        #[test]
        fn clipped_abs_is_subadditive(a in 0.0f64..100.0, b in 0.0f64..100.0, x in -10.0f64..10.0, y in -10.0f64..10.0) {
            let g = |t: f64| (a * t.abs()).min(b);
            prop_assert!(g(x + y) <= g(x) + g(y) + 1e-12 * (1.0 + g(x) + g(y)));
        }

        #[test]
        fn center_shift_ratio(e1 in 0.0f64..1.0, e2 in 0.0f64..1.0, q in 0.0f64..1.0, n in 3usize..300) {
            let (eps, c, rho) = (1.0, 49.0, 0.5);
            let d1 = truncated_laplace_density(e1, eps, c, rho, n).unwrap();
            let d2 = truncated_laplace_density(e2, eps, c, rho, n).unwrap();
            let bound = eps / 2.0 / (8.0 * c) * (truncation_rate(n, rho) * (e1 - e2).abs()).min(n as f64);
            // the exponent moves by at most the bound; the normalizers by at most as much again
            let expo = (d1.log_density(q) + d1.log_normalizer()) - (d2.log_density(q) + d2.log_normalizer());
            prop_assert!(expo <= bound + 1e-12);
            prop_assert!(d1.log_density(q) - d2.log_density(q) <= 2.0 * bound + 1e-12);
        }
    }
}
