use rand::Rng;

use crate::error::{invalid_param, Result};
use crate::rng::open_unit;

/// One draw from `Lap(scale)` by inverting the CDF.
pub fn sample_laplace<R: Rng + ?Sized>(scale: f64, rng: &mut R) -> Result<f64> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(invalid_param(format!("Laplace scale must be positive and finite, got {scale}")));
    }
    let u = open_unit(rng) - 0.5;
    Ok(-scale * u.signum() * (-2.0 * u.abs()).ln_1p())
}

pub fn laplace_log_density(x: f64, center: f64, scale: f64) -> f64 {
    -(x - center).abs() / scale - (2.0 * scale).ln()
}

pub fn laplace_cdf(x: f64, center: f64, scale: f64) -> f64 {
    let z = (x - center) / scale;
    if z < 0.0 {
        0.5 * z.exp()
    } else {
        1.0 - 0.5 * (-z).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn moments() {
        let mut rng = stream(21);
        let draws: Vec<f64> = (0..1_000_000).map(|_| sample_laplace(1.0, &mut rng).unwrap()).collect();
        let mean = draws.iter().sum::<f64>() / draws.len() as f64;
        let var = draws.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / draws.len() as f64;
        assert!((var - 2.0).abs() < 0.02, "{var}");
        let mut sorted = draws;
        sorted.sort_by(f64::total_cmp);
        assert!(sorted[sorted.len() / 2].abs() < 0.01);
    }

    #[test]
    fn deterministic_and_validated() {
        let a = sample_laplace(0.3, &mut stream(4)).unwrap();
        let b = sample_laplace(0.3, &mut stream(4)).unwrap();
        assert_eq!(a, b);
        assert!(sample_laplace(0.0, &mut stream(4)).is_err());
        assert!(sample_laplace(-1.0, &mut stream(4)).is_err());
    }

    #[test]
    fn cdf_matches_density() {
        let (c, b) = (0.2, 0.7);
        let h = 1e-5;
        for x in [-1.0, 0.0, 0.19, 0.9] {
            let num = (laplace_cdf(x + h, c, b) - laplace_cdf(x - h, c, b)) / (2.0 * h);
            assert!((num - laplace_log_density(x, c, b).exp()).abs() < 1e-6);
        }
    }
}
