use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::density::{homogeneity_membership, HomogeneityConfig};
use crate::error::{invalid_param, Result};
use crate::graph::{node_distance, pair_count, GraphSpaceIterator, LabeledGraph};
use crate::graphon::{gnm_pmf, rewired_model_pmf_full, sample_gnm_rewired_coupled, sample_w_random, BlockMatrix, StepGraphon};
use crate::rng::substream;

/// Largest `n` for the pmf comparison and exact total variation.
pub const MAX_EXACT_MODEL_N: usize = 5;
/// Bins with smaller expected counts are pooled before the chi-square test.
pub const MIN_EXPECTED_COUNT: f64 = 5.0;

const EXPERIMENT_COUPLING: u64 = 0xC0;
const EXPERIMENT_HOMOGENEITY: u64 = 0x40;

#[derive(Debug, Clone, Serialize)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    pub bins: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct DistinguishabilityReport {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub trials: usize,
    /// Samples whose rewired graph is farther than one rewiring from the
    /// first stage; zero by construction.
    pub structural_violations: usize,
    pub max_stage_distance: usize,
    pub chi_square: Option<ChiSquareTest>,
    /// `TV(G(n,m), rewired model)`, exact.
    pub total_variation: Option<f64>,
    pub warnings: Vec<String>,
}

/// Exact total variation between `G(n,m)` and the rewired `G(n,m+k)` model.
pub fn exact_total_variation(n: usize, m: usize, k: usize) -> Result<f64> {
    if n > MAX_EXACT_MODEL_N {
        return Err(invalid_param(format!("exact total variation needs n <= {MAX_EXACT_MODEL_N}, got {n}")));
    }
    let half_l1 = GraphSpaceIterator::new(n)?
        .map(|g| Ok((gnm_pmf::<f64>(&g, m) - rewired_model_pmf_full::<f64>(&g, m, k)?).abs()))
        .sum::<Result<f64>>()?;
    Ok(half_l1 / 2.0)
}

/// Pearson statistic with bins pooled (in graph-code order) until each
/// expected count reaches [`MIN_EXPECTED_COUNT`]. Observations in a zero
/// probability cell make the statistic infinite.
fn chi_square(observed: &[u64], probs: &[f64], trials: usize) -> Result<ChiSquareTest> {
    let total = trials as f64;
    if observed.iter().zip(probs).any(|(&o, &p)| o > 0 && p == 0.0) {
        return Ok(ChiSquareTest { statistic: f64::INFINITY, dof: 0, p_value: 0.0, bins: 0 });
    }
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let mut acc = (0.0, 0.0);
    for (&o, &p) in observed.iter().zip(probs) {
        if p == 0.0 {
            continue;
        }
        acc = (acc.0 + o as f64, acc.1 + p * total);
        if acc.1 >= MIN_EXPECTED_COUNT {
            bins.push(acc);
            acc = (0.0, 0.0);
        }
    }
    if acc.1 > 0.0 {
        match bins.last_mut() {
            Some(last) => *last = (last.0 + acc.0, last.1 + acc.1),
            None => bins.push(acc),
        }
    }
    let statistic: f64 = bins.iter().map(|(o, e)| (o - e).powi(2) / e).sum();
    let dof = bins.len().saturating_sub(1);
    let p_value = if dof == 0 {
        1.0
    } else {
        ChiSquared::new(dof as f64).map_err(|e| invalid_param(e.to_string()))?.sf(statistic)
    };
    Ok(ChiSquareTest { statistic, dof, p_value, bins: bins.len() })
}

/// Samples the coupled two-stage model `trials` times and checks that the
/// stages differ by at most one rewiring; for `n ≤ 5` also compares the
/// empirical law with the exact pmf and reports the exact total variation
/// to `G(n,m)`.
pub fn run_distinguishability_experiment(n: usize, m: usize, k: usize, trials: usize, seed: u64) -> Result<DistinguishabilityReport> {
    if n < 2 || m + k > pair_count(n) {
        return Err(invalid_param(format!("need n >= 2 and m+k <= C(n,2), got n={n}, m={m}, k={k}")));
    }
    if trials == 0 {
        return Err(invalid_param("trials must be at least 1"));
    }
    let mut warnings = Vec::new();
    if k * k > n {
        warnings.push(format!("k={k} is not small against sqrt(n)={:.2}", (n as f64).sqrt()));
    }
    let exact = n <= MAX_EXACT_MODEL_N;
    let draws: Vec<(usize, u64)> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let s = sample_gnm_rewired_coupled(n, m, k, &mut substream(seed, EXPERIMENT_COUPLING, t, 0))?;
            let d = node_distance(&s.first_stage, &s.graph)?;
            Ok((d, if exact { s.graph.code().unwrap_or(0) } else { 0 }))
        })
        .collect::<Result<_>>()?;
    let structural_violations = draws.iter().filter(|d| d.0 > 1).count();
    let max_stage_distance = draws.iter().map(|d| d.0).max().unwrap_or(0);
    let (chi, tv) = if exact {
        let graphs: Vec<LabeledGraph> = GraphSpaceIterator::new(n)?.collect();
        let probs: Vec<f64> = graphs.iter().map(|g| rewired_model_pmf_full::<f64>(g, m, k)).collect::<Result<_>>()?;
        let mut observed = vec![0u64; graphs.len()];
        for &(_, code) in &draws {
            observed[code as usize] += 1;
        }
        (Some(chi_square(&observed, &probs, trials)?), Some(exact_total_variation(n, m, k)?))
    } else {
        (None, None)
    };
    Ok(DistinguishabilityReport {
        n,
        m,
        k,
        trials,
        structural_violations,
        max_stage_distance,
        chi_square: chi,
        total_variation: tv,
        warnings,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct HomogeneityReport {
    pub n: usize,
    pub p: f64,
    pub rho: f64,
    pub c: f64,
    pub samples: usize,
    pub outside: usize,
    pub fraction_outside: f64,
    /// Whether every membership answer came from the exact subset scan.
    pub exact: bool,
}

/// Fraction of `G(n,p)` samples outside `H_{ρ,C}`.
pub fn homogeneity_probability(n: usize, p: f64, cfg: &HomogeneityConfig, samples: usize, seed: u64) -> Result<HomogeneityReport> {
    if !(0.0..=1.0).contains(&p) || samples == 0 {
        return Err(invalid_param("need p in [0,1] and at least one sample"));
    }
    let w = StepGraphon::equal_blocks(BlockMatrix::constant(1, 1.0)?);
    let results: Vec<(bool, bool)> = (0..samples as u64)
        .into_par_iter()
        .map(|t| {
            let g = sample_w_random(&w, p, n, &mut substream(seed, EXPERIMENT_HOMOGENEITY, t, 0))?.graph;
            let m = homogeneity_membership(&g, cfg)?;
            Ok((m.member, m.exact))
        })
        .collect::<Result<_>>()?;
    let outside = results.iter().filter(|r| !r.0).count();
    Ok(HomogeneityReport {
        n,
        p,
        rho: cfg.rho,
        c: cfg.c,
        samples,
        outside,
        fraction_outside: outside as f64 / samples as f64,
        exact: results.iter().all(|r| r.1),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn total_variation_at_n4_is_below_one() {
        let tv = exact_total_variation(4, 2, 1).unwrap();
        assert!(tv > 0.0 && tv < 1.0, "{tv}");
        assert_eq!(exact_total_variation(4, 3, 0).unwrap(), 0.0);
    }

    #[test]
    fn coupled_stages_and_pmf_agree() {
        let r = run_distinguishability_experiment(5, 4, 2, 20_000, 1).unwrap();
        assert_eq!(r.structural_violations, 0);
        assert!(r.max_stage_distance <= 1);
        let chi = r.chi_square.unwrap();
        assert!(chi.p_value > 0.001, "{chi:?}");
        assert!(chi.dof > 10);
    }

    #[test]
    fn chi_square_detects_a_wrong_law() {
        let probs = [0.5, 0.5];
        assert!(chi_square(&[900, 100], &probs, 1000).unwrap().p_value < 1e-6);
        assert!(chi_square(&[500, 500], &probs, 1000).unwrap().p_value > 0.99);
        assert_eq!(chi_square(&[1, 0], &[0.0, 1.0], 1).unwrap().p_value, 0.0);
    }

    #[test]
    fn large_n_skips_exact_parts() {
        let r = run_distinguishability_experiment(30, 100, 2, 200, 4).unwrap();
        assert!(r.chi_square.is_none() && r.total_variation.is_none());
        assert_eq!(r.structural_violations, 0);
    }

    #[test]
    fn homogeneity_of_dense_random_graphs() {
        let cfg = HomogeneityConfig::new(0.5, 49.0).unwrap();
        let r = homogeneity_probability(10, 0.25, &cfg, 200, 2).unwrap();
        assert!(r.exact);
        assert!(r.fraction_outside <= 0.05);
    }
}
