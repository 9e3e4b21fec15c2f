use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid_param, resource_limit, Result};
use crate::graph::{adjacent_graphs, GraphSpaceIterator, LabeledGraph};
use crate::graphon::{equipartition_count, BlockMatrix, DEFAULT_EQUIPARTITION_BUDGET};
use crate::mech::{exponential_log_pmf, laplace_cdf, sample_laplace, FiniteMechanism};
use crate::rng::stream;
use crate::scalar::Scalar;

use super::score::{best_score, ProfileSet};

pub const DEFAULT_CANDIDATE_BUDGET: u64 = 1_000_000;
/// Largest `n` for which the score sensitivity is measured exhaustively.
pub const MAX_AUDIT_N: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SensitivityMode {
    /// `Δ = 4dμ/n²`.
    Theoretical,
    /// `Δ` measured over every adjacent pair of graphs on `n` vertices.
    Audited,
}

#[derive(Debug, Clone)]
pub struct EstimatorConfig {
    pub epsilon: f64,
    pub lambda: f64,
    pub k: usize,
    pub candidate_budget: u64,
    pub equipartition_budget: f64,
    pub restarts: usize,
    pub sensitivity_mode: SensitivityMode,
}

impl EstimatorConfig {
    pub fn new(epsilon: f64, lambda: f64, k: usize) -> Result<Self> {
        let cfg = Self {
            epsilon,
            lambda,
            k,
            candidate_budget: DEFAULT_CANDIDATE_BUDGET,
            equipartition_budget: DEFAULT_EQUIPARTITION_BUDGET,
            restarts: 20,
            sensitivity_mode: SensitivityMode::Theoretical,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn audited(mut self) -> Self {
        self.sensitivity_mode = SensitivityMode::Audited;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(invalid_param(format!("epsilon must be positive and finite, got {}", self.epsilon)));
        }
        if !(self.lambda >= 1.0 && self.lambda.is_finite()) {
            return Err(invalid_param(format!("lambda must be at least 1, got {}", self.lambda)));
        }
        if self.k == 0 {
            return Err(invalid_param("k must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrivateDensity {
    pub raw: f64,
    /// `raw` clamped to `[1/n², 1]`.
    pub clamped: f64,
}

/// `e(G) + Lap(4/(nε))`, clamped to `[1/n², 1]`.
pub fn private_density<R: Rng + ?Sized>(g: &LabeledGraph, epsilon: f64, rng: &mut R) -> Result<PrivateDensity> {
    if !(epsilon > 0.0) {
        return Err(invalid_param(format!("epsilon must be positive, got {epsilon}")));
    }
    let n = g.n();
    let e = g.edge_density()?;
    let scale = 4.0 / (n as f64 * epsilon);
    let raw = if scale.is_finite() && scale > 0.0 { e + sample_laplace(scale, rng)? } else { e };
    Ok(PrivateDensity { raw, clamped: clamp_density(raw, n) })
}

pub fn clamp_density(raw: f64, n: usize) -> f64 {
    raw.clamp(1.0 / (n * n) as f64, 1.0)
}

/// `⌊λ n ρ̂⌋`: the largest grid numerator below `μ = λρ̂` and also the
/// integer degree cap `⌊d⌋`.
pub fn grid_level(n: usize, lambda: f64, rho_hat: f64) -> usize {
    (lambda * n as f64 * rho_hat).floor().max(0.0) as usize
}

/// Symmetric `k × k` matrices with entries in `{0, 1/n, …, level/n}`,
/// indexed in lexicographic order of the upper triangle (row-major).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CandidateGrid {
    pub n: usize,
    pub k: usize,
    pub level: usize,
}

impl CandidateGrid {
    pub fn slots(&self) -> usize {
        self.k * (self.k + 1) / 2
    }

    /// `(level+1)^{k(k+1)/2}`, saturating.
    pub fn count(&self) -> u128 {
        (self.level as u128 + 1).checked_pow(self.slots() as u32).unwrap_or(u128::MAX)
    }

    pub fn numerators(&self, mut idx: usize) -> Vec<usize> {
        let base = self.level + 1;
        let mut digits = vec![0; self.slots()];
        for d in digits.iter_mut().rev() {
            *d = idx % base;
            idx /= base;
        }
        digits
    }

    pub fn index_of(&self, numerators: &[usize]) -> Option<usize> {
        let base = self.level + 1;
        numerators.iter().try_fold(0usize, |acc, &d| (d < base).then_some(acc * base + d))
    }

    pub fn matrix_in<T: Scalar>(&self, idx: usize) -> BlockMatrix<T> {
        let digits = self.numerators(idx);
        let k = self.k;
        let mut values = vec![T::zero(); k * k];
        let mut t = 0;
        for a in 0..k {
            for b in a..k {
                let v = T::ratio(digits[t], self.n);
                values[a * k + b] = v.clone();
                values[b * k + a] = v;
                t += 1;
            }
        }
        BlockMatrix::new(k, values).expect("grid matrices are symmetric and nonnegative")
    }

    pub fn matrix(&self, idx: usize) -> BlockMatrix<f64> {
        self.matrix_in(idx)
    }

    fn checked_len(&self, budget: u64) -> Result<usize> {
        let c = self.count();
        if c > budget as u128 {
            return Err(resource_limit(format!(
                "candidate set has {c} matrices ((⌊nμ⌋+1)^(k(k+1)/2) with ⌊nμ⌋={}, k={}), budget is {budget}",
                self.level, self.k
            )));
        }
        Ok(c as usize)
    }
}

/// Best score of every candidate against `degree_cap(G, grid.level)`.
pub fn candidate_scores<R: Rng + ?Sized>(g: &LabeledGraph, grid: &CandidateGrid, cfg: &EstimatorConfig, rng: &mut R) -> Result<(Vec<f64>, bool)> {
    scores_against(&g.degree_cap(grid.level), grid, cfg, rng)
}

fn scores_against<R: Rng + ?Sized>(a: &LabeledGraph, grid: &CandidateGrid, cfg: &EstimatorConfig, rng: &mut R) -> Result<(Vec<f64>, bool)> {
    let len = grid.checked_len(cfg.candidate_budget)?;
    if equipartition_count(a.n(), grid.k) <= cfg.equipartition_budget {
        let set = ProfileSet::build(a, grid.k)?;
        let scores = (0..len).into_par_iter().map(|i| set.best(&grid.matrix(i)).0).collect();
        return Ok((scores, true));
    }
    let base: u64 = rng.gen();
    let scores = (0..len)
        .into_par_iter()
        .map(|i| {
            let mut r = stream(base ^ i as u64);
            best_score(&grid.matrix(i), a, cfg.equipartition_budget, cfg.restarts, &mut r).map(|b| b.value)
        })
        .collect::<Result<_>>()?;
    Ok((scores, false))
}

/// Exponential mechanism with coefficient `ε/(4Δ)`; for `Δ = 0` the uniform
/// law on the maximizers (scores then agree on every input).
pub fn block_mechanism(scores: &[f64], epsilon: f64, delta: f64) -> Result<FiniteMechanism> {
    if delta > 0.0 {
        return exponential_log_pmf(scores, epsilon / (4.0 * delta));
    }
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    FiniteMechanism::from_log_weights(scores.iter().map(|&s| if s == max { 0.0 } else { f64::NEG_INFINITY }).collect())
}

#[derive(Debug, Clone, Serialize)]
pub struct BlockEstimate {
    pub rho_hat: f64,
    pub rho_hat_raw: f64,
    /// `λρ̂`.
    pub mu: f64,
    /// `⌊λnρ̂⌋`: grid level and degree cap.
    pub level: usize,
    #[serde(skip)]
    pub b_hat: BlockMatrix<f64>,
    pub delta: f64,
    pub sensitivity_mode: SensitivityMode,
    pub score: f64,
    pub candidate_count: usize,
    pub exact_scores: bool,
    /// Candidates whose capped score exceeds the uncapped best score.
    pub extension_violations: usize,
}

impl BlockEstimate {
    /// `B̂ / ρ̂`.
    pub fn normalized(&self) -> BlockMatrix<f64> {
        self.b_hat.scaled(&(1.0 / self.rho_hat))
    }
}

/// Private block estimation: noisy density with `ε/2`, then the exponential
/// mechanism over `B_μ` scored against the degree-capped graph.
pub fn estimate_blocks<R: Rng + ?Sized>(g: &LabeledGraph, cfg: &EstimatorConfig, rng: &mut R) -> Result<BlockEstimate> {
    cfg.validate()?;
    let n = g.n();
    let pd = private_density(g, cfg.epsilon / 2.0, rng)?;
    let rho_hat = pd.clamped;
    let level = grid_level(n, cfg.lambda, rho_hat);
    let grid = CandidateGrid { n, k: cfg.k, level };
    let len = grid.checked_len(cfg.candidate_budget)?;
    let (scores, exact) = candidate_scores(g, &grid, cfg, rng)?;
    let extension_violations = if g.max_degree() > level {
        let (uncapped, _) = scores_against(g, &grid, cfg, rng)?;
        scores.iter().zip(&uncapped).filter(|(c, u)| c > u).count()
    } else {
        0
    };
    let delta = match cfg.sensitivity_mode {
        SensitivityMode::Theoretical => 4.0 * cfg.lambda * cfg.lambda * rho_hat * rho_hat / n as f64,
        SensitivityMode::Audited => audited_delta(n, &grid, cfg)?,
    };
    let mech = block_mechanism(&scores, cfg.epsilon, delta)?;
    let pick = mech.sample(rng);
    Ok(BlockEstimate {
        rho_hat,
        rho_hat_raw: pd.raw,
        mu: cfg.lambda * rho_hat,
        level,
        b_hat: grid.matrix(pick),
        delta,
        sensitivity_mode: cfg.sensitivity_mode,
        score: scores[pick],
        candidate_count: len,
        exact_scores: exact,
        extension_violations,
    })
}

/// Capped scores of every graph on `n` vertices, indexed by graph code.
fn score_table(n: usize, grid: &CandidateGrid, cfg: &EstimatorConfig) -> Result<Vec<Vec<f64>>> {
    if n > MAX_AUDIT_N {
        return Err(resource_limit(format!("exhaustive sensitivity audit needs n <= {MAX_AUDIT_N}, got {n}")));
    }
    let graphs: Vec<LabeledGraph> = GraphSpaceIterator::new(n)?.collect();
    graphs
        .par_iter()
        .map(|g| {
            let mut r = stream(g.code().unwrap_or(0));
            candidate_scores(g, grid, cfg, &mut r).map(|s| s.0)
        })
        .collect()
}

fn max_adjacent_gap(n: usize, table: &[Vec<f64>]) -> Result<f64> {
    let graphs: Vec<LabeledGraph> = GraphSpaceIterator::new(n)?.collect();
    let gaps = graphs
        .par_iter()
        .map(|g| {
            let i = g.code().expect("small graph") as usize;
            let mut worst = 0.0f64;
            for h in adjacent_graphs(g)? {
                let j = h.code().expect("small graph") as usize;
                for (a, b) in table[i].iter().zip(&table[j]) {
                    worst = worst.max((a - b).abs());
                }
            }
            Ok(worst)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(gaps.into_iter().fold(0.0, f64::max))
}

/// Largest change of any candidate's capped score between graphs at node
/// distance one, over all graphs on `n` vertices.
pub fn audited_delta(n: usize, grid: &CandidateGrid, cfg: &EstimatorConfig) -> Result<f64> {
    let table = score_table(n, grid, cfg)?;
    max_adjacent_gap(n, &table)
}

/// Exact output law of the audited-sensitivity estimator on `n ≤ 6`
/// vertices, with everything that depends on `ρ̂` factored through the
/// level `⌊λnρ̂⌋`.
#[derive(Debug, Clone)]
pub struct AuditedBlockMechanism {
    pub n: usize,
    pub cfg: EstimatorConfig,
    pub levels: Vec<LevelLaw>,
}

#[derive(Debug, Clone)]
pub struct LevelLaw {
    pub grid: CandidateGrid,
    pub delta: f64,
    /// Conditional law of `B̂` per graph code.
    pub laws: Vec<FiniteMechanism>,
}

impl AuditedBlockMechanism {
    pub fn build(n: usize, cfg: &EstimatorConfig) -> Result<Self> {
        cfg.validate()?;
        let top = grid_level(n, cfg.lambda, 1.0);
        let levels = (0..=top)
            .map(|level| {
                let grid = CandidateGrid { n, k: cfg.k, level };
                let table = score_table(n, &grid, cfg)?;
                let delta = max_adjacent_gap(n, &table)?;
                let laws = table.iter().map(|s| block_mechanism(s, cfg.epsilon, delta)).collect::<Result<_>>()?;
                Ok(LevelLaw { grid, delta, laws })
            })
            .collect::<Result<_>>()?;
        Ok(Self { n, cfg: cfg.clone(), levels })
    }

    /// Candidate grid at the top level; every level's grid embeds in it.
    pub fn output_grid(&self) -> CandidateGrid {
        self.levels.last().expect("at least level 0").grid
    }

    /// `P(⌊λnρ̂⌋ = j | G)` for every level `j`.
    pub fn level_probabilities(&self, g: &LabeledGraph) -> Result<Vec<f64>> {
        let n = self.n;
        let e = g.edge_density()?;
        let scale = 4.0 / (n as f64 * self.cfg.epsilon / 2.0);
        let floor = 1.0 / (n * n) as f64;
        // P(ρ̂ < x) for the clamped density
        let below = |x: f64| {
            if x <= floor {
                0.0
            } else if x > 1.0 {
                1.0
            } else {
                laplace_cdf(x, e, scale)
            }
        };
        let ln = self.cfg.lambda * n as f64;
        Ok((0..self.levels.len())
            .map(|j| {
                let hi = if j + 1 == self.levels.len() { f64::INFINITY } else { (j + 1) as f64 / ln };
                below(hi) - below(j as f64 / ln)
            })
            .collect())
    }

    /// Log-probability of each output-grid matrix, marginal over `ρ̂`.
    pub fn marginal_log_pmf(&self, g: &LabeledGraph) -> Result<Vec<f64>> {
        let out = self.output_grid();
        let len = out.count() as usize;
        let mut p = vec![0.0; len];
        let code = g.code().expect("small graph") as usize;
        for (law, w) in self.levels.iter().zip(self.level_probabilities(g)?) {
            if w == 0.0 {
                continue;
            }
            for (i, lp) in law.laws[code].log_pmf().iter().enumerate() {
                let idx = out.index_of(&law.grid.numerators(i)).expect("grids are nested");
                p[idx] += w * lp.exp();
            }
        }
        Ok(p.into_iter().map(f64::ln).collect())
    }

    pub fn conditional(&self, level: usize, g: &LabeledGraph) -> &FiniteMechanism {
        &self.levels[level].laws[g.code().expect("small graph") as usize]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphon::delta2_hat_blocks;
    use crate::rng::stream;

    #[test]
    fn private_density_examples() {
        let g = LabeledGraph::from_edges(5, [(0, 1), (2, 3)]).unwrap();
        let pd = private_density(&g, 1e300, &mut stream(1)).unwrap();
        assert!((pd.clamped - 0.2).abs() < 1e-12);
        let e = private_density(&LabeledGraph::empty(6), 1e300, &mut stream(1)).unwrap();
        assert_eq!(e.clamped, 1.0 / 36.0);
        let mut rng = stream(2);
        let trials = 100_000;
        let mean = (0..trials).map(|_| private_density(&g, 1.0, &mut rng).unwrap().raw).sum::<f64>() / trials as f64;
        let sd = (2.0 * (4.0 / 5.0f64).powi(2) / trials as f64).sqrt();
        assert!((mean - 0.2).abs() < 3.0 * sd);
    }

    #[test]
    fn grid_indexing() {
        let grid = CandidateGrid { n: 4, k: 2, level: 3 };
        assert_eq!(grid.count(), 64);
        for i in 0..64 {
            assert_eq!(grid.index_of(&grid.numerators(i)), Some(i));
        }
        let m = grid.matrix(1 * 16 + 2 * 4 + 3);
        assert_eq!((m.get(0, 0), m.get(0, 1), m.get(1, 1)), (&0.25, &0.5, &0.75));
        let big = CandidateGrid { n: 100, k: 5, level: 100 };
        assert!(big.checked_len(DEFAULT_CANDIDATE_BUDGET).unwrap_err().to_string().contains(&big.count().to_string()));
    }

    #[test]
    fn recovers_exact_block_graph() {
        // two 6-cliques aligned with an equipartition
        let mut edges = Vec::new();
        for c in [0, 6] {
            for u in c..c + 6 {
                for v in u + 1..c + 6 {
                    edges.push((u, v));
                }
            }
        }
        let g = LabeledGraph::from_edges(12, edges).unwrap();
        let cfg = EstimatorConfig::new(1e6, 2.0, 2).unwrap();
        let est = estimate_blocks(&g, &cfg, &mut stream(3)).unwrap();
        // best diagonal value with a zero diagonal is 30/36 = 10/12
        assert_eq!(est.b_hat.get(0, 0), &(10.0 / 12.0));
        assert_eq!(est.b_hat.get(0, 1), &0.0);
        let w = BlockMatrix::new(2, vec![2.0, 0.0, 0.0, 2.0]).unwrap();
        assert!(delta2_hat_blocks(&est.normalized(), &w).unwrap() <= 1.0 / 12.0 + 1.0 / 12.0);
        assert_eq!(est.extension_violations, 0);
    }

    #[test]
    fn k1_picks_grid_point_near_density() {
        let g = LabeledGraph::from_edges(6, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (0, 5), (0, 3)]).unwrap();
        let cfg = EstimatorConfig::new(1e6, 2.0, 1).unwrap();
        let est = estimate_blocks(&g, &cfg, &mut stream(4)).unwrap();
        // score (2b·14 − 36b²)/36 peaks at b = 14/36, nearest sixth is 2/6
        assert_eq!(est.b_hat.get(0, 0), &(2.0 / 6.0));
    }

    #[test]
    fn empty_graph_small_epsilon_runs() {
        let cfg = EstimatorConfig::new(0.1, 1.0, 2).unwrap();
        let est = estimate_blocks(&LabeledGraph::empty(5), &cfg, &mut stream(5)).unwrap();
        assert!(est.rho_hat >= 1.0 / 25.0 && est.rho_hat <= 1.0);
        assert!(est.b_hat.max_entry() <= est.mu + 1e-12);
    }

    #[test]
    fn audit_sensitivity_small_cases() {
        let cfg = EstimatorConfig::new(1.0, 2.0, 2).unwrap();
        // level 0: only the zero matrix, and every graph caps to empty
        assert_eq!(audited_delta(4, &CandidateGrid { n: 4, k: 2, level: 0 }, &cfg).unwrap(), 0.0);
        let d = audited_delta(4, &CandidateGrid { n: 4, k: 2, level: 3 }, &cfg).unwrap();
        assert!(d > 0.0);
        // theoretical bound 4dμ/n² at d = 3, μ = 3/4
        assert!(d <= 4.0 * 3.0 * 0.75 / 16.0 + 1e-12);
        assert!(audited_delta(7, &CandidateGrid { n: 7, k: 2, level: 1 }, &cfg).is_err());
    }

    #[test]
    fn level_probabilities_sum_to_one() {
        let cfg = EstimatorConfig::new(1.0, 2.0, 2).unwrap().audited();
        let mech = AuditedBlockMechanism::build(4, &cfg).unwrap();
        for code in [0u64, 5, 63] {
            let g = LabeledGraph::from_code(4, code);
            let p = mech.level_probabilities(&g).unwrap();
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            let total: f64 = mech.marginal_log_pmf(&g).unwrap().iter().map(|l| l.exp()).sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn grid_monotone_in_mu() {
        let g = LabeledGraph::from_edges(6, [(0, 1), (1, 2), (3, 4)]).unwrap();
        let cfg = EstimatorConfig::new(1.0, 2.0, 2).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for level in 0..6 {
            let grid = CandidateGrid { n: 6, k: 2, level };
            let (s, _) = scores_against(&g, &grid, &cfg, &mut stream(0)).unwrap();
            let m = s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            assert!(m >= prev);
            prev = m;
        }
    }
}
