use rayon::prelude::*;
use serde::Serialize;

use crate::block::{AuditedBlockMechanism, CandidateGrid, EstimatorConfig, ProfileSet, MAX_AUDIT_N};
use crate::density::{ExtendedDensityMechanism, HomogeneityConfig};
use crate::error::{invalid_param, resource_limit, Result};
use crate::graph::{adjacent_graphs, GraphSpaceIterator, LabeledGraph};
use crate::mech::{
    dp_audit_densities, graph_space, laplace_log_density, log_density_table, uniform_grid, AuditReport, MetricSpace,
    PairScope, AUDIT_TOLERANCE,
};

/// Output grid size for continuous-density audits.
pub const DENSITY_GRID_POINTS: usize = 1000;
/// Largest `n` for continuous-density audits.
pub const MAX_DENSITY_AUDIT_N: usize = 5;
/// Largest `n` for the exact block-mechanism audit.
pub const MAX_BLOCK_AUDIT_N: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub enum AuditMechanism {
    /// `e(G) + Lap(scale_factor · 4/(nε))`; factor 1 is the baseline.
    Laplace { scale_factor: f64 },
    /// Exact extension of the truncated Laplace mechanism with base budget ε/2.
    ExtendedDensity { cfg: HomogeneityConfig },
    /// Block estimator with audited sensitivity.
    Blocks { lambda: f64, k: usize },
}

impl AuditMechanism {
    pub fn label(&self) -> &'static str {
        match self {
            Self::Laplace { .. } => "laplace",
            Self::ExtendedDensity { .. } => "extended-density",
            Self::Blocks { .. } => "blocks",
        }
    }
}

/// One audited law of an exhaustive audit.
#[derive(Debug, Clone)]
pub struct AuditComponent {
    pub name: String,
    pub report: AuditReport,
}

#[derive(Debug, Clone)]
pub struct ExhaustiveAudit {
    pub mechanism: &'static str,
    pub n: usize,
    pub epsilon: f64,
    pub components: Vec<AuditComponent>,
}

impl ExhaustiveAudit {
    pub fn max_violation(&self) -> f64 {
        self.components.iter().map(|c| c.report.max_violation).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn passes(&self) -> bool {
        self.max_violation() <= AUDIT_TOLERANCE
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for c in &self.components {
            out.push_str(&format!("# component={} epsilon={}\n", c.name, c.report.epsilon));
            out.push_str(&c.report.to_csv());
        }
        out
    }
}

/// Grid for Laplace audits: the mass lives on the whole real line, so the
/// grid extends one unit past `[0,1]` on each side.
fn laplace_grid() -> Vec<f64> {
    uniform_grid(DENSITY_GRID_POINTS).into_iter().map(|q| 3.0 * q - 1.0).collect()
}

/// Enumerates every graph on `n` vertices and checks the output-law ratios
/// against `exp(ε·d_v)` for every ordered pair (continuous densities) or every
/// adjacent pair (finite outputs; the node distance is a path metric, so
/// adjacent pairs suffice there).
pub fn audit_dp_exhaustive(mech: &AuditMechanism, n: usize, epsilon: f64) -> Result<ExhaustiveAudit> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(invalid_param(format!("epsilon must be positive and finite, got {epsilon}")));
    }
    let components = match mech {
        AuditMechanism::Laplace { scale_factor } => {
            density_limit(n)?;
            let space = graph_space(n, |_| true)?;
            let scale = scale_factor * 4.0 / (n as f64 * epsilon);
            let grid = laplace_grid();
            let table: Vec<Vec<f64>> = space
                .points()
                .par_iter()
                .map(|g| {
                    let e = g.edge_density()?;
                    Ok(grid.iter().map(|&q| laplace_log_density(q, e, scale)).collect())
                })
                .collect::<Result<_>>()?;
            vec![AuditComponent {
                name: "output".into(),
                report: dp_audit_densities(&space, &table, &grid, epsilon, density_scope(n))?,
            }]
        }
        AuditMechanism::ExtendedDensity { cfg } => {
            density_limit(n)?;
            let m = ExtendedDensityMechanism::build(n, epsilon, cfg)?;
            let grid = uniform_grid(DENSITY_GRID_POINTS);
            let table = log_density_table(&m.densities, &grid);
            vec![AuditComponent {
                name: "output".into(),
                report: dp_audit_densities(&m.space, &table, &grid, epsilon, density_scope(n))?,
            }]
        }
        AuditMechanism::Blocks { lambda, k } => {
            if n > MAX_BLOCK_AUDIT_N {
                return Err(resource_limit(format!("block audit needs n <= {MAX_BLOCK_AUDIT_N}, got {n}")));
            }
            let cfg = EstimatorConfig::new(epsilon, *lambda, *k)?.audited();
            audit_blocks(&AuditedBlockMechanism::build(n, &cfg)?)?
        }
    };
    Ok(ExhaustiveAudit { mechanism: mech.label(), n, epsilon, components })
}

fn density_limit(n: usize) -> Result<()> {
    if n > MAX_DENSITY_AUDIT_N {
        return Err(resource_limit(format!("density audit needs n <= {MAX_DENSITY_AUDIT_N}, got {n}")));
    }
    Ok(())
}

fn density_scope(n: usize) -> PairScope {
    if n <= 4 {
        PairScope::All
    } else {
        PairScope::Adjacent
    }
}

/// Conditional laws given the level at ε/2 and the marginal law of `B̂` at ε.
fn audit_blocks(mech: &AuditedBlockMechanism) -> Result<Vec<AuditComponent>> {
    let eps = mech.cfg.epsilon;
    let space = graph_space(mech.n, |_| true)?;
    let mut out = Vec::new();
    for (level, law) in mech.levels.iter().enumerate() {
        let table: Vec<Vec<f64>> = law.laws.iter().map(|l| l.log_pmf().to_vec()).collect();
        let grid: Vec<f64> = (0..law.grid.count() as usize).map(|i| i as f64).collect();
        out.push(AuditComponent {
            name: format!("level-{level}"),
            report: dp_audit_densities(&space, &table, &grid, eps / 2.0, PairScope::Adjacent)?,
        });
    }
    let table: Vec<Vec<f64>> = space.points().par_iter().map(|g| mech.marginal_log_pmf(g)).collect::<Result<_>>()?;
    let grid: Vec<f64> = (0..mech.output_grid().count() as usize).map(|i| i as f64).collect();
    out.push(AuditComponent {
        name: "marginal".into(),
        report: dp_audit_densities(&space, &table, &grid, eps, PairScope::Adjacent)?,
    });
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct SensitivityAudit {
    pub n: usize,
    pub k: usize,
    pub d: usize,
    pub mu: f64,
    pub candidates: usize,
    pub measured: f64,
    /// `4dμ/n²`.
    pub theoretical: f64,
    pub within_theory: bool,
    /// Codes of a pair attaining the measured value.
    pub witness: Option<(u64, u64)>,
}

/// Largest change of the capped score `max_π Score(B, π, cap_d(G))` between
/// adjacent graphs, over every `B` with entries in `{0, 1/n, …} ∩ [0, μ]`.
pub fn audit_score_sensitivity(n: usize, k: usize, d: usize, mu: f64) -> Result<SensitivityAudit> {
    if n > MAX_AUDIT_N {
        return Err(resource_limit(format!("sensitivity audit needs n <= {MAX_AUDIT_N}, got {n}")));
    }
    if n < 2 || k == 0 || !(mu >= 0.0) {
        return Err(invalid_param("need n >= 2, k >= 1 and mu >= 0"));
    }
    let level = (mu * n as f64 + 1e-9).floor() as usize;
    let grid = CandidateGrid { n, k, level };
    let len = usize::try_from(grid.count()).map_err(|_| resource_limit("candidate grid too large"))?;
    let graphs: Vec<LabeledGraph> = GraphSpaceIterator::new(n)?.collect();
    let candidates: Vec<_> = (0..len).map(|i| grid.matrix(i)).collect();
    let table: Vec<Vec<f64>> = graphs
        .par_iter()
        .map(|g| {
            let set = ProfileSet::build(&g.degree_cap(d), k)?;
            Ok(candidates.iter().map(|b| set.best(b).0).collect())
        })
        .collect::<Result<_>>()?;
    let best = graphs
        .par_iter()
        .map(|g| {
            let i = g.code().expect("small graph");
            let mut worst = (0.0f64, None);
            for h in adjacent_graphs(g)? {
                let j = h.code().expect("small graph");
                let gap = table[i as usize].iter().zip(&table[j as usize]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                if gap > worst.0 {
                    worst = (gap, Some((i, j)));
                }
            }
            Ok(worst)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold((0.0f64, None), |acc, w| if w.0 > acc.0 { w } else { acc });
    let theoretical = 4.0 * d as f64 * mu / (n * n) as f64;
    Ok(SensitivityAudit {
        n,
        k,
        d,
        mu,
        candidates: len,
        measured: best.0,
        theoretical,
        within_theory: best.0 <= theoretical * (1.0 + 1e-9) + 1e-12,
        witness: best.1,
    })
}

/// Clique on the ones plus clique on the zeros.
pub fn bernoulli_reduction_graph(bits: &[bool]) -> LabeledGraph {
    let n = bits.len();
    let mut g = LabeledGraph::empty(n);
    for u in 0..n {
        for v in u + 1..n {
            if bits[u] == bits[v] {
                g.set_edge(u, v, true);
            }
        }
    }
    g
}

/// Baseline Laplace mechanism run on the reduction graph, audited over all
/// bit strings of length `n` under Hamming distance.
pub fn audit_reduction(n: usize, epsilon: f64) -> Result<AuditReport> {
    if !(2..=12).contains(&n) {
        return Err(invalid_param(format!("reduction audit needs 2 <= n <= 12, got {n}")));
    }
    let strings: Vec<Vec<bool>> = (0..1u32 << n).map(|x| (0..n).map(|i| x >> i & 1 == 1).collect()).collect();
    let hamming = |a: &Vec<bool>, b: &Vec<bool>| Ok(a.iter().zip(b).filter(|(x, y)| x != y).count() as f64);
    let space = MetricSpace::new(strings, hamming, |_| true)?;
    let scale = 4.0 / (n as f64 * epsilon);
    let grid = laplace_grid();
    let table: Vec<Vec<f64>> = space
        .points()
        .par_iter()
        .map(|x| {
            let e = bernoulli_reduction_graph(x).edge_density()?;
            Ok(grid.iter().map(|&q| laplace_log_density(q, e, scale)).collect())
        })
        .collect::<Result<_>>()?;
    dp_audit_densities(&space, &table, &grid, epsilon, PairScope::Adjacent)
}
