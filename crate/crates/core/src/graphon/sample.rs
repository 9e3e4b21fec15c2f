use rand::seq::index;
use rand::Rng;

use crate::error::{invalid_param, Result};
use crate::graph::{pair_count, LabeledGraph};

use super::{SquareMatrix, StepGraphon};

/// A draw from `G_n(ρW)` together with its latent labels.
#[derive(Debug, Clone)]
pub struct WRandomSample {
    pub graph: LabeledGraph,
    pub labels: Vec<f64>,
    /// `ρW(x_i, x_j)` off the diagonal, zero on it.
    pub edge_probabilities: SquareMatrix<f64>,
    pub rho: f64,
}

pub fn sample_w_random<R: Rng + ?Sized>(w: &StepGraphon<f64>, rho: f64, n: usize, rng: &mut R) -> Result<WRandomSample> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(invalid_param(format!("rho must lie in [0,1], got {rho}")));
    }
    if rho * w.sup() > 1.0 {
        return Err(invalid_param(format!("rho * sup W = {} exceeds 1", rho * w.sup())));
    }
    let labels: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
    let blocks: Vec<usize> = labels.iter().map(|x| w.block_of(x)).collect();
    let probs = SquareMatrix::from_fn(n, |i, j| if i == j { 0.0 } else { rho * w.values().get(blocks[i], blocks[j]) });
    let mut graph = LabeledGraph::empty(n);
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen::<f64>() < *probs.get(i, j) {
                graph.set_edge(i, j, true);
            }
        }
    }
    Ok(WRandomSample { graph, labels, edge_probabilities: probs, rho })
}

/// Uniform graph with exactly `m` edges.
pub fn sample_gnm<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> Result<LabeledGraph> {
    let slots = pair_count(n);
    if m > slots {
        return Err(invalid_param(format!("m={m} exceeds C({n},2)={slots}")));
    }
    let mut chosen = vec![false; slots];
    for t in index::sample(rng, slots, m) {
        chosen[t] = true;
    }
    let mut g = LabeledGraph::empty(n);
    let mut t = 0;
    for u in 0..n {
        for v in u + 1..n {
            if chosen[t] {
                g.set_edge(u, v, true);
            }
            t += 1;
        }
    }
    Ok(g)
}

/// Both stages of the rewired `G(n, m+k)` model.
#[derive(Debug, Clone)]
pub struct RewiredSample {
    /// Uniform draw with `m + k` edges.
    pub first_stage: LabeledGraph,
    pub vertex: usize,
    pub graph: LabeledGraph,
}

/// Draw from `G(n, m+k)`, pick a uniform vertex and delete `min{deg, k}` of
/// its edges chosen uniformly at random.
pub fn sample_gnm_rewired_coupled<R: Rng + ?Sized>(n: usize, m: usize, k: usize, rng: &mut R) -> Result<RewiredSample> {
    if n == 0 {
        return Err(invalid_param("rewired model needs at least one vertex"));
    }
    let first_stage = sample_gnm(n, m + k, rng)?;
    let vertex = rng.gen_range(0..n);
    let nbrs: Vec<usize> = first_stage.neighbors(vertex).collect();
    let drop = nbrs.len().min(k);
    let mut graph = first_stage.clone();
    for i in index::sample(rng, nbrs.len(), drop) {
        graph.set_edge(vertex, nbrs[i], false);
    }
    Ok(RewiredSample { first_stage, vertex, graph })
}

pub fn sample_gnm_rewired<R: Rng + ?Sized>(n: usize, m: usize, k: usize, rng: &mut R) -> Result<LabeledGraph> {
    sample_gnm_rewired_coupled(n, m, k, rng).map(|s| s.graph)
}
