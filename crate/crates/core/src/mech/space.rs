use rayon::prelude::*;

use crate::error::{invalid_input, resource_limit, Result};
use crate::graph::{node_distance, GraphSpaceIterator, LabeledGraph};

use super::{FiniteMechanism, PiecewiseExpDensity};

/// Largest point set for which all pairwise distances are materialized.
pub const MAX_SPACE_POINTS: usize = 4096;

/// Finite metric space with a distinguished subset `H`.
#[derive(Debug, Clone)]
pub struct MetricSpace<P> {
    points: Vec<P>,
    dist: Vec<f64>,
    in_h: Vec<bool>,
}

impl<P: Sync> MetricSpace<P> {
    pub fn new(
        points: Vec<P>,
        distance: impl Fn(&P, &P) -> Result<f64> + Sync,
        in_h: impl Fn(&P) -> bool + Sync,
    ) -> Result<Self> {
        let m = points.len();
        if m > MAX_SPACE_POINTS {
            return Err(resource_limit(format!("{m} points exceed the enumeration limit {MAX_SPACE_POINTS}")));
        }
        let rows: Vec<Vec<f64>> = (0..m)
            .into_par_iter()
            .map(|i| (0..m).map(|j| if i == j { Ok(0.0) } else { distance(&points[i], &points[j]) }).collect())
            .collect::<Result<_>>()?;
        let in_h = points.par_iter().map(|p| in_h(p)).collect();
        Ok(Self { points, dist: rows.concat(), in_h })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: usize) -> &P {
        &self.points[i]
    }

    pub fn points(&self) -> &[P] {
        &self.points
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.len() + j]
    }

    pub fn in_h(&self, i: usize) -> bool {
        self.in_h[i]
    }

    pub fn h_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.in_h[i]).collect()
    }

    /// Symmetry, zero diagonal and the triangle inequality over every triple.
    pub fn is_metric(&self) -> bool {
        let m = self.len();
        (0..m).into_par_iter().all(|i| {
            self.distance(i, i) == 0.0
                && (0..m).all(|j| {
                    self.distance(i, j) == self.distance(j, i)
                        && (i == j || self.distance(i, j) > 0.0)
                        && (0..m).all(|k| self.distance(i, k) <= self.distance(i, j) + self.distance(j, k))
                })
        })
    }
}

/// All labeled graphs on `n` vertices under the node distance.
pub fn graph_space(n: usize, in_h: impl Fn(&LabeledGraph) -> bool + Sync) -> Result<MetricSpace<LabeledGraph>> {
    let graphs: Vec<LabeledGraph> = GraphSpaceIterator::new(n)?.collect();
    if graphs.len() > MAX_SPACE_POINTS {
        return Err(resource_limit(format!("graph space on {n} vertices has {} points", graphs.len())));
    }
    MetricSpace::new(graphs, |a, b| node_distance(a, b).map(|d| d as f64), in_h)
}

/// Extension of a mechanism defined on `H` to the whole space: the density
/// at `D` is proportional to `min_{D'∈H} exp(ε·d(D,D')) f_{D'}`. If the base
/// is ε-DP on `H` it is reproduced there; the result is 2ε-DP everywhere.
pub fn extend_mechanism<P: Sync>(
    space: &MetricSpace<P>,
    base: impl Fn(usize) -> Result<PiecewiseExpDensity> + Sync,
    epsilon: f64,
) -> Result<Vec<PiecewiseExpDensity>> {
    let h = space.h_indices();
    if h.is_empty() {
        return Err(invalid_input("H is empty"));
    }
    let bases: Vec<PiecewiseExpDensity> = h.par_iter().map(|&i| base(i)).collect::<Result<_>>()?;
    (0..space.len())
        .into_par_iter()
        .map(|d| {
            let parts: Vec<(f64, &PiecewiseExpDensity)> =
                h.iter().zip(&bases).map(|(&j, f)| (epsilon * space.distance(d, j), f)).collect();
            PiecewiseExpDensity::lower_envelope(&parts)
        })
        .collect()
}

/// Same construction for finite outputs under counting measure.
pub fn extend_finite_mechanism<P: Sync>(
    space: &MetricSpace<P>,
    base: impl Fn(usize) -> Result<FiniteMechanism> + Sync,
    epsilon: f64,
) -> Result<Vec<FiniteMechanism>> {
    let h = space.h_indices();
    if h.is_empty() {
        return Err(invalid_input("H is empty"));
    }
    let bases: Vec<FiniteMechanism> = h.par_iter().map(|&i| base(i)).collect::<Result<_>>()?;
    let outcomes = bases[0].len();
    if bases.iter().any(|b| b.len() != outcomes) {
        return Err(invalid_input("base mechanisms disagree on the outcome set"));
    }
    (0..space.len())
        .into_par_iter()
        .map(|d| {
            let w = (0..outcomes)
                .map(|o| {
                    h.iter()
                        .zip(&bases)
                        .map(|(&j, b)| epsilon * space.distance(d, j) + b.log_pmf()[o])
                        .fold(f64::INFINITY, f64::min)
                })
                .collect();
            FiniteMechanism::from_log_weights(w)
        })
        .collect()
}
