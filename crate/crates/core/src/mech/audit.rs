use rayon::prelude::*;
use std::fmt::Write;

use crate::error::{invalid_input, Result};

use super::{MetricSpace, PiecewiseExpDensity};

/// Slack for floating-point noise in log-ratio audits.
pub const AUDIT_TOLERANCE: f64 = 1e-9;

/// Which ordered point pairs an audit visits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairScope {
    All,
    /// Only pairs at distance exactly one; enough for path metrics such as
    /// the node distance.
    Adjacent,
}

/// Worst grid point for one ordered pair.
#[derive(Debug, Clone, PartialEq)]
pub struct PairRow {
    pub i: usize,
    pub j: usize,
    pub distance: f64,
    pub q: f64,
    pub log_ratio: f64,
    pub bound: f64,
    pub violation: f64,
}

#[derive(Debug, Clone)]
pub struct AuditReport {
    pub epsilon: f64,
    pub max_violation: f64,
    pub witness: Option<PairRow>,
    pub rows: Vec<PairRow>,
}

impl AuditReport {
    pub fn passes(&self, tolerance: f64) -> bool {
        self.max_violation <= tolerance
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("pair_id,i,j,d_v,q,log_ratio,bound,violation\n");
        for (id, r) in self.rows.iter().enumerate() {
            let _ = writeln!(out, "{id},{},{},{},{},{},{},{}", r.i, r.j, r.distance, r.q, r.log_ratio, r.bound, r.violation);
        }
        out
    }
}

/// `max_{D,D'} max_ω log f_D(ω) − log f_{D'}(ω) − ε·d(D,D')` over a table of
/// log densities (one row per point, one column per grid value). Both
/// densities vanishing is no evidence either way; mass at `D` where `D'` has
/// none is an infinite violation.
pub fn dp_audit_densities<P: Sync>(
    space: &MetricSpace<P>,
    log_densities: &[Vec<f64>],
    grid: &[f64],
    epsilon: f64,
    scope: PairScope,
) -> Result<AuditReport> {
    if log_densities.len() != space.len() {
        return Err(invalid_input(format!("{} density rows for {} points", log_densities.len(), space.len())));
    }
    if log_densities.iter().any(|r| r.len() != grid.len()) {
        return Err(invalid_input("every density row must cover the whole grid"));
    }
    let m = space.len();
    let rows: Vec<PairRow> = (0..m)
        .into_par_iter()
        .flat_map_iter(|i| {
            (0..m).filter_map(move |j| {
                let d = space.distance(i, j);
                let keep = i != j && match scope {
                    PairScope::All => true,
                    PairScope::Adjacent => d == 1.0,
                };
                if !keep {
                    return None;
                }
                let bound = epsilon * d;
                let mut worst: Option<PairRow> = None;
                for (g, &q) in grid.iter().enumerate() {
                    let (a, b) = (log_densities[i][g], log_densities[j][g]);
                    let ratio = if a == f64::NEG_INFINITY {
                        continue;
                    } else if b == f64::NEG_INFINITY {
                        f64::INFINITY
                    } else {
                        a - b
                    };
                    let v = ratio - bound;
                    if worst.as_ref().is_none_or(|w| v > w.violation) {
                        worst = Some(PairRow { i, j, distance: d, q, log_ratio: ratio, bound, violation: v });
                    }
                }
                worst
            })
        })
        .collect();
    let witness = rows.iter().max_by(|a, b| a.violation.total_cmp(&b.violation)).cloned();
    let max_violation = witness.as_ref().map_or(f64::NEG_INFINITY, |w| w.violation);
    Ok(AuditReport { epsilon, max_violation, witness, rows })
}

/// `m` evenly spaced points covering `[0,1]`, endpoints included.
pub fn uniform_grid(m: usize) -> Vec<f64> {
    match m {
        0 => Vec::new(),
        1 => vec![0.5],
        _ => (0..m).map(|i| i as f64 / (m - 1) as f64).collect(),
    }
}

pub fn log_density_table(densities: &[PiecewiseExpDensity], grid: &[f64]) -> Vec<Vec<f64>> {
    densities.par_iter().map(|d| grid.iter().map(|&q| d.log_density(q)).collect()).collect()
}
