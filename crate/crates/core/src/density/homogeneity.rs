//! Membership in the homogeneity set `H_{ρ,C}`: `e(G) ≤ ρ` and, for every
//! nonempty `S` with `|S| = s`,
//! `|E(S,Sᶜ) + E(S) − e(G)(s(n−s) + C(s,2))| ≤ C·max{√ρ, √(ln n/n)}·s·√(n ln n)`.

use rand::Rng;
use serde::Serialize;

use crate::error::{invalid_param, Result};
use crate::graph::{pair_count, LabeledGraph, VertexSet};

pub const EXACT_SCAN_MAX_N: usize = 16;
pub const DEFAULT_SUBSET_SAMPLES: usize = 100_000;
pub const DEFAULT_C: f64 = 49.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HomogeneityConfig {
    pub rho: f64,
    pub c: f64,
}

impl HomogeneityConfig {
    pub fn new(rho: f64, c: f64) -> Result<Self> {
        if !(rho > 0.0 && rho <= 1.0) {
            return Err(invalid_param(format!("rho must lie in (0,1], got {rho}")));
        }
        if !(c > 48.0 && c.is_finite()) {
            return Err(invalid_param(format!("C must exceed 48, got {c}")));
        }
        Ok(Self { rho, c })
    }

    /// Allowed deviation for subsets of size `s` in a graph on `n` vertices.
    pub fn tolerance(&self, n: usize, s: usize) -> f64 {
        let nf = n as f64;
        let ln = nf.ln();
        self.c * self.rho.sqrt().max((ln / nf).sqrt()) * s as f64 * (nf * ln).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Membership {
    pub member: bool,
    /// `false` for the sampled scan, whose positive answers are one-sided.
    pub exact: bool,
    /// A violating subset, when one was found.
    pub witness: Option<VertexSet>,
    pub density_exceeds_rho: bool,
}

fn slots(n: usize, s: usize) -> f64 {
    (s * (n - s) + s * s.saturating_sub(1) / 2) as f64
}

fn violates(cfg: &HomogeneityConfig, n: usize, e: f64, s: usize, count: usize) -> bool {
    (count as f64 - e * slots(n, s)).abs() > cfg.tolerance(n, s)
}

fn density_check(g: &LabeledGraph, cfg: &HomogeneityConfig) -> Result<Option<Membership>> {
    if g.n() < 3 {
        return Err(invalid_param("homogeneity needs n >= 3"));
    }
    let e = g.edge_density()?;
    Ok((e > cfg.rho).then_some(Membership { member: false, exact: true, witness: None, density_exceeds_rho: true }))
}

/// Exact scan over all `2ⁿ − 1` subsets in Gray-code order for `n ≤ 16`,
/// otherwise [`homogeneity_membership_sampled`] with a fixed stream.
pub fn homogeneity_membership(g: &LabeledGraph, cfg: &HomogeneityConfig) -> Result<Membership> {
    if g.n() > EXACT_SCAN_MAX_N {
        let mut rng = crate::rng::stream(0x6d65_6d62);
        return homogeneity_membership_sampled(g, cfg, DEFAULT_SUBSET_SAMPLES, &mut rng);
    }
    if let Some(m) = density_check(g, cfg)? {
        return Ok(m);
    }
    let n = g.n();
    let e = g.edge_count() as f64 / pair_count(n) as f64;
    let nbr: Vec<u32> = (0..n).map(|v| g.neighbors(v).fold(0u32, |m, u| m | 1 << u)).collect();
    let mut set = 0u32;
    let mut count = 0usize;
    for i in 1u32..(1u32 << n) {
        let v = i.trailing_zeros() as usize;
        let bit = 1u32 << v;
        if set & bit == 0 {
            count += (nbr[v] & !set).count_ones() as usize;
            set |= bit;
        } else {
            set &= !bit;
            count -= (nbr[v] & !set).count_ones() as usize;
        }
        let s = set.count_ones() as usize;
        if violates(cfg, n, e, s, count) {
            let witness = (0..n).filter(|u| set >> u & 1 == 1).collect();
            return Ok(Membership { member: false, exact: true, witness: Some(witness), density_exceeds_rho: false });
        }
    }
    Ok(Membership { member: true, exact: true, witness: None, density_exceeds_rho: false })
}

/// Checks `samples` uniformly random nonempty subsets; a `true` answer only
/// means no violation was found.
pub fn homogeneity_membership_sampled<R: Rng + ?Sized>(
    g: &LabeledGraph,
    cfg: &HomogeneityConfig,
    samples: usize,
    rng: &mut R,
) -> Result<Membership> {
    if let Some(m) = density_check(g, cfg)? {
        return Ok(m);
    }
    let n = g.n();
    let e = g.edge_density()?;
    for _ in 0..samples {
        let members: Vec<usize> = (0..n).filter(|_| rng.gen::<bool>()).collect();
        if members.is_empty() {
            continue;
        }
        let s: VertexSet = members.iter().copied().collect();
        let count = g.boundary_edge_count(&s)?;
        if violates(cfg, n, e, members.len(), count) {
            return Ok(Membership { member: false, exact: false, witness: Some(s), density_exceeds_rho: false });
        }
    }
    Ok(Membership { member: true, exact: false, witness: None, density_exceeds_rho: false })
}
