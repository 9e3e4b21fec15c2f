//! Node distance as an exact minimum vertex cover.
//!
//! Two graphs agree outside a vertex set `S` iff every edge of their
//! symmetric difference has an endpoint in `S`, so the rewiring distance is
//! the vertex cover number of `G1 △ G2`.

use super::LabeledGraph;
use crate::error::{resource_limit, Result};

/// Default number of search nodes before the cover search gives up.
pub const DEFAULT_COVER_BUDGET: u64 = 1_000_000;

/// Rewiring distance between two graphs on the same vertex set.
pub fn node_distance(g1: &LabeledGraph, g2: &LabeledGraph) -> Result<usize> {
    node_distance_with_budget(g1, g2, DEFAULT_COVER_BUDGET)
}

pub fn node_distance_with_budget(g1: &LabeledGraph, g2: &LabeledGraph, budget: u64) -> Result<usize> {
    let diff = g1.symmetric_difference(g2)?;
    let active: Vec<usize> = (0..diff.n()).filter(|&v| diff.degree(v) > 0).collect();
    if active.is_empty() {
        return Ok(0);
    }
    if active.len() > 128 {
        return Err(resource_limit(format!(
            "difference graph touches {} vertices (limit 128)",
            active.len()
        )));
    }
    let mut index = vec![usize::MAX; diff.n()];
    for (i, &v) in active.iter().enumerate() {
        index[v] = i;
    }
    let adj: Vec<u128> = active
        .iter()
        .map(|&v| diff.neighbors(v).fold(0u128, |m, u| m | 1 << index[u]))
        .collect();
    let all = if active.len() == 128 { u128::MAX } else { (1u128 << active.len()) - 1 };
    let mut search = CoverSearch { adj, best: active.len(), nodes: 0, budget };
    search.best = search.greedy_bound(all);
    search.branch(all, 0)?;
    Ok(search.best)
}

struct CoverSearch {
    adj: Vec<u128>,
    best: usize,
    nodes: u64,
    budget: u64,
}

fn bits(mut m: u128) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if m == 0 {
            return None;
        }
        let b = m.trailing_zeros() as usize;
        m &= m - 1;
        Some(b)
    })
}

impl CoverSearch {
    fn degree(&self, v: usize, alive: u128) -> u32 {
        (self.adj[v] & alive).count_ones()
    }

    /// Size of the cover that repeatedly takes a maximum-degree vertex.
    fn greedy_bound(&self, mut alive: u128) -> usize {
        let mut size = 0;
        loop {
            let pick = bits(alive).max_by_key(|&v| self.degree(v, alive));
            match pick {
                Some(v) if self.degree(v, alive) > 0 => {
                    alive &= !(1 << v);
                    size += 1;
                }
                _ => return size,
            }
        }
    }

    fn branch(&mut self, mut alive: u128, mut taken: usize) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(resource_limit(format!("vertex cover search exceeded {} nodes", self.budget)));
        }
        // kernelize: drop isolated vertices, take the neighbor of any pendant vertex
        loop {
            let mut changed = false;
            for v in bits(alive) {
                if alive >> v & 1 == 0 {
                    continue;
                }
                match self.degree(v, alive) {
                    0 => {
                        alive &= !(1 << v);
                        changed = true;
                    }
                    1 => {
                        let u = (self.adj[v] & alive).trailing_zeros() as usize;
                        alive &= !(1 << u) & !(1 << v);
                        taken += 1;
                        changed = true;
                    }
                    _ => {}
                }
            }
            if !changed {
                break;
            }
        }
        if taken >= self.best {
            return Ok(());
        }
        if alive == 0 {
            self.best = taken;
            return Ok(());
        }
        let (v, max_deg) = bits(alive)
            .map(|v| (v, self.degree(v, alive)))
            .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
            .expect("alive set is nonempty");
        let edges: u32 = bits(alive).map(|u| self.degree(u, alive)).sum::<u32>() / 2;
        let lower = edges.div_ceil(max_deg) as usize;
        if taken + lower >= self.best {
            return Ok(());
        }
        // either v is in the cover, or all of its neighbors are
        self.branch(alive & !(1 << v), taken + 1)?;
        let nbrs = self.adj[v] & alive;
        self.branch(alive & !nbrs & !(1 << v), taken + nbrs.count_ones() as usize)
    }
}
