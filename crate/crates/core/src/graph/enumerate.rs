use super::{pair_count, LabeledGraph, VertexSet};
use crate::error::{resource_limit, Result};
use std::collections::BTreeSet;

/// Largest vertex count for which whole graph spaces are enumerated.
pub const MAX_ENUMERATION_N: usize = 7;

/// Every labeled graph on `n` vertices, in increasing code order.
#[derive(Debug, Clone)]
pub struct GraphSpaceIterator {
    n: usize,
    next: u64,
    end: u64,
}

impl GraphSpaceIterator {
    pub fn new(n: usize) -> Result<Self> {
        if n > MAX_ENUMERATION_N {
            return Err(resource_limit(format!(
                "graph space enumeration supports n <= {MAX_ENUMERATION_N}, got {n}"
            )));
        }
        Ok(Self { n, next: 0, end: 1u64 << pair_count(n) })
    }

    pub fn len(&self) -> usize {
        (self.end - self.next) as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl Iterator for GraphSpaceIterator {
    type Item = LabeledGraph;

    fn next(&mut self) -> Option<LabeledGraph> {
        if self.next >= self.end {
            return None;
        }
        let g = LabeledGraph::from_code(self.n, self.next);
        self.next += 1;
        Some(g)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        (self.len(), Some(self.len()))
    }
}

/// All graphs at node distance at most one from `g` (including `g`),
/// ordered by code.
pub fn adjacent_graphs(g: &LabeledGraph) -> Result<Vec<LabeledGraph>> {
    let n = g.n();
    if n > MAX_ENUMERATION_N {
        return Err(resource_limit(format!(
            "adjacent graph enumeration supports n <= {MAX_ENUMERATION_N}, got {n}"
        )));
    }
    let mut seen = BTreeSet::new();
    for v in 0..n {
        let others: Vec<usize> = (0..n).filter(|&u| u != v).collect();
        for mask in 0u32..1 << others.len() {
            let nbhd: VertexSet = others
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, &u)| u)
                .collect();
            let h = g.rewire(v, &nbhd)?;
            seen.insert(h.code().expect("small graph has a code"));
        }
    }
    Ok(seen.into_iter().map(|c| LabeledGraph::from_code(n, c)).collect())
}
