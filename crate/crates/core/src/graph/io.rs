//! Edge-list text format and hex upper-triangle fixtures.
//!
//! Edge list: first line `n m`, then `m` lines `u v` with `0 <= u < v < n`.
//! Blank lines and lines starting with `#` are skipped.
//!
//! Hex: the upper triangle in row-major order `(0,1),(0,2),…,(1,2),…`,
//! packed most-significant-bit first into bytes.

use super::{pair_count, LabeledGraph};
use crate::error::{Error, Result};

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

pub fn to_edge_list(g: &LabeledGraph) -> String {
    let mut out = format!("{} {}\n", g.n(), g.edge_count());
    for (u, v) in g.edges() {
        out.push_str(&format!("{u} {v}\n"));
    }
    out
}

pub fn from_edge_list(text: &str) -> Result<LabeledGraph> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (hl, header) = lines.next().ok_or_else(|| parse_err(1, "missing header line"))?;
    let nums: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| parse_err(hl, format!("bad integer `{t}`"))))
        .collect::<Result<_>>()?;
    let [n, m] = nums[..] else {
        return Err(parse_err(hl, "header must be `n m`"));
    };
    let mut g = LabeledGraph::empty(n);
    let mut count = 0;
    for (ln, line) in lines {
        let parts: Vec<usize> = line
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| parse_err(ln, format!("bad integer `{t}`"))))
            .collect::<Result<_>>()?;
        let [u, v] = parts[..] else {
            return Err(parse_err(ln, "edge line must be `u v`"));
        };
        if u >= v || v >= n {
            return Err(parse_err(ln, format!("edge ({u},{v}) must satisfy u < v < {n}")));
        }
        if g.has_edge(u, v) {
            return Err(parse_err(ln, format!("duplicate edge ({u},{v})")));
        }
        g.set_edge(u, v, true);
        count += 1;
    }
    if count != m {
        return Err(parse_err(hl, format!("header declares {m} edges, found {count}")));
    }
    Ok(g)
}

pub fn to_hex(g: &LabeledGraph) -> String {
    let mut bytes = vec![0u8; pair_count(g.n()).div_ceil(8)];
    let mut t = 0;
    for i in 0..g.n() {
        for j in i + 1..g.n() {
            if g.has_edge(i, j) {
                bytes[t / 8] |= 0x80 >> (t % 8);
            }
            t += 1;
        }
    }
    hex::encode(bytes)
}

pub fn from_hex(n: usize, text: &str) -> Result<LabeledGraph> {
    let bytes = hex::decode(text.trim()).map_err(|e| parse_err(1, e.to_string()))?;
    let pairs = pair_count(n);
    if bytes.len() != pairs.div_ceil(8) {
        return Err(parse_err(1, format!("expected {} bytes for n={n}, got {}", pairs.div_ceil(8), bytes.len())));
    }
    let mut g = LabeledGraph::empty(n);
    let mut t = 0;
    for i in 0..n {
        for j in i + 1..n {
            if bytes[t / 8] & (0x80 >> (t % 8)) != 0 {
                g.set_edge(i, j, true);
            }
            t += 1;
        }
    }
    let rem = t % 8;
    if rem != 0 && bytes[bytes.len() - 1] & (0xffu8 >> rem) != 0 {
        return Err(parse_err(1, "padding bits must be zero"));
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_list_format() {
        let g = LabeledGraph::from_edges(4, [(0, 1), (2, 3)]).unwrap();
        let text = to_edge_list(&g);
        assert_eq!(text, "4 2\n0 1\n2 3\n");
        assert_eq!(from_edge_list(&text).unwrap(), g);
    }

    #[test]
    fn edge_list_rejects_bad_input() {
        assert!(from_edge_list("3 1\n1 0\n").is_err());
        assert!(from_edge_list("3 2\n0 1\n").is_err());
        assert!(from_edge_list("3 1\n0 3\n").is_err());
        assert!(from_edge_list("3 2\n0 1\n0 1\n").is_err());
        assert!(from_edge_list("").is_err());
    }

    #[test]
    fn hex_fixture() {
        let k4 = LabeledGraph::complete(4);
        assert_eq!(to_hex(&k4), "fc");
        assert_eq!(from_hex(4, "fc").unwrap(), k4);
        let g = LabeledGraph::from_edges(4, [(0, 1)]).unwrap();
        assert_eq!(to_hex(&g), "80");
        assert!(from_hex(4, "fd").is_err());
        assert!(from_hex(4, "fcfc").is_err());
    }
}
