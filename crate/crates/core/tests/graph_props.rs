use nodedp::graph::{from_edge_list, from_hex, node_distance, pair_count, to_edge_list, to_hex};
use nodedp::LabeledGraph;
use proptest::prelude::*;

fn graph(max_n: usize) -> impl Strategy<Value = LabeledGraph> {
    (2..=max_n).prop_flat_map(|n| {
        prop::collection::vec(any::<bool>(), pair_count(n)).prop_map(move |bits| {
            let mut edges = Vec::new();
            let mut t = 0;
            for u in 0..n {
                for v in u + 1..n {
                    if bits[t] {
                        edges.push((u, v));
                    }
                    t += 1;
                }
            }
            LabeledGraph::from_edges(n, edges).unwrap()
        })
    })
}

fn same_size_triple(max_n: usize) -> impl Strategy<Value = (LabeledGraph, LabeledGraph, LabeledGraph)> {
    (2..=max_n).prop_flat_map(|n| {
        let g = move || prop::collection::vec(any::<bool>(), pair_count(n)).prop_map(move |bits| from_bits(n, &bits));
        (g(), g(), g())
    })
}

fn from_bits(n: usize, bits: &[bool]) -> LabeledGraph {
    let pairs = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)));
    LabeledGraph::from_edges(n, pairs.zip(bits).filter(|(_, &b)| b).map(|(p, _)| p)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn node_distance_is_a_metric((a, b, c) in same_size_triple(8)) {
        let ab = node_distance(&a, &b).unwrap();
        prop_assert_eq!(ab, node_distance(&b, &a).unwrap());
        prop_assert_eq!(ab == 0, a == b);
        prop_assert!(ab <= a.n() - 1);
        prop_assert!(node_distance(&a, &c).unwrap() <= ab + node_distance(&b, &c).unwrap());
    }

    #[test]
    fn one_rewiring_is_distance_at_most_one(g in graph(9), v in 0usize..9, mask: u16) {
        let v = v % g.n();
        let s = (0..g.n()).filter(|&u| u != v && mask >> u & 1 == 1).collect();
        let h = g.rewire(v, &s).unwrap();
        prop_assert!(node_distance(&g, &h).unwrap() <= 1);
    }

    #[test]
    fn degree_cap_bounds_degree_and_fixes_small_graphs(g in graph(10), d in 0usize..10) {
        let capped = g.degree_cap(d);
        prop_assert!(capped.max_degree() <= d);
        prop_assert!(capped.edges().all(|(u, v)| g.has_edge(u, v)));
        if g.max_degree() <= d {
            prop_assert_eq!(&capped, &g);
        }
        prop_assert_eq!(capped.degree_cap(d), capped);
    }

    #[test]
    fn text_formats_roundtrip(g in graph(12)) {
        prop_assert_eq!(from_edge_list(&to_edge_list(&g)).unwrap(), g.clone());
        prop_assert_eq!(from_hex(g.n(), &to_hex(&g)).unwrap(), g);
    }

    #[test]
    fn density_counts_pairs(g in graph(12)) {
        let e = g.edge_density().unwrap();
        prop_assert!((e * pair_count(g.n()) as f64 - g.edge_count() as f64).abs() < 1e-9);
    }
}
