use proptest::prelude::*;
use salami_core::rational::ratio;
use salami_core::{GraphBuilder, WeightedGraph};

/// Random connected graph: a spanning tree on `0..n` plus extra edges,
/// rational weights and measures.
pub fn arb_graph(max_n: usize) -> impl Strategy<Value = WeightedGraph> {
    (2..=max_n)
        .prop_flat_map(|n| {
            (
                Just(n),
                proptest::collection::vec(any::<prop::sample::Index>(), n - 1),
                proptest::collection::vec((0..n, 0..n, 1i64..=6, 1i64..=3), 0..n),
                proptest::collection::vec((1i64..=6, 1i64..=3), n - 1),
                proptest::collection::vec((1i64..=4, 1i64..=3), n),
            )
        })
        .prop_map(|(n, parents, extra, tree_w, measures)| {
            let mut b = GraphBuilder::new();
            for (v, (p, q)) in measures.iter().enumerate() {
                b.vertex(format!("v{v:02}"), ratio(*p, *q), false);
            }
            let mut seen = std::collections::BTreeSet::new();
            for v in 1..n {
                let parent = parents[v - 1].index(v);
                let (p, q) = tree_w[v - 1];
                seen.insert((parent, v));
                b.edge(format!("v{parent:02}"), format!("v{v:02}"), ratio(p, q));
            }
            for (a, c, p, q) in extra {
                let (a, c) = (a.min(c), a.max(c));
                if a != c && seen.insert((a, c)) {
                    b.edge(format!("v{a:02}"), format!("v{c:02}"), ratio(p, q));
                }
            }
            b.build().unwrap()
        })
}

/// Random tree on `2..=max_n` vertices with rational weights and measures.
#[allow(dead_code)]
pub fn arb_tree(max_n: usize) -> impl Strategy<Value = WeightedGraph> {
    (2..=max_n)
        .prop_flat_map(|n| {
            (
                proptest::collection::vec(any::<prop::sample::Index>(), n - 1),
                proptest::collection::vec((1i64..=6, 1i64..=3), n - 1),
                proptest::collection::vec((1i64..=4, 1i64..=3), n),
            )
        })
        .prop_map(|(parents, weights, measures)| {
            let mut b = GraphBuilder::new();
            for (v, (p, q)) in measures.iter().enumerate() {
                b.vertex(format!("t{v:02}"), ratio(*p, *q), false);
            }
            for v in 1..measures.len() {
                let (p, q) = weights[v - 1];
                b.edge(format!("t{:02}", parents[v - 1].index(v)), format!("t{v:02}"), ratio(p, q));
            }
            b.build().unwrap()
        })
}
