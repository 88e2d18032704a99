mod common;

use std::collections::BTreeMap;

use common::{arc_list, build, random_graph};
use dyadrec::{GraphBuilder, VertexId, WeightedDigraph};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Dense adjacency oracle: summed weights keyed by (src, dst), loops dropped.
fn dense(n: usize, arcs: &[(u32, u32, f64)]) -> BTreeMap<(u32, u32), f64> {
    let mut m = BTreeMap::new();
    for &(s, t, w) in arcs {
        if s != t {
            *m.entry((s, t)).or_insert(0.0) += w;
        }
    }
    assert!(m.keys().all(|&(s, t)| (s as usize) < n && (t as usize) < n));
    m
}

fn brute_census(n: usize, adj: &BTreeMap<(u32, u32), f64>) -> (u64, u64, u64) {
    let (mut mutual, mut asym, mut null) = (0, 0, 0);
    for i in 0..n as u32 {
        for j in i + 1..n as u32 {
            match (adj.contains_key(&(i, j)), adj.contains_key(&(j, i))) {
                (true, true) => mutual += 1,
                (false, false) => null += 1,
                _ => asym += 1,
            }
        }
    }
    (mutual, asym, null)
}

proptest! {
    #[test]
    fn census_matches_pairwise_count((n, arcs) in arc_list(40, 300)) {
        let g = build(n, &arcs);
        let adj = dense(n, &arcs);
        let c = g.dyad_census();
        let (m, a, z) = brute_census(n, &adj);
        prop_assert_eq!((c.mutual, c.asymmetric, c.null_dyads), (m, a, z));
        prop_assert_eq!(c.mutual + c.asymmetric + c.null_dyads, (n * (n - 1) / 2) as u64);
        prop_assert_eq!(2 * c.mutual + c.asymmetric, c.total_arcs);
        prop_assert_eq!(c.total_arcs as usize, g.arc_count());
    }

    #[test]
    fn normalized_weights_sum_to_one((n, arcs) in arc_list(30, 200)) {
        let g = build(n, &arcs);
        for v in g.vertices() {
            let k = g.out_degree(v).unwrap();
            let total: f64 = g
                .out_arcs(v)
                .unwrap()
                .map(|(t, _)| g.normalized_weight(v, t).unwrap())
                .sum();
            if k == 0 {
                prop_assert_eq!(g.out_strength(v).unwrap(), 0.0);
            } else {
                prop_assert!((total - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn strengths_and_weights_match_dense_oracle((n, arcs) in arc_list(30, 200)) {
        let g = build(n, &arcs);
        let adj = dense(n, &arcs);
        let mut strength = vec![0.0; n];
        for (&(s, _), &w) in &adj {
            strength[s as usize] += w;
        }
        for (got, want) in g.out_strengths().iter().zip(&strength) {
            prop_assert!((got - want).abs() < 1e-9);
        }
        for (&(s, t), &w) in &adj {
            prop_assert_eq!(g.weight(VertexId(s), VertexId(t)), Some(w));
        }
        prop_assert_eq!(g.arc_count(), adj.len());
    }

    #[test]
    fn mutual_dyads_are_exactly_the_two_way_pairs((n, arcs) in arc_list(30, 200)) {
        let g = build(n, &arcs);
        let adj = dense(n, &arcs);
        let expected: Vec<(u32, u32, f64, f64)> = adj
            .iter()
            .filter(|(&(s, t), _)| s < t)
            .filter_map(|(&(s, t), &w)| adj.get(&(t, s)).map(|&back| (s, t, w, back)))
            .collect();
        let got: Vec<(u32, u32, f64, f64)> =
            g.mutual_dyads().map(|d| (d.a.0, d.b.0, d.w_ab, d.w_ba)).collect();
        prop_assert_eq!(got, expected);
    }

    #[test]
    fn arc_order_does_not_matter((n, arcs) in arc_list(25, 150), seed in any::<u64>()) {
        let mut shuffled = arcs.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        shuffled.shuffle(&mut rng);
        let a = build(n, &arcs);
        let b = build(n, &shuffled);
        prop_assert_eq!(a.digest(), b.digest());
        prop_assert_eq!(a, b);
    }
}

#[test]
fn builder_reports_loops_and_duplicates() {
    let mut b = GraphBuilder::new(3);
    for (s, t, w) in [
        (0, 1, 1.0),
        (0, 1, 2.0),
        (1, 1, 5.0),
        (2, 0, 1.0),
        (2, 0, 1.0),
    ] {
        b.add_arc(s, t, w).unwrap();
    }
    let (g, stats) = b.finish();
    assert_eq!(stats.self_loops_dropped, 1);
    assert_eq!(stats.duplicates_merged, 2);
    assert_eq!(g.weight(VertexId(0), VertexId(1)), Some(3.0));
    assert_eq!(g.weight(VertexId(2), VertexId(0)), Some(2.0));
    assert_eq!(g.arc_count(), 2);
}

#[test]
fn builder_rejects_bad_input() {
    let mut b = GraphBuilder::new(2);
    assert!(b.add_arc(0, 2, 1.0).is_err());
    assert!(b.add_arc(0, 1, 0.0).is_err());
    assert!(b.add_arc(0, 1, -1.0).is_err());
    assert!(b.add_arc(0, 1, f64::NAN).is_err());
    assert!(b.add_arc(0, 1, f64::INFINITY).is_err());
}

#[test]
fn queries_on_unknown_vertices_fail() {
    let g = WeightedDigraph::from_arcs(2, [(0, 1, 1.0)]).unwrap();
    assert!(g.out_strength(VertexId(2)).is_err());
    assert!(g.out_degree(VertexId(7)).is_err());
    assert!(g.normalized_weight(VertexId(1), VertexId(0)).is_err());
}

#[test]
fn census_on_larger_random_graphs() {
    for seed in 0..20 {
        let g = random_graph(seed, 300, 0.05, 0.5, 20);
        let c = g.dyad_census();
        assert_eq!(c.mutual + c.asymmetric + c.null_dyads, 300 * 299 / 2);
        assert_eq!(c.mutual as usize, g.mutual_dyads().count());
        let one_way = g.arcs().filter(|a| !g.has_arc(a.target, a.source)).count();
        assert_eq!(c.asymmetric as usize, one_way);
    }
}
