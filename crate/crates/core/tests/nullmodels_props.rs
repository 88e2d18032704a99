mod common;

use common::{arc_list, build, random_graph};
use dyadrec::metrics::{all_reciprocity, equidispersion_prediction};
use dyadrec::nullmodels::{
    apply_regime, equidisperse, four_regimes, maslov_sneppen_rewire, mutual_subgraph,
    reattach_weights, seeded_rng, Regime, RegimeConfig,
};
use dyadrec::WeightedDigraph;
use proptest::prelude::*;

fn sorted_mutual_weights(g: &WeightedDigraph, v: usize) -> Vec<f64> {
    let mut w: Vec<f64> = g
        .out_arcs(dyadrec::VertexId(v as u32))
        .unwrap()
        .filter(|&(t, _)| g.has_arc(t, dyadrec::VertexId(v as u32)))
        .map(|(_, w)| w)
        .collect();
    w.sort_by(f64::total_cmp);
    w
}

fn one_way_arcs(g: &WeightedDigraph) -> Vec<(u32, u32, f64)> {
    g.arcs()
        .filter(|a| !g.has_arc(a.target, a.source))
        .map(|a| (a.source.0, a.target.0, a.weight))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rewiring_preserves_degrees_and_weight_multisets(seed in any::<u64>(), graph_seed in 0u64..1000) {
        let g = random_graph(graph_seed, 60, 0.12, 0.6, 30);
        prop_assume!(g.mutual_dyads().count() >= 2);
        let cfg = RegimeConfig { seed, early_stop: None, ..RegimeConfig::default() };
        let out = maslov_sneppen_rewire(&g, &cfg, &mut seeded_rng(seed)).unwrap();
        let h = &out.graph;
        prop_assert_eq!(h.mutual_degrees(), g.mutual_degrees());
        prop_assert_eq!(h.out_degrees(), g.out_degrees());
        prop_assert_eq!(h.in_degrees(), g.in_degrees());
        prop_assert_eq!(one_way_arcs(h), one_way_arcs(&g));
        for v in 0..g.vertex_count() {
            prop_assert_eq!(sorted_mutual_weights(h, v), sorted_mutual_weights(&g, v));
            prop_assert!((h.out_strengths()[v] - g.out_strengths()[v]).abs() < 1e-9);
        }
        prop_assert_eq!(out.attempted_swaps, 10 * g.mutual_dyads().count() as u64);
    }

    #[test]
    fn rewiring_is_reproducible(seed in any::<u64>()) {
        let g = random_graph(7, 80, 0.1, 0.5, 20);
        let cfg = RegimeConfig { seed, ..RegimeConfig::default() };
        let a = maslov_sneppen_rewire(&g, &cfg, &mut seeded_rng(seed)).unwrap();
        let b = maslov_sneppen_rewire(&g, &cfg, &mut seeded_rng(seed)).unwrap();
        prop_assert_eq!(a.graph.digest(), b.graph.digest());
        prop_assert_eq!(a.stats(), b.stats());
    }

    #[test]
    fn equidispersion_is_idempotent_and_keeps_strength((n, arcs) in arc_list(25, 250)) {
        let g = build(n, &arcs);
        let e = equidisperse(&g);
        let ee = equidisperse(&e);
        prop_assert_eq!(e.out_degrees(), g.out_degrees());
        for v in 0..n {
            prop_assert!((e.out_strengths()[v] - g.out_strengths()[v]).abs() <= 1e-9 * g.out_strengths()[v].max(1.0));
        }
        for (a, b) in e.arcs().zip(ee.arcs()) {
            prop_assert_eq!((a.source, a.target), (b.source, b.target));
            prop_assert!((a.weight - b.weight).abs() <= 1e-12 * a.weight);
        }
    }

    #[test]
    fn reattach_keeps_each_vertex_multiset(seed in any::<u64>()) {
        let g = random_graph(seed % 50, 40, 0.2, 0.7, 50);
        let same_topology = reattach_weights(&g, &g, &mut seeded_rng(seed)).unwrap();
        prop_assert_eq!(same_topology.out_degrees(), g.out_degrees());
        for v in 0..g.vertex_count() {
            prop_assert_eq!(sorted_mutual_weights(&same_topology, v), sorted_mutual_weights(&g, v));
        }
    }
}

#[test]
fn rewired_equidispersed_cell_follows_degree_prediction() {
    let g = random_graph(3, 200, 0.05, 0.6, 25);
    let cells = four_regimes(&g, 11, 10).unwrap();
    let deg = cells.rewired_equidispersed.out_degrees();
    for rec in all_reciprocity(&cells.rewired_equidispersed) {
        let p =
            equidispersion_prediction(deg[rec.dyad.a.index()], deg[rec.dyad.b.index()]).unwrap();
        assert!((rec.r_value - p).abs() < 1e-9);
    }
    assert_eq!(cells.observed, g);
    assert_eq!(cells.rewired.mutual_degrees(), g.mutual_degrees());
}

#[test]
fn both_rewired_cells_share_topology() {
    let g = random_graph(4, 150, 0.06, 0.6, 25);
    let cells = four_regimes(&g, 5, 10).unwrap();
    let topo = |h: &WeightedDigraph| h.arcs().map(|a| (a.source, a.target)).collect::<Vec<_>>();
    assert_eq!(topo(&cells.rewired), topo(&cells.rewired_equidispersed));
    assert_eq!(topo(&cells.observed), topo(&cells.observed_equidispersed));
}

#[test]
fn apply_regime_matches_four_regimes() {
    let g = random_graph(9, 120, 0.08, 0.5, 15);
    let base = RegimeConfig {
        seed: 21,
        ..RegimeConfig::default()
    };
    let cells = four_regimes(&g, 21, base.swap_multiplier).unwrap();
    for regime in Regime::ALL {
        let one = apply_regime(&g, &base.for_regime(regime)).unwrap();
        assert_eq!(one.regime, regime);
        assert_eq!(&one.graph, cells.get(regime), "{regime}");
    }
}

#[test]
fn mutual_only_drops_one_way_arcs() {
    let g = random_graph(1, 100, 0.1, 0.5, 10);
    let cfg = RegimeConfig {
        keep_one_way: false,
        ..RegimeConfig::default()
    };
    let out = apply_regime(&g, &cfg.for_regime(Regime::Rewired)).unwrap();
    assert_eq!(out.graph.dyad_census().asymmetric, 0);
    assert_eq!(
        out.graph.mutual_degrees(),
        mutual_subgraph(&g).mutual_degrees()
    );
}

#[test]
fn too_few_mutual_dyads_is_an_error() {
    let g = WeightedDigraph::from_arcs(3, [(0, 1, 1.0), (1, 0, 1.0), (1, 2, 1.0)]).unwrap();
    let cfg = RegimeConfig::default();
    assert!(maslov_sneppen_rewire(&g, &cfg, &mut seeded_rng(0)).is_err());
}
