#![allow(dead_code)]

use dyadrec::WeightedDigraph;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random digraph where each unordered pair is linked with probability
/// `density`; a linked pair is mutual with probability `mutual_share`,
/// otherwise one-way in a random direction. Integer weights in `1..=max_w`.
pub fn random_graph(
    seed: u64,
    n: usize,
    density: f64,
    mutual_share: f64,
    max_w: u32,
) -> WeightedDigraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut arcs = Vec::new();
    for i in 0..n as u32 {
        for j in i + 1..n as u32 {
            if !rng.random_bool(density) {
                continue;
            }
            let w1 = rng.random_range(1..=max_w) as f64;
            let w2 = rng.random_range(1..=max_w) as f64;
            if rng.random_bool(mutual_share) {
                arcs.push((i, j, w1));
                arcs.push((j, i, w2));
            } else if rng.random_bool(0.5) {
                arcs.push((i, j, w1));
            } else {
                arcs.push((j, i, w1));
            }
        }
    }
    WeightedDigraph::from_arcs(n, arcs).unwrap()
}

/// Arc triples for proptest: vertex count plus arcs that may include
/// self-loops and repeats, which the builder drops or merges.
pub fn arc_list(
    max_n: usize,
    max_arcs: usize,
) -> impl Strategy<Value = (usize, Vec<(u32, u32, f64)>)> {
    (2..=max_n).prop_flat_map(move |n| {
        let arc = (0..n as u32, 0..n as u32, 1u32..50).prop_map(|(s, t, w)| (s, t, w as f64));
        (Just(n), prop::collection::vec(arc, 0..max_arcs))
    })
}

pub fn build(n: usize, arcs: &[(u32, u32, f64)]) -> WeightedDigraph {
    WeightedDigraph::from_arcs(n, arcs.iter().copied()).unwrap()
}
