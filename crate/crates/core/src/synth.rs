//! Synthetic mutual-dyad networks with tunable degree assortativity and
//! weight concentration.
//!
//! Generation runs in three stages: a configuration-model backbone from a
//! sampled degree sequence, greedy double-edge swaps that move the degree
//! correlation toward the target, and per-vertex weight vectors whose
//! unevenness is set by `dispersion`. The backbone and the weights draw from
//! separate ChaCha streams of the same seed, so changing `dispersion` alone
//! leaves the topology untouched.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, LogNormal, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{GraphBuilder, WeightedDigraph};
use crate::metrics::all_concentration;
use crate::nullmodels::{seeded_rng, Backbone, RegimeRng};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DegreeDistribution {
    /// Discrete Pareto tail `P(k) ~ k^-exponent` for `k >= min_degree`,
    /// truncated at `max_degree` (default `sqrt(min_degree * V)`).
    PowerLaw {
        exponent: f64,
        #[serde(default = "default_min_degree")]
        min_degree: u32,
        #[serde(default)]
        max_degree: Option<u32>,
    },
    Poisson {
        mean: f64,
    },
    Regular {
        degree: u32,
    },
}

fn default_min_degree() -> u32 {
    2
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub vertex_count: usize,
    pub degree_distribution: DegreeDistribution,
    pub target_assortativity: f64,
    /// 0 gives every vertex an even split; values toward 1 concentrate
    /// each vertex's activity on one neighbour.
    pub dispersion: f64,
    pub seed: u64,
    /// Tuning attempts per backbone edge.
    pub tuning_multiplier: u32,
    /// Tuning stops once the achieved r is this close to the target.
    pub tolerance: f64,
    /// Median calls per neighbour before dispersion is applied.
    pub calls_per_neighbor: f64,
    /// Log-scale spread of per-vertex communicative propensity.
    pub propensity_sigma: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            vertex_count: 5000,
            degree_distribution: DegreeDistribution::PowerLaw {
                exponent: 2.5,
                min_degree: 2,
                max_degree: None,
            },
            target_assortativity: 0.33,
            dispersion: 0.5,
            seed: 0,
            tuning_multiplier: 50,
            tolerance: 0.005,
            calls_per_neighbor: 6.0,
            propensity_sigma: 0.8,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SynthGraph {
    pub graph: WeightedDigraph,
    /// Backbone degree correlation after tuning; `None` for regular graphs.
    pub assortativity: Option<f64>,
    pub target_reached: bool,
    /// Stubs left unpaired because no valid repair swap was found.
    pub dropped_stubs: u64,
}

pub fn generate(cfg: &SynthConfig) -> Result<SynthGraph> {
    validate(cfg)?;
    let mut rng = seeded_rng(cfg.seed);
    let degrees = sample_degrees(cfg, &mut rng)?;
    let (edges, dropped_stubs) = configuration_model(&degrees, &mut rng);
    let mut bb = Backbone::from_edges(cfg.vertex_count, edges)?;
    let (assortativity, target_reached) = tune_assortativity(&mut bb, cfg, &mut rng);
    if !target_reached {
        if let Some(r) = assortativity {
            log::warn!(
                "assortativity target {} not reached; achieved {r:.4}",
                cfg.target_assortativity
            );
        }
    }
    let graph = assign_weights(&bb, cfg)?;
    Ok(SynthGraph {
        graph,
        assortativity,
        target_reached,
        dropped_stubs,
    })
}

fn validate(cfg: &SynthConfig) -> Result<()> {
    if cfg.vertex_count < 2 {
        return Err(Error::Domain("need at least 2 vertices".into()));
    }
    if !(cfg.target_assortativity > -1.0 && cfg.target_assortativity < 1.0) {
        return Err(Error::Domain(format!(
            "target assortativity {} outside (-1, 1)",
            cfg.target_assortativity
        )));
    }
    if !(0.0..=1.0).contains(&cfg.dispersion) {
        return Err(Error::Domain(format!(
            "dispersion {} outside [0, 1]",
            cfg.dispersion
        )));
    }
    if !(cfg.calls_per_neighbor.is_finite() && cfg.calls_per_neighbor > 0.0) {
        return Err(Error::Domain("calls_per_neighbor must be positive".into()));
    }
    if !(cfg.propensity_sigma.is_finite() && cfg.propensity_sigma >= 0.0) {
        return Err(Error::Domain(
            "propensity_sigma must be non-negative".into(),
        ));
    }
    match cfg.degree_distribution {
        DegreeDistribution::PowerLaw {
            exponent,
            min_degree,
            ..
        } if exponent.is_nan() || exponent <= 1.0 || min_degree == 0 => Err(Error::Domain(
            "power law needs exponent > 1 and min_degree >= 1".into(),
        )),
        DegreeDistribution::Poisson { mean } if !(mean > 0.0 && mean.is_finite()) => {
            Err(Error::Domain("poisson mean must be positive".into()))
        }
        DegreeDistribution::Regular { degree } if degree as usize >= cfg.vertex_count => {
            Err(Error::Domain(format!(
                "regular degree {degree} needs more than {} vertices",
                cfg.vertex_count
            )))
        }
        DegreeDistribution::Regular { degree } if degree % 2 == 1 && cfg.vertex_count % 2 == 1 => {
            Err(Error::Domain(
                "odd regular degree on an odd vertex count has odd degree sum".into(),
            ))
        }
        _ => Ok(()),
    }
}

fn sample_degrees(cfg: &SynthConfig, rng: &mut RegimeRng) -> Result<Vec<u32>> {
    let n = cfg.vertex_count;
    let cap = (n - 1) as u32;
    let mut draw: Box<dyn FnMut(&mut RegimeRng) -> u32> = match cfg.degree_distribution {
        DegreeDistribution::PowerLaw {
            exponent,
            min_degree,
            max_degree,
        } => {
            let kmax = max_degree
                .unwrap_or_else(|| ((min_degree as f64) * n as f64).sqrt() as u32)
                .clamp(min_degree, cap);
            let kmin = min_degree as f64;
            Box::new(move |rng| {
                let u: f64 = 1.0 - rng.random::<f64>();
                let k = (kmin * u.powf(-1.0 / (exponent - 1.0))).floor();
                (k.min(kmax as f64) as u32).max(min_degree)
            })
        }
        DegreeDistribution::Poisson { mean } => {
            let dist = Poisson::new(mean).map_err(|e| Error::Domain(e.to_string()))?;
            Box::new(move |rng| (dist.sample(rng) as u32).min(cap))
        }
        DegreeDistribution::Regular { degree } => Box::new(move |_| degree),
    };
    let mut degrees: Vec<u32> = (0..n).map(|_| draw(rng)).collect();
    let mut tries = 0;
    while degrees.iter().map(|&d| d as u64).sum::<u64>() % 2 == 1 {
        let v = rng.random_range(0..n);
        degrees[v] = draw(rng);
        tries += 1;
        if tries > 100 * n {
            return Err(Error::Domain("could not draw an even degree sum".into()));
        }
    }
    Ok(degrees)
}

#[inline]
fn key(a: u32, b: u32) -> (u32, u32) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Random stub matching. Self-loops and repeated pairs are repaired by
/// swapping with an existing edge; stubs that cannot be repaired are dropped.
fn configuration_model(degrees: &[u32], rng: &mut RegimeRng) -> (Vec<(u32, u32)>, u64) {
    let mut stubs: Vec<u32> = degrees
        .iter()
        .enumerate()
        .flat_map(|(v, &d)| std::iter::repeat_n(v as u32, d as usize))
        .collect();
    stubs.shuffle(rng);
    let mut edges = Vec::with_capacity(stubs.len() / 2);
    let mut seen = HashSet::with_capacity(stubs.len() / 2);
    let mut bad = Vec::new();
    for pair in stubs.chunks_exact(2) {
        let (u, v) = (pair[0], pair[1]);
        if u != v && seen.insert(key(u, v)) {
            edges.push((u, v));
        } else {
            bad.push((u, v));
        }
    }
    let mut dropped = 0u64;
    'repair: for (u, v) in bad {
        for _ in 0..1000 {
            if edges.is_empty() {
                break;
            }
            let e = rng.random_range(0..edges.len());
            let (x, y) = if rng.random::<bool>() {
                edges[e]
            } else {
                (edges[e].1, edges[e].0)
            };
            if u == x || v == y || key(u, x) == key(v, y) {
                continue;
            }
            if seen.contains(&key(u, x)) || seen.contains(&key(v, y)) {
                continue;
            }
            seen.remove(&key(x, y));
            seen.insert(key(u, x));
            seen.insert(key(v, y));
            edges[e] = (u, x);
            edges.push((v, y));
            continue 'repair;
        }
        dropped += 2;
    }
    (edges, dropped)
}

/// Greedy swaps: each proposal picks the better of the two rewirings of a
/// random edge pair and keeps it only if r moves closer to the target.
fn tune_assortativity(
    bb: &mut Backbone,
    cfg: &SynthConfig,
    rng: &mut RegimeRng,
) -> (Option<f64>, bool) {
    let base = bb.moments();
    let r_of = |cross: i128| {
        let mut m = base;
        m.sxy = 2 * cross;
        m.pearson().ok()
    };
    let target = cfg.target_assortativity;
    let Some(mut r) = r_of(bb.cross()) else {
        return (None, false);
    };
    let m = bb.edge_count();
    if m < 2 {
        return (Some(r), (r - target).abs() <= cfg.tolerance);
    }
    let budget = cfg.tuning_multiplier as u64 * m as u64;
    let mut attempts = 0u64;
    while (r - target).abs() > cfg.tolerance && attempts < budget {
        attempts += 1;
        let i = rng.random_range(0..m);
        let j = rng.random_range(0..m);
        let mut best: Option<(bool, f64)> = None;
        for flip in [false, true] {
            if let Some(delta) = bb.cross_delta(i, j, flip) {
                if let Some(r_new) = r_of(bb.cross() + delta) {
                    if best.is_none_or(|(_, b)| (r_new - target).abs() < (b - target).abs()) {
                        best = Some((flip, r_new));
                    }
                }
            }
        }
        if let Some((flip, r_new)) = best {
            if (r_new - target).abs() < (r - target).abs() {
                bb.try_swap(i, j, flip);
                r = r_new;
            }
        }
    }
    (Some(r), (r - target).abs() <= cfg.tolerance)
}

fn split_scale(dispersion: f64) -> f64 {
    2.0 * dispersion / (1.0 - dispersion)
}

/// Turns the backbone into mutual arcs with integer call counts.
fn assign_weights(bb: &Backbone, cfg: &SynthConfig) -> Result<WeightedDigraph> {
    let n = cfg.vertex_count;
    let mut rng = seeded_rng(cfg.seed);
    rng.set_stream(1);
    let mut neighbors: Vec<Vec<u32>> = vec![Vec::new(); n];
    for &(a, b) in bb.edges() {
        neighbors[a as usize].push(b);
        neighbors[b as usize].push(a);
    }
    let propensity = LogNormal::new(cfg.calls_per_neighbor.ln(), cfg.propensity_sigma)
        .map_err(|e| Error::Domain(e.to_string()))?;
    let mut builder = GraphBuilder::with_capacity(n, 2 * bb.edge_count());
    let mut shares: Vec<f64> = Vec::new();
    for (v, nbrs) in neighbors.iter_mut().enumerate() {
        if nbrs.is_empty() {
            continue;
        }
        nbrs.sort_unstable();
        let k = nbrs.len();
        let per_neighbor: f64 = propensity.sample(&mut rng);
        let strength = per_neighbor * k as f64;
        shares.clear();
        shares.extend((0..k).map(|_| rng.sample::<f64, _>(StandardNormal)));
        if cfg.dispersion >= 1.0 {
            let top = shares
                .iter()
                .enumerate()
                .max_by(|x, y| x.1.total_cmp(y.1))
                .map(|(i, _)| i)
                .unwrap_or(0);
            for (i, s) in shares.iter_mut().enumerate() {
                *s = if i == top { 1.0 } else { 0.0 };
            }
        } else {
            let scale = split_scale(cfg.dispersion);
            let peak = shares.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            for s in shares.iter_mut() {
                *s = (scale * (*s - peak)).exp();
            }
            let total: f64 = shares.iter().sum();
            for s in shares.iter_mut() {
                *s /= total;
            }
        }
        for (&t, &q) in nbrs.iter().zip(&shares) {
            builder.add_arc(v as u32, t, (strength * q).round().max(1.0))?;
        }
    }
    Ok(builder.finish().0)
}

/// Mean H* over vertices with out-degree >= 2; 0 when there are none.
pub fn mean_h_star(g: &WeightedDigraph) -> f64 {
    let scores = all_concentration(g);
    if scores.is_empty() {
        return 0.0;
    }
    scores.iter().map(|s| s.h_star).sum::<f64>() / scores.len() as f64
}

/// Bisects `dispersion` so the generated graph's mean H* lands near
/// `target_h_star`. Only the weights are regenerated between steps.
pub fn calibrate_dispersion(
    cfg: &SynthConfig,
    target_h_star: f64,
    steps: u32,
) -> Result<SynthGraph> {
    if !(0.0..1.0).contains(&target_h_star) {
        return Err(Error::Domain(format!(
            "target mean H* {target_h_star} outside [0, 1)"
        )));
    }
    let mut cfg = *cfg;
    cfg.dispersion = 0.0;
    let mut out = generate(&cfg)?;
    let bb = Backbone::from_graph(&out.graph);
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..steps {
        cfg.dispersion = 0.5 * (lo + hi);
        let g = assign_weights(&bb, &cfg)?;
        if mean_h_star(&g) < target_h_star {
            lo = cfg.dispersion;
        } else {
            hi = cfg.dispersion;
        }
    }
    cfg.dispersion = 0.5 * (lo + hi);
    out.graph = assign_weights(&bb, &cfg)?;
    Ok(out)
}
