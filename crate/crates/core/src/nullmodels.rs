//! Counterfactual networks: degree-preserving rewiring of the mutual
//! backbone, equidispersion of outgoing weights, and their combination.
//!
//! Rewiring acts on the undirected backbone formed by mutual dyads rather
//! than on directed arcs. Swapping directed arcs independently would break
//! most mutual pairs and leave nothing to score. One-way arcs are carried
//! through untouched (they still count toward sender strength) unless
//! [`RegimeConfig::keep_one_way`] is cleared, in which case every regime is
//! built from the mutual subgraph alone.
//!
//! All randomness comes from a ChaCha8 generator seeded with a `u64`, so
//! every output is reproducible from its seed.

use std::collections::HashSet;
use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{GraphBuilder, WeightedDigraph};
use crate::metrics::PairMoments;

pub type RegimeRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> RegimeRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub const DEFAULT_SWAP_MULTIPLIER: u32 = 10;
pub const DEFAULT_EARLY_STOP: f64 = 0.005;

/// One cell of the 2x2 design: mixing kept or neutralised, weight dispersion
/// kept or equalised.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// Observed mixing, observed weights.
    Observed,
    /// Observed mixing, equalised weights.
    ObservedEquidispersed,
    /// Neutral mixing, observed per-vertex weights.
    Rewired,
    /// Neutral mixing, equalised weights.
    RewiredEquidispersed,
}

impl Regime {
    /// Expected order from most to least reciprocal.
    pub const ALL: [Regime; 4] = [
        Regime::ObservedEquidispersed,
        Regime::RewiredEquidispersed,
        Regime::Observed,
        Regime::Rewired,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Regime::Observed => "obs",
            Regime::ObservedEquidispersed => "obs_equi",
            Regime::Rewired => "rw",
            Regime::RewiredEquidispersed => "rw_equi",
        }
    }

    pub fn from_flags(destroy_assortativity: bool, impose_equidispersion: bool) -> Self {
        match (destroy_assortativity, impose_equidispersion) {
            (false, false) => Regime::Observed,
            (false, true) => Regime::ObservedEquidispersed,
            (true, false) => Regime::Rewired,
            (true, true) => Regime::RewiredEquidispersed,
        }
    }

    pub fn destroys_assortativity(self) -> bool {
        matches!(self, Regime::Rewired | Regime::RewiredEquidispersed)
    }

    pub fn imposes_equidispersion(self) -> bool {
        matches!(
            self,
            Regime::ObservedEquidispersed | Regime::RewiredEquidispersed
        )
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeConfig {
    pub destroy_assortativity: bool,
    pub impose_equidispersion: bool,
    pub seed: u64,
    /// Attempted swaps = multiplier x backbone edge count.
    pub swap_multiplier: u32,
    pub keep_one_way: bool,
    /// Stop rewiring once |r| falls below this, checked every tenth of the
    /// edge count in attempts.
    pub early_stop: Option<f64>,
}

impl Default for RegimeConfig {
    fn default() -> Self {
        RegimeConfig {
            destroy_assortativity: false,
            impose_equidispersion: false,
            seed: 0,
            swap_multiplier: DEFAULT_SWAP_MULTIPLIER,
            keep_one_way: true,
            early_stop: Some(DEFAULT_EARLY_STOP),
        }
    }
}

impl RegimeConfig {
    pub fn regime(&self) -> Regime {
        Regime::from_flags(self.destroy_assortativity, self.impose_equidispersion)
    }

    pub fn for_regime(mut self, regime: Regime) -> Self {
        self.destroy_assortativity = regime.destroys_assortativity();
        self.impose_equidispersion = regime.imposes_equidispersion();
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewireStats {
    pub attempted_swaps: u64,
    pub accepted_swaps: u64,
    pub initial_assortativity: Option<f64>,
    /// `None` when the backbone degrees have no variance.
    pub residual_assortativity: Option<f64>,
    /// No swap was ever accepted (for example a complete backbone).
    pub stalled: bool,
}

#[derive(Debug, Clone)]
pub struct RewireOutcome {
    pub graph: WeightedDigraph,
    pub attempted_swaps: u64,
    pub accepted_swaps: u64,
    pub residual_assortativity: Option<f64>,
    pub initial_assortativity: Option<f64>,
    pub stalled: bool,
}

impl RewireOutcome {
    pub fn stats(&self) -> RewireStats {
        RewireStats {
            attempted_swaps: self.attempted_swaps,
            accepted_swaps: self.accepted_swaps,
            initial_assortativity: self.initial_assortativity,
            residual_assortativity: self.residual_assortativity,
            stalled: self.stalled,
        }
    }
}

#[inline]
fn pair_key(a: u32, b: u32) -> u64 {
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    ((lo as u64) << 32) | hi as u64
}

/// Undirected simple graph supporting degree-preserving double-edge swaps,
/// with the degree-correlation numerator kept up to date on every swap.
#[derive(Debug, Clone)]
pub struct Backbone {
    vertex_count: usize,
    edges: Vec<(u32, u32)>,
    occupied: HashSet<u64>,
    degrees: Vec<u32>,
    // sum over edges of excess(a) * excess(b)
    cross: i128,
}

impl Backbone {
    /// Backbone of `edges`. Fails on self-loops, repeated pairs or ids out
    /// of range.
    pub fn from_edges(vertex_count: usize, edges: Vec<(u32, u32)>) -> Result<Self> {
        Self::with_blocked(vertex_count, edges, std::iter::empty())
    }

    /// Backbone of `edges` where `blocked` pairs may never be created by a
    /// swap (used to keep rewired edges off one-way arcs).
    pub fn with_blocked(
        vertex_count: usize,
        edges: Vec<(u32, u32)>,
        blocked: impl IntoIterator<Item = (u32, u32)>,
    ) -> Result<Self> {
        let mut degrees = vec![0u32; vertex_count];
        let mut occupied = HashSet::with_capacity(edges.len());
        for &(a, b) in &edges {
            if a as usize >= vertex_count || b as usize >= vertex_count {
                return Err(Error::Domain(format!("edge ({a}, {b}) out of range")));
            }
            if a == b {
                return Err(Error::Domain(format!("self-loop at {a}")));
            }
            if !occupied.insert(pair_key(a, b)) {
                return Err(Error::Domain(format!("duplicate edge ({a}, {b})")));
            }
            degrees[a as usize] += 1;
            degrees[b as usize] += 1;
        }
        occupied.extend(blocked.into_iter().map(|(a, b)| pair_key(a, b)));
        let mut bb = Backbone {
            vertex_count,
            edges,
            occupied,
            degrees,
            cross: 0,
        };
        bb.cross = bb
            .edges
            .iter()
            .map(|&(a, b)| bb.excess(a) * bb.excess(b))
            .sum();
        Ok(bb)
    }

    /// Mutual-dyad backbone of `g`. Pairs joined by a one-way arc are
    /// blocked so swaps never land on them.
    pub fn from_graph(g: &WeightedDigraph) -> Self {
        let edges: Vec<(u32, u32)> = g.mutual_dyads().map(|d| (d.a.0, d.b.0)).collect();
        let blocked: Vec<(u32, u32)> = g
            .arcs()
            .filter(|a| !g.has_arc(a.target, a.source))
            .map(|a| (a.source.0, a.target.0))
            .collect();
        Self::with_blocked(g.vertex_count(), edges, blocked)
            .expect("mutual dyads of a finalized graph form a simple graph")
    }

    #[inline]
    fn excess(&self, v: u32) -> i128 {
        self.degrees[v as usize] as i128 - 1
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn degrees(&self) -> &[u32] {
        &self.degrees
    }

    pub fn contains(&self, a: u32, b: u32) -> bool {
        self.occupied.contains(&pair_key(a, b))
    }

    /// Proposes replacing `(a, b)` and `(c, d)`, the edges at indices `i`
    /// and `j` (with `(c, d)` read as `(d, c)` when `flip`), by `(a, d)` and
    /// `(c, b)`. Returns whether the swap was applied; it is refused if it
    /// would create a self-loop or an existing pair.
    pub fn try_swap(&mut self, i: usize, j: usize, flip: bool) -> bool {
        if i == j {
            return false;
        }
        let (a, b) = self.edges[i];
        let (c, d) = if flip {
            let (c, d) = self.edges[j];
            (d, c)
        } else {
            self.edges[j]
        };
        if a == d || c == b || self.contains(a, d) || self.contains(c, b) {
            return false;
        }
        self.occupied.remove(&pair_key(a, b));
        self.occupied.remove(&pair_key(c, d));
        self.occupied.insert(pair_key(a, d));
        self.occupied.insert(pair_key(c, b));
        let (xa, xb, xc, xd) = (
            self.excess(a),
            self.excess(b),
            self.excess(c),
            self.excess(d),
        );
        self.cross += xa * xd + xc * xb - xa * xb - xc * xd;
        self.edges[i] = (a, d);
        self.edges[j] = (c, b);
        true
    }

    pub(crate) fn moments(&self) -> PairMoments {
        let mut m = PairMoments {
            n: 2 * self.edges.len() as i128,
            sxy: 2 * self.cross,
            ..PairMoments::default()
        };
        for &d in &self.degrees {
            let (d, x) = (d as i128, d as i128 - 1);
            m.sx += d * x;
            m.sxx += d * x * x;
        }
        m.sy = m.sx;
        m.syy = m.sxx;
        m
    }

    /// Degree assortativity of the backbone (excess degrees, both
    /// orientations of each edge).
    pub fn assortativity(&self) -> Result<f64> {
        self.moments().pearson()
    }

    /// Change in the cross term if the swap were applied; `None` when the
    /// swap is not admissible.
    pub(crate) fn cross_delta(&self, i: usize, j: usize, flip: bool) -> Option<i128> {
        if i == j {
            return None;
        }
        let (a, b) = self.edges[i];
        let (c, d) = if flip {
            let (c, d) = self.edges[j];
            (d, c)
        } else {
            self.edges[j]
        };
        if a == d || c == b || self.contains(a, d) || self.contains(c, b) {
            return None;
        }
        let (xa, xb, xc, xd) = (
            self.excess(a),
            self.excess(b),
            self.excess(c),
            self.excess(d),
        );
        Some(xa * xd + xc * xb - xa * xb - xc * xd)
    }

    pub(crate) fn cross(&self) -> i128 {
        self.cross
    }
}

/// Subgraph holding only arcs that belong to mutual dyads.
pub fn mutual_subgraph(g: &WeightedDigraph) -> WeightedDigraph {
    let mut b = GraphBuilder::with_capacity(g.vertex_count(), g.arc_count());
    for d in g.mutual_dyads() {
        b.add_arc(d.a.0, d.b.0, d.w_ab).expect("valid arc");
        b.add_arc(d.b.0, d.a.0, d.w_ba).expect("valid arc");
    }
    let sub = b.finish().0;
    match g.labels() {
        Some(l) => sub.with_labels(l.to_vec()).expect("same vertex count"),
        None => sub,
    }
}

/// Randomises the mutual backbone with Maslov-Sneppen double-edge swaps,
/// then reattaches each vertex's original mutual out-weights to its new
/// partners with [`reattach_weights`].
pub fn maslov_sneppen_rewire<R: Rng + ?Sized>(
    g: &WeightedDigraph,
    cfg: &RegimeConfig,
    rng: &mut R,
) -> Result<RewireOutcome> {
    let base = if cfg.keep_one_way {
        g.clone()
    } else {
        mutual_subgraph(g)
    };
    let mut bb = Backbone::from_graph(&base);
    let m = bb.edge_count();
    if m < 2 {
        return Err(Error::Domain(format!(
            "rewiring needs at least 2 mutual dyads, found {m}"
        )));
    }
    let initial = bb.assortativity().ok();
    let budget = cfg.swap_multiplier as u64 * m as u64;
    let check_every = (m as u64 / 10).max(1);
    let mut attempted = 0u64;
    let mut accepted = 0u64;
    while attempted < budget {
        let i = rng.random_range(0..m);
        let j = rng.random_range(0..m);
        let flip = rng.random::<bool>();
        attempted += 1;
        if bb.try_swap(i, j, flip) {
            accepted += 1;
        }
        if let Some(threshold) = cfg.early_stop {
            if attempted.is_multiple_of(check_every) {
                if let Ok(r) = bb.assortativity() {
                    if r.abs() < threshold {
                        break;
                    }
                }
            }
        }
    }
    let stalled = accepted == 0;
    if stalled {
        log::warn!("no admissible swap in {attempted} attempts; backbone left unchanged");
    }

    let mut topo = GraphBuilder::with_capacity(base.vertex_count(), base.arc_count());
    for a in base.arcs() {
        if !base.has_arc(a.target, a.source) {
            topo.add_arc(a.source.0, a.target.0, a.weight)?;
        }
    }
    for &(a, b) in bb.edges() {
        topo.add_arc(a, b, 1.0)?;
        topo.add_arc(b, a, 1.0)?;
    }
    let mut topo = topo.finish().0;
    if let Some(l) = base.labels() {
        topo = topo.with_labels(l.to_vec())?;
    }
    let graph = reattach_weights(&topo, &base, rng)?;
    Ok(RewireOutcome {
        graph,
        attempted_swaps: attempted,
        accepted_swaps: accepted,
        residual_assortativity: bb.assortativity().ok(),
        initial_assortativity: initial,
        stalled,
    })
}

/// Gives each vertex of `rewired` its original multiset of mutual-arc
/// out-weights, in a seeded random order over its new mutual partners.
/// One-way arcs keep their original weight.
pub fn reattach_weights<R: Rng + ?Sized>(
    rewired: &WeightedDigraph,
    original: &WeightedDigraph,
    rng: &mut R,
) -> Result<WeightedDigraph> {
    if rewired.vertex_count() != original.vertex_count() {
        return Err(Error::Integrity(format!(
            "vertex count {} differs from original {}",
            rewired.vertex_count(),
            original.vertex_count()
        )));
    }
    let orig_mutual = original.reciprocated_mask();
    let new_mutual = rewired.reciprocated_mask();
    let mut weights = vec![0.0; rewired.arc_count()];
    let mut pool: Vec<f64> = Vec::new();
    for v in 0..rewired.vertex_count() {
        pool.clear();
        pool.extend(
            original
                .range(v)
                .filter(|&i| orig_mutual[i])
                .map(|i| original.raw_weights()[i]),
        );
        let slots: Vec<usize> = rewired.range(v).filter(|&i| new_mutual[i]).collect();
        if slots.len() != pool.len() {
            return Err(Error::Integrity(format!(
                "vertex {v} has {} mutual partners after rewiring but {} before",
                slots.len(),
                pool.len()
            )));
        }
        pool.shuffle(rng);
        for (&slot, &w) in slots.iter().zip(&pool) {
            weights[slot] = w;
        }
        for i in rewired.range(v).filter(|&i| !new_mutual[i]) {
            let t = rewired.raw_targets()[i];
            match original.arc_index(v, t) {
                Some(j) if !orig_mutual[j] => weights[i] = original.raw_weights()[j],
                _ => {
                    return Err(Error::Integrity(format!(
                        "one-way arc {v} -> {t} has no one-way counterpart in the original"
                    )))
                }
            }
        }
    }
    rewired.with_weights(weights)
}

/// Every arc `i -> j` gets weight `w_i+ / k_i`, so each vertex splits its
/// strength evenly over its out-neighbours. Topology is unchanged.
pub fn equidisperse(g: &WeightedDigraph) -> WeightedDigraph {
    let strengths = g.out_strengths();
    let mut weights = Vec::with_capacity(g.arc_count());
    for (v, &s) in strengths.iter().enumerate() {
        let k = g.degree_unchecked(v);
        let w = s / k as f64;
        weights.extend(std::iter::repeat_n(w, k));
    }
    g.with_weights(weights)
        .expect("positive strengths give positive even shares")
}

/// A single regime cell built from `g`.
#[derive(Debug, Clone)]
pub struct RegimeGraph {
    pub regime: Regime,
    pub graph: WeightedDigraph,
    pub rewire: Option<RewireStats>,
}

pub fn apply_regime(g: &WeightedDigraph, cfg: &RegimeConfig) -> Result<RegimeGraph> {
    let base = if cfg.keep_one_way {
        g.clone()
    } else {
        mutual_subgraph(g)
    };
    let (graph, rewire) = if cfg.destroy_assortativity {
        let out = maslov_sneppen_rewire(&base, cfg, &mut seeded_rng(cfg.seed))?;
        let stats = out.stats();
        (out.graph, Some(stats))
    } else {
        (base, None)
    };
    let graph = if cfg.impose_equidispersion {
        equidisperse(&graph)
    } else {
        graph
    };
    Ok(RegimeGraph {
        regime: cfg.regime(),
        graph,
        rewire,
    })
}

/// The four cells of the design. Both rewired cells share one rewired
/// backbone so they differ only in weight dispersion.
#[derive(Debug, Clone)]
pub struct FourRegimes {
    pub observed: WeightedDigraph,
    pub observed_equidispersed: WeightedDigraph,
    pub rewired: WeightedDigraph,
    pub rewired_equidispersed: WeightedDigraph,
    pub rewire: RewireStats,
}

impl FourRegimes {
    pub fn get(&self, regime: Regime) -> &WeightedDigraph {
        match regime {
            Regime::Observed => &self.observed,
            Regime::ObservedEquidispersed => &self.observed_equidispersed,
            Regime::Rewired => &self.rewired,
            Regime::RewiredEquidispersed => &self.rewired_equidispersed,
        }
    }
}

pub fn four_regimes(g: &WeightedDigraph, seed: u64, swap_multiplier: u32) -> Result<FourRegimes> {
    four_regimes_with(
        g,
        &RegimeConfig {
            seed,
            swap_multiplier,
            ..RegimeConfig::default()
        },
    )
}

pub fn four_regimes_with(g: &WeightedDigraph, cfg: &RegimeConfig) -> Result<FourRegimes> {
    let observed = if cfg.keep_one_way {
        g.clone()
    } else {
        mutual_subgraph(g)
    };
    let out = maslov_sneppen_rewire(&observed, cfg, &mut seeded_rng(cfg.seed))?;
    let rewire = out.stats();
    Ok(FourRegimes {
        observed_equidispersed: equidisperse(&observed),
        rewired_equidispersed: equidisperse(&out.graph),
        rewired: out.graph,
        observed,
        rewire,
    })
}
