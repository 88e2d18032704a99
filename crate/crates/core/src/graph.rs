//! Weighted directed graph storage, mutual-dyad enumeration and the dyad
//! census.
//!
//! A [`WeightedDigraph`] is immutable once built. Arcs are held in
//! compressed-sparse-row form, grouped by source and sorted by target, so
//! arc lookup is a binary search and every derived quantity is independent
//! of the order in which arcs were supplied.

use std::borrow::Cow;
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Dense vertex index, `0..vertex_count`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
#[repr(transparent)]
pub struct VertexId(pub u32);

impl VertexId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<u32> for VertexId {
    fn from(v: u32) -> Self {
        VertexId(v)
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arc {
    pub source: VertexId,
    pub target: VertexId,
    pub weight: f64,
}

/// An unordered vertex pair joined by arcs in both directions, stored with
/// `a < b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MutualDyad {
    pub a: VertexId,
    pub b: VertexId,
    pub w_ab: f64,
    pub w_ba: f64,
}

/// UMAN dyad census.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DyadCensus {
    pub mutual: u64,
    pub asymmetric: u64,
    pub null_dyads: u64,
    pub total_arcs: u64,
}

/// Counters reported by [`GraphBuilder::finish`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct BuildStats {
    pub self_loops_dropped: u64,
    /// Arcs that repeated an earlier (source, target) pair and were summed in.
    pub duplicates_merged: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedDigraph {
    offsets: Vec<usize>,
    targets: Vec<u32>,
    weights: Vec<f64>,
    out_strengths: Vec<f64>,
    labels: Option<Vec<String>>,
}

/// Accumulates arcs and produces a finalized [`WeightedDigraph`].
///
/// Self-loops are dropped and counted. Repeated (source, target) pairs are
/// merged by summing their weights.
#[derive(Debug, Clone)]
pub struct GraphBuilder {
    vertex_count: usize,
    arcs: Vec<(u32, u32, f64)>,
    stats: BuildStats,
}

impl GraphBuilder {
    pub fn new(vertex_count: usize) -> Self {
        GraphBuilder {
            vertex_count,
            arcs: Vec::new(),
            stats: BuildStats::default(),
        }
    }

    pub fn with_capacity(vertex_count: usize, arcs: usize) -> Self {
        GraphBuilder {
            vertex_count,
            arcs: Vec::with_capacity(arcs),
            stats: BuildStats::default(),
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn add_arc(&mut self, source: u32, target: u32, weight: f64) -> Result<()> {
        for v in [source, target] {
            if v as usize >= self.vertex_count {
                return Err(Error::InvalidVertex {
                    vertex: VertexId(v),
                    vertex_count: self.vertex_count,
                });
            }
        }
        if !(weight.is_finite() && weight > 0.0) {
            return Err(Error::Domain(format!(
                "arc {source} -> {target} has non-positive or non-finite weight {weight}"
            )));
        }
        if source == target {
            self.stats.self_loops_dropped += 1;
            return Ok(());
        }
        self.arcs.push((source, target, weight));
        Ok(())
    }

    pub fn finish(mut self) -> (WeightedDigraph, BuildStats) {
        // Weight is the last sort key so duplicate merging sums in a fixed order.
        self.arcs.sort_unstable_by(|x, y| {
            (x.0, x.1)
                .cmp(&(y.0, y.1))
                .then_with(|| x.2.total_cmp(&y.2))
        });
        let mut stats = self.stats;
        let mut merged: Vec<(u32, u32, f64)> = Vec::with_capacity(self.arcs.len());
        for (s, t, w) in self.arcs {
            match merged.last_mut() {
                Some(last) if last.0 == s && last.1 == t => {
                    last.2 += w;
                    stats.duplicates_merged += 1;
                }
                _ => merged.push((s, t, w)),
            }
        }

        let n = self.vertex_count;
        let mut offsets = vec![0usize; n + 1];
        for &(s, _, _) in &merged {
            offsets[s as usize + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let targets: Vec<u32> = merged.iter().map(|a| a.1).collect();
        let weights: Vec<f64> = merged.iter().map(|a| a.2).collect();
        let graph = WeightedDigraph::from_csr(offsets, targets, weights, None);
        (graph, stats)
    }
}

impl WeightedDigraph {
    /// A graph with `vertex_count` isolated vertices.
    pub fn empty(vertex_count: usize) -> Self {
        GraphBuilder::new(vertex_count).finish().0
    }

    /// Builds a graph from `(source, target, weight)` triples.
    pub fn from_arcs<I>(vertex_count: usize, arcs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (u32, u32, f64)>,
    {
        let mut builder = GraphBuilder::new(vertex_count);
        for (s, t, w) in arcs {
            builder.add_arc(s, t, w)?;
        }
        Ok(builder.finish().0)
    }

    fn from_csr(
        offsets: Vec<usize>,
        targets: Vec<u32>,
        weights: Vec<f64>,
        labels: Option<Vec<String>>,
    ) -> Self {
        let out_strengths = offsets
            .windows(2)
            .map(|w| weights[w[0]..w[1]].iter().sum())
            .collect();
        WeightedDigraph {
            offsets,
            targets,
            weights,
            out_strengths,
            labels,
        }
    }

    /// Same topology and labels, new per-arc weights in CSR arc order.
    pub(crate) fn with_weights(&self, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != self.weights.len() {
            return Err(Error::Integrity(format!(
                "expected {} weights, got {}",
                self.weights.len(),
                weights.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::Domain(format!("non-positive arc weight {w}")));
        }
        Ok(Self::from_csr(
            self.offsets.clone(),
            self.targets.clone(),
            weights,
            self.labels.clone(),
        ))
    }

    /// Attaches external vertex labels, one per vertex.
    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.vertex_count() {
            return Err(Error::Integrity(format!(
                "{} labels for {} vertices",
                labels.len(),
                self.vertex_count()
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// External id of `v`, or its dense index when no labels are attached.
    pub fn label(&self, v: VertexId) -> Cow<'_, str> {
        match &self.labels {
            Some(l) => Cow::Borrowed(l[v.index()].as_str()),
            None => Cow::Owned(v.0.to_string()),
        }
    }

    #[inline]
    pub fn vertex_count(&self) -> usize {
        self.offsets.len() - 1
    }

    #[inline]
    pub fn arc_count(&self) -> usize {
        self.targets.len()
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.vertex_count() as u32).map(VertexId)
    }

    pub fn check_vertex(&self, v: VertexId) -> Result<()> {
        if v.index() < self.vertex_count() {
            Ok(())
        } else {
            Err(Error::InvalidVertex {
                vertex: v,
                vertex_count: self.vertex_count(),
            })
        }
    }

    /// Sum of weights on arcs leaving `v`; zero for a sink.
    pub fn out_strength(&self, v: VertexId) -> Result<f64> {
        self.check_vertex(v)?;
        Ok(self.out_strengths[v.index()])
    }

    pub fn out_degree(&self, v: VertexId) -> Result<usize> {
        self.check_vertex(v)?;
        Ok(self.degree_unchecked(v.index()))
    }

    pub fn out_strengths(&self) -> &[f64] {
        &self.out_strengths
    }

    pub fn out_degrees(&self) -> Vec<usize> {
        self.offsets.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn in_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0usize; self.vertex_count()];
        for &t in &self.targets {
            deg[t as usize] += 1;
        }
        deg
    }

    #[inline]
    pub(crate) fn degree_unchecked(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    #[inline]
    pub(crate) fn range(&self, v: usize) -> std::ops::Range<usize> {
        self.offsets[v]..self.offsets[v + 1]
    }

    #[inline]
    pub(crate) fn raw_targets(&self) -> &[u32] {
        &self.targets
    }

    #[inline]
    pub(crate) fn raw_weights(&self) -> &[f64] {
        &self.weights
    }

    /// Outgoing arcs of `v` as `(target, weight)`, sorted by target.
    pub fn out_arcs(&self, v: VertexId) -> Result<impl Iterator<Item = (VertexId, f64)> + '_> {
        self.check_vertex(v)?;
        let r = self.range(v.index());
        Ok(self.targets[r.clone()]
            .iter()
            .zip(&self.weights[r])
            .map(|(&t, &w)| (VertexId(t), w)))
    }

    /// All arcs in (source, target) order.
    pub fn arcs(&self) -> impl Iterator<Item = Arc> + '_ {
        (0..self.vertex_count()).flat_map(move |s| {
            self.range(s).map(move |i| Arc {
                source: VertexId(s as u32),
                target: VertexId(self.targets[i]),
                weight: self.weights[i],
            })
        })
    }

    #[inline]
    pub(crate) fn arc_index(&self, from: usize, to: u32) -> Option<usize> {
        let r = self.range(from);
        self.targets[r.clone()]
            .binary_search(&to)
            .ok()
            .map(|i| r.start + i)
    }

    /// Weight of `from -> to`, or `None` when the arc is absent or either id
    /// is out of range.
    pub fn weight(&self, from: VertexId, to: VertexId) -> Option<f64> {
        if from.index() >= self.vertex_count() {
            return None;
        }
        self.arc_index(from.index(), to.0).map(|i| self.weights[i])
    }

    pub fn has_arc(&self, from: VertexId, to: VertexId) -> bool {
        self.weight(from, to).is_some()
    }

    /// `w_ij / w_i+`: the share of `i`'s outgoing activity directed at `j`.
    pub fn normalized_weight(&self, i: VertexId, j: VertexId) -> Result<f64> {
        self.check_vertex(i)?;
        self.check_vertex(j)?;
        let w = self
            .weight(i, j)
            .ok_or(Error::MissingArc { from: i, to: j })?;
        Ok(w / self.out_strengths[i.index()])
    }

    /// Mutual dyads in ascending `(a, b)` order, each exactly once.
    pub fn mutual_dyads(&self) -> impl Iterator<Item = MutualDyad> + '_ {
        (0..self.vertex_count()).flat_map(move |a| {
            let r = self.range(a);
            let start = r.start + self.targets[r.clone()].partition_point(|&t| (t as usize) <= a);
            (start..r.end).filter_map(move |i| {
                let b = self.targets[i];
                self.arc_index(b as usize, a as u32).map(|j| MutualDyad {
                    a: VertexId(a as u32),
                    b: VertexId(b),
                    w_ab: self.weights[i],
                    w_ba: self.weights[j],
                })
            })
        })
    }

    /// Per-arc flag: true when the reverse arc exists.
    pub(crate) fn reciprocated_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.arc_count()];
        for a in 0..self.vertex_count() {
            for i in self.range(a) {
                mask[i] = self.arc_index(self.targets[i] as usize, a as u32).is_some();
            }
        }
        mask
    }

    /// Number of mutual partners of each vertex.
    pub fn mutual_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0usize; self.vertex_count()];
        for d in self.mutual_dyads() {
            deg[d.a.index()] += 1;
            deg[d.b.index()] += 1;
        }
        deg
    }

    pub fn dyad_census(&self) -> DyadCensus {
        let mutual = self.mutual_dyads().count() as u64;
        let total_arcs = self.arc_count() as u64;
        let asymmetric = total_arcs - 2 * mutual;
        let v = self.vertex_count() as u64;
        let pairs = v * v.saturating_sub(1) / 2;
        DyadCensus {
            mutual,
            asymmetric,
            null_dyads: pairs - mutual - asymmetric,
            total_arcs,
        }
    }

    /// SHA-256 over the vertex count and the arc list (weights as IEEE bits).
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        h.update((self.vertex_count() as u64).to_le_bytes());
        for a in self.arcs() {
            h.update(a.source.0.to_le_bytes());
            h.update(a.target.0.to_le_bytes());
            h.update(a.weight.to_bits().to_le_bytes());
        }
        hex::encode(h.finalize())
    }

    /// True when every weight is a whole number.
    pub fn has_integer_weights(&self) -> bool {
        self.weights.iter().all(|w| w.fract() == 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(n: usize, arcs: &[(u32, u32, f64)]) -> WeightedDigraph {
        WeightedDigraph::from_arcs(n, arcs.iter().copied()).unwrap()
    }

    #[test]
    fn strength_is_sum_of_out_weights() {
        let g = g(3, &[(0, 1, 6.0), (0, 2, 2.0), (1, 0, 4.0)]);
        assert_eq!(g.out_strength(VertexId(0)).unwrap(), 8.0);
        assert_eq!(g.out_strength(VertexId(2)).unwrap(), 0.0);
        assert_eq!(g.out_degree(VertexId(0)).unwrap(), 2);
        assert!(matches!(
            g.out_strength(VertexId(3)),
            Err(Error::InvalidVertex { .. })
        ));
    }

    #[test]
    fn normalized_weight_examples() {
        let g = g(3, &[(0, 1, 6.0), (0, 2, 2.0), (1, 0, 4.0)]);
        assert_eq!(g.normalized_weight(VertexId(0), VertexId(1)).unwrap(), 0.75);
        assert_eq!(g.normalized_weight(VertexId(1), VertexId(0)).unwrap(), 1.0);
        assert!(matches!(
            g.normalized_weight(VertexId(2), VertexId(0)),
            Err(Error::MissingArc { .. })
        ));
    }

    #[test]
    fn census_examples() {
        let c = WeightedDigraph::empty(5).dyad_census();
        assert_eq!(
            c,
            DyadCensus {
                mutual: 0,
                asymmetric: 0,
                null_dyads: 10,
                total_arcs: 0
            }
        );
        // 1->2, 2->1, 3->4 with ids shifted to 0-based
        let c = g(4, &[(0, 1, 1.0), (1, 0, 1.0), (2, 3, 1.0)]).dyad_census();
        assert_eq!(
            c,
            DyadCensus {
                mutual: 1,
                asymmetric: 1,
                null_dyads: 4,
                total_arcs: 3
            }
        );
    }

    #[test]
    fn census_identity_at_reported_scale() {
        // 16.8M one-way arcs plus 8.6M mutual dyads give the ~34M arcs observed.
        let mutual: u64 = 8_600_000;
        let asymmetric: u64 = 16_800_000;
        let total = asymmetric + 2 * mutual;
        assert_eq!(total, 34_000_000);
        assert!((asymmetric as f64 / total as f64 - 0.49).abs() < 0.01);
    }

    #[test]
    fn mutual_dyads_excludes_one_way() {
        let two_way: Vec<_> = g(2, &[(0, 1, 3.0), (1, 0, 5.0)]).mutual_dyads().collect();
        assert_eq!(
            two_way,
            vec![MutualDyad {
                a: VertexId(0),
                b: VertexId(1),
                w_ab: 3.0,
                w_ba: 5.0
            }]
        );
        assert_eq!(g(2, &[(0, 1, 3.0)]).mutual_dyads().count(), 0);
    }

    #[test]
    fn builder_drops_self_loops_and_merges_duplicates() {
        let mut b = GraphBuilder::new(3);
        b.add_arc(0, 0, 1.0).unwrap();
        b.add_arc(0, 1, 2.0).unwrap();
        b.add_arc(0, 1, 3.0).unwrap();
        let (g, stats) = b.finish();
        assert_eq!(stats.self_loops_dropped, 1);
        assert_eq!(stats.duplicates_merged, 1);
        assert_eq!(g.arc_count(), 1);
        assert_eq!(g.weight(VertexId(0), VertexId(1)), Some(5.0));
    }

    #[test]
    fn builder_rejects_bad_input() {
        let mut b = GraphBuilder::new(2);
        assert!(b.add_arc(0, 2, 1.0).is_err());
        assert!(b.add_arc(0, 1, 0.0).is_err());
        assert!(b.add_arc(0, 1, -1.0).is_err());
        assert!(b.add_arc(0, 1, f64::NAN).is_err());
    }

    #[test]
    fn labels_round_through() {
        let g = g(2, &[(0, 1, 1.0)])
            .with_labels(vec!["alice".into(), "bob".into()])
            .unwrap();
        assert_eq!(g.label(VertexId(1)), "bob");
        assert!(WeightedDigraph::empty(2).with_labels(vec![]).is_err());
    }
}
