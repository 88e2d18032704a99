use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{MutualDyad, VertexId, WeightedDigraph};

/// `ln 1.5`: upper bound of the reciprocal class.
pub const RECIPROCAL_MAX: f64 = 0.405_465_108_108_164_4;
/// `ln 9`: upper bound of the partially reciprocal class.
pub const PARTIAL_MAX: f64 = 2.197_224_577_336_219_6;
/// Slack on the class boundaries so an exact 3:2 or 9:1 ratio still lands
/// in the lower class after rounding.
pub const CLASS_BOUNDARY_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DyadClass {
    Reciprocal,
    PartiallyReciprocal,
    NonReciprocal,
}

impl DyadClass {
    pub const ALL: [DyadClass; 3] = [
        DyadClass::Reciprocal,
        DyadClass::PartiallyReciprocal,
        DyadClass::NonReciprocal,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DyadClass::Reciprocal => "reciprocal",
            DyadClass::PartiallyReciprocal => "partially_reciprocal",
            DyadClass::NonReciprocal => "non_reciprocal",
        }
    }

    pub(crate) fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReciprocityRecord {
    pub dyad: MutualDyad,
    pub p_ab: f64,
    pub p_ba: f64,
    /// Imbalance in nats; 0 means both sides direct the same share of their
    /// activity at each other.
    pub r_value: f64,
    pub class: DyadClass,
}

/// Maps an imbalance score to its class. Boundaries belong to the more
/// reciprocal side: `[0, ln 1.5]`, `(ln 1.5, ln 9]`, `(ln 9, inf)`, each
/// widened by [`CLASS_BOUNDARY_SLACK`].
pub fn classify(r_value: f64) -> Result<DyadClass> {
    if !r_value.is_finite() || r_value < 0.0 {
        return Err(Error::Domain(format!(
            "reciprocity score must be finite and non-negative, got {r_value}"
        )));
    }
    Ok(if r_value <= RECIPROCAL_MAX + CLASS_BOUNDARY_SLACK {
        DyadClass::Reciprocal
    } else if r_value <= PARTIAL_MAX + CLASS_BOUNDARY_SLACK {
        DyadClass::PartiallyReciprocal
    } else {
        DyadClass::NonReciprocal
    })
}

/// `|ln p_ab - ln p_ba|` from raw arc weights and sender strengths.
#[inline]
pub fn reciprocity_from_parts(w_ab: f64, w_ba: f64, strength_a: f64, strength_b: f64) -> f64 {
    ((w_ab / strength_a).ln() - (w_ba / strength_b).ln()).abs()
}

/// The same score written as a single log of a product of ratios,
/// `|ln[(w_ab / w_ba)(w_b+ / w_a+)]|`.
#[inline]
pub fn reciprocity_ratio_form(w_ab: f64, w_ba: f64, strength_a: f64, strength_b: f64) -> f64 {
    ((w_ab / w_ba) * (strength_b / strength_a)).ln().abs()
}

/// Scores one mutual dyad. The dyad's weights must match the graph.
pub fn reciprocity(g: &WeightedDigraph, d: &MutualDyad) -> Result<ReciprocityRecord> {
    let w_ab = g.weight(d.a, d.b);
    let w_ba = g.weight(d.b, d.a);
    match (w_ab, w_ba) {
        (Some(w_ab), Some(w_ba)) if w_ab == d.w_ab && w_ba == d.w_ba => Ok(record_unchecked(g, d)),
        (Some(_), Some(_)) => Err(Error::Integrity(format!(
            "dyad ({}, {}) weights do not match the graph",
            d.a, d.b
        ))),
        _ => Err(Error::NotMutual { a: d.a, b: d.b }),
    }
}

/// Scores the pair `{i, j}` in either orientation.
pub fn reciprocity_between(
    g: &WeightedDigraph,
    i: VertexId,
    j: VertexId,
) -> Result<ReciprocityRecord> {
    g.check_vertex(i)?;
    g.check_vertex(j)?;
    let (a, b) = if i < j { (i, j) } else { (j, i) };
    match (g.weight(a, b), g.weight(b, a)) {
        (Some(w_ab), Some(w_ba)) => Ok(record_unchecked(g, &MutualDyad { a, b, w_ab, w_ba })),
        _ => Err(Error::NotMutual { a: i, b: j }),
    }
}

fn record_unchecked(g: &WeightedDigraph, d: &MutualDyad) -> ReciprocityRecord {
    let s = g.out_strengths();
    let p_ab = d.w_ab / s[d.a.index()];
    let p_ba = d.w_ba / s[d.b.index()];
    let r_value = (p_ab.ln() - p_ba.ln()).abs();
    ReciprocityRecord {
        dyad: *d,
        p_ab,
        p_ba,
        r_value,
        // r_value is finite and non-negative for positive weights
        class: classify(r_value).unwrap_or(DyadClass::NonReciprocal),
    }
}

/// Scores every mutual dyad, in canonical `(a, b)` order regardless of how
/// many threads do the work.
pub fn all_reciprocity(g: &WeightedDigraph) -> Vec<ReciprocityRecord> {
    (0..g.vertex_count() as u32)
        .into_par_iter()
        .flat_map_iter(|a| {
            let a = VertexId(a);
            let r = g.range(a.index());
            let targets = &g.raw_targets()[r.clone()];
            let weights = &g.raw_weights()[r];
            targets
                .iter()
                .zip(weights)
                .filter(move |(&b, _)| b > a.0)
                .filter_map(move |(&b, &w_ab)| {
                    let b = VertexId(b);
                    g.weight(b, a)
                        .map(|w_ba| record_unchecked(g, &MutualDyad { a, b, w_ab, w_ba }))
                })
                .collect::<Vec<_>>()
        })
        .collect()
}

/// Predicted score when both endpoints split their activity evenly:
/// `|ln k_b - ln k_a|`.
pub fn equidispersion_prediction(k_a: usize, k_b: usize) -> Result<f64> {
    if k_a == 0 || k_b == 0 {
        return Err(Error::Domain(format!(
            "out-degrees must be at least 1, got ({k_a}, {k_b})"
        )));
    }
    Ok(((k_b as f64).ln() - (k_a as f64).ln()).abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(n: usize, arcs: &[(u32, u32, f64)]) -> WeightedDigraph {
        WeightedDigraph::from_arcs(n, arcs.iter().copied()).unwrap()
    }

    #[test]
    fn threshold_constants_are_the_logs() {
        assert_eq!(RECIPROCAL_MAX, 1.5f64.ln());
        assert_eq!(PARTIAL_MAX, 9.0f64.ln());
    }

    #[test]
    fn isolated_pair_is_fully_reciprocal() {
        let g = graph(2, &[(0, 1, 17.0), (1, 0, 2.0)]);
        let rec = reciprocity_between(&g, VertexId(1), VertexId(0)).unwrap();
        assert_eq!(rec.r_value, 0.0);
        assert_eq!(rec.class, DyadClass::Reciprocal);
    }

    #[test]
    fn hand_evaluated_dyad() {
        // a=0 -> b=1 (6), a -> c=2 (2); b -> a (4)
        let g = graph(3, &[(0, 1, 6.0), (0, 2, 2.0), (1, 0, 4.0)]);
        let d = g.mutual_dyads().next().unwrap();
        let rec = reciprocity(&g, &d).unwrap();
        assert_eq!(rec.p_ab, 0.75);
        assert_eq!(rec.p_ba, 1.0);
        assert!((rec.r_value - 0.287_682_072_451_780_9).abs() < 1e-15);
    }

    #[test]
    fn one_way_pair_is_rejected() {
        let g = graph(3, &[(0, 1, 6.0), (1, 2, 1.0)]);
        assert!(matches!(
            reciprocity_between(&g, VertexId(0), VertexId(1)),
            Err(Error::NotMutual { .. })
        ));
        let fake = MutualDyad {
            a: VertexId(0),
            b: VertexId(1),
            w_ab: 6.0,
            w_ba: 1.0,
        };
        assert!(reciprocity(&g, &fake).is_err());
    }

    #[test]
    fn classify_examples_and_boundaries() {
        assert_eq!(classify(0.0).unwrap(), DyadClass::Reciprocal);
        assert_eq!(classify(1.0).unwrap(), DyadClass::PartiallyReciprocal);
        assert_eq!(classify(2.5).unwrap(), DyadClass::NonReciprocal);
        assert_eq!(classify(1.5f64.ln()).unwrap(), DyadClass::Reciprocal);
        assert_eq!(
            classify(9.0f64.ln()).unwrap(),
            DyadClass::PartiallyReciprocal
        );
        assert_eq!(
            classify(PARTIAL_MAX + 1e-9).unwrap(),
            DyadClass::NonReciprocal
        );
        // -ln(2/3) rounds one ulp above ln 1.5
        assert_eq!(
            classify(-(2.0f64 / 3.0).ln()).unwrap(),
            DyadClass::Reciprocal
        );
        assert!(classify(-1e-300).is_err());
        assert!(classify(f64::NAN).is_err());
        assert!(classify(f64::INFINITY).is_err());
    }

    #[test]
    fn equidispersion_prediction_examples() {
        assert_eq!(equidispersion_prediction(5, 5).unwrap(), 0.0);
        assert_eq!(equidispersion_prediction(1, 1).unwrap(), 0.0);
        assert!((equidispersion_prediction(2, 6).unwrap() - 3f64.ln()).abs() < 1e-15);
        assert!(equidispersion_prediction(0, 3).is_err());
    }

    #[test]
    fn equidispersion_prediction_matches_constructed_graph() {
        // a=0 has out-degree 2, b=1 has out-degree 6, equal weights everywhere.
        let mut arcs = vec![(0, 1, 5.0), (0, 2, 5.0)];
        for t in [0u32, 3, 4, 5, 6, 7] {
            arcs.push((1, t, 2.0));
        }
        let g = graph(8, &arcs);
        let rec = reciprocity_between(&g, VertexId(0), VertexId(1)).unwrap();
        let predicted = equidispersion_prediction(2, 6).unwrap();
        assert!((rec.r_value - predicted).abs() < 1e-12);
    }

    #[test]
    fn all_reciprocity_is_sorted_and_complete() {
        let g = graph(
            4,
            &[
                (0, 1, 1.0),
                (1, 0, 2.0),
                (2, 3, 1.0),
                (3, 2, 1.0),
                (0, 3, 1.0),
                (3, 0, 9.0),
            ],
        );
        let recs = all_reciprocity(&g);
        let keys: Vec<_> = recs.iter().map(|r| (r.dyad.a.0, r.dyad.b.0)).collect();
        assert_eq!(keys, vec![(0, 1), (0, 3), (2, 3)]);
    }
}
