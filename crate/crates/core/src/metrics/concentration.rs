use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{VertexId, WeightedDigraph};

/// Herfindahl concentration of a vertex's outgoing activity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationScore {
    pub vertex: VertexId,
    /// `sum p_ij^2` over out-neighbours.
    pub h: f64,
    /// `h` rescaled so 0 is an even split and 1 is everything on one
    /// neighbour.
    pub h_star: f64,
}

/// Concentration of `v`'s outgoing weights. Requires out-degree >= 2.
pub fn concentration(g: &WeightedDigraph, v: VertexId) -> Result<ConcentrationScore> {
    let k = g.out_degree(v)?;
    if k < 2 {
        return Err(Error::InsufficientDegree {
            vertex: v,
            degree: k,
            required: 2,
        });
    }
    let strength = g.out_strengths()[v.index()];
    let weights = &g.raw_weights()[g.range(v.index())];
    Ok(score_from_weights(v, weights, strength))
}

pub(crate) fn score_from_weights(
    vertex: VertexId,
    weights: &[f64],
    strength: f64,
) -> ConcentrationScore {
    let k = weights.len() as f64;
    let even = 1.0 / k;
    let mut h = 0.0;
    let mut spread = 0.0;
    for &w in weights {
        let p = w / strength;
        h += p * p;
        spread += (p - even) * (p - even);
    }
    // sum (p - 1/k)^2 == h - 1/k when sum p == 1; this form stays >= 0 and is
    // exactly 0 for equal weights.
    let h_star = (spread * k / (k - 1.0)).clamp(0.0, 1.0);
    ConcentrationScore { vertex, h, h_star }
}

/// Scores for every vertex with out-degree >= 2, in vertex order.
pub fn all_concentration(g: &WeightedDigraph) -> Vec<ConcentrationScore> {
    let strengths = g.out_strengths();
    g.vertices()
        .filter(|v| g.degree_unchecked(v.index()) >= 2)
        .map(|v| {
            score_from_weights(
                v,
                &g.raw_weights()[g.range(v.index())],
                strengths[v.index()],
            )
        })
        .collect()
}
