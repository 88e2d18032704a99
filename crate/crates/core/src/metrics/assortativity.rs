use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::WeightedDigraph;

/// Which edge set degree correlation is measured over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AssortativityMode {
    /// Undirected backbone of mutual dyads. Each dyad contributes both
    /// orientations, so the coefficient is symmetric; degrees are mutual
    /// partner counts.
    #[default]
    MutualBackbone,
    /// Every directed arc `i -> j` contributes the pair
    /// (out-degree of `i`, in-degree of `j`).
    AllArcs,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AssortativityResult {
    pub r: f64,
    /// Ordered endpoint pairs the correlation was taken over.
    pub pair_count: u64,
}

/// Exact integer moment sums of a set of ordered degree pairs.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub(crate) struct PairMoments {
    pub n: i128,
    pub sx: i128,
    pub sy: i128,
    pub sxx: i128,
    pub syy: i128,
    pub sxy: i128,
}

impl PairMoments {
    #[inline]
    pub fn push(&mut self, x: u64, y: u64) {
        let (x, y) = (x as i128, y as i128);
        self.n += 1;
        self.sx += x;
        self.sy += y;
        self.sxx += x * x;
        self.syy += y * y;
        self.sxy += x * y;
    }

    pub fn pearson(&self) -> Result<f64> {
        let cov = self.n * self.sxy - self.sx * self.sy;
        let var_x = self.n * self.sxx - self.sx * self.sx;
        let var_y = self.n * self.syy - self.sy * self.sy;
        if var_x == 0 || var_y == 0 {
            return Err(Error::UndefinedCorrelation(
                "endpoint degrees have zero variance".into(),
            ));
        }
        let r = cov as f64 / ((var_x as f64).sqrt() * (var_y as f64).sqrt());
        Ok(r.clamp(-1.0, 1.0))
    }
}

/// Pearson correlation of excess degrees (degree - 1) across edge endpoints.
pub fn degree_assortativity(
    g: &WeightedDigraph,
    mode: AssortativityMode,
) -> Result<AssortativityResult> {
    let mut m = PairMoments::default();
    match mode {
        AssortativityMode::MutualBackbone => {
            let deg = g.mutual_degrees();
            for d in g.mutual_dyads() {
                let xa = deg[d.a.index()] as u64 - 1;
                let xb = deg[d.b.index()] as u64 - 1;
                m.push(xa, xb);
                m.push(xb, xa);
            }
            if m.n < 4 {
                return Err(Error::Degenerate(format!(
                    "need at least 2 mutual dyads, found {}",
                    m.n / 2
                )));
            }
        }
        AssortativityMode::AllArcs => {
            let out = g.out_degrees();
            let inn = g.in_degrees();
            for a in g.arcs() {
                m.push(
                    out[a.source.index()] as u64 - 1,
                    inn[a.target.index()] as u64 - 1,
                );
            }
            if m.n < 2 {
                return Err(Error::Degenerate(format!(
                    "need at least 2 arcs, found {}",
                    m.n
                )));
            }
        }
    }
    Ok(AssortativityResult {
        r: m.pearson()?,
        pair_count: m.n as u64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mutual(n: usize, edges: &[(u32, u32)]) -> WeightedDigraph {
        WeightedDigraph::from_arcs(
            n,
            edges.iter().flat_map(|&(a, b)| [(a, b, 1.0), (b, a, 1.0)]),
        )
        .unwrap()
    }

    fn clique(offset: u32, size: u32) -> Vec<(u32, u32)> {
        let mut e = vec![];
        for i in 0..size {
            for j in i + 1..size {
                e.push((offset + i, offset + j));
            }
        }
        e
    }

    #[test]
    fn star_is_perfectly_disassortative() {
        let g = mutual(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]);
        let res = degree_assortativity(&g, AssortativityMode::MutualBackbone).unwrap();
        assert_eq!(res.r, -1.0);
        assert_eq!(res.pair_count, 8);
    }

    #[test]
    fn disjoint_cliques_are_perfectly_assortative() {
        let mut e = clique(0, 3);
        e.extend(clique(3, 5));
        let g = mutual(8, &e);
        let res = degree_assortativity(&g, AssortativityMode::MutualBackbone).unwrap();
        assert_eq!(res.r, 1.0);
        assert_eq!(res.pair_count, 2 * 13);
    }

    #[test]
    fn regular_graph_is_undefined() {
        let g = mutual(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]);
        assert!(matches!(
            degree_assortativity(&g, AssortativityMode::MutualBackbone),
            Err(Error::UndefinedCorrelation(_))
        ));
    }

    #[test]
    fn too_few_dyads_is_degenerate() {
        let g = mutual(3, &[(0, 1)]);
        assert!(matches!(
            degree_assortativity(&g, AssortativityMode::MutualBackbone),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn all_arcs_mode_uses_out_in_degrees() {
        // 0 -> {1,2,3}, 1 -> 2, 2 -> 0
        let g = WeightedDigraph::from_arcs(
            4,
            [
                (0, 1, 1.0),
                (0, 2, 1.0),
                (0, 3, 1.0),
                (1, 2, 1.0),
                (2, 0, 1.0),
            ],
        )
        .unwrap();
        let res = degree_assortativity(&g, AssortativityMode::AllArcs).unwrap();
        // pairs (out-1, in-1): (2,0) (2,1) (2,0) (0,1) (0,0)
        let xs = [2.0, 2.0, 2.0, 0.0, 0.0];
        let ys = [0.0, 1.0, 0.0, 1.0, 0.0];
        let mx = xs.iter().sum::<f64>() / 5.0;
        let my = ys.iter().sum::<f64>() / 5.0;
        let cov: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let vx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        let vy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
        assert!((res.r - cov / (vx * vy).sqrt()).abs() < 1e-12);
        assert_eq!(res.pair_count, 5);
    }
}
