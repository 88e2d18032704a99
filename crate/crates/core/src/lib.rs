//! Weighted dyadic reciprocity for directed communication graphs.
//!
//! A mutual dyad `{i, j}` scores `R = |ln p_ij - ln p_ji|`, where
//! `p_ij = w_ij / w_i+` is the share of `i`'s outgoing activity that goes to
//! `j`. `R = 0` means both sides direct the same share of their activity at
//! each other. The crate computes `R` and its classes, the structural
//! quantities that drive it (degree assortativity, Herfindahl weight
//! concentration), and the null-model networks that separate those drivers:
//! degree-preserving rewiring and equidispersed weights.
//!
//! Modules:
//! * [`graph`]: immutable weighted digraph, mutual dyads, dyad census
//! * [`metrics`]: reciprocity, classification, concentration, assortativity
//! * [`nullmodels`]: rewiring, equidispersion, the four regime networks
//! * [`ingest`]: call-log aggregation and snapshot files
//! * [`synth`]: synthetic networks with tunable mixing and dispersion
//! * [`report`]: analysis reports and the regime comparison

pub mod error;
pub mod graph;
pub mod ingest;
pub mod metrics;
pub mod nullmodels;
pub mod report;
pub mod synth;

pub use error::{Error, Result};
pub use graph::{DyadCensus, GraphBuilder, MutualDyad, VertexId, WeightedDigraph};
