//! Per-dyad and per-vertex measures: weighted reciprocity and its classes,
//! the equidispersion closed form, Herfindahl concentration, and degree
//! assortativity.
//!
//! Every function here is a pure read of an immutable graph.

mod assortativity;
mod concentration;
mod distribution;
mod reciprocity;

pub(crate) use assortativity::PairMoments;
pub use assortativity::{degree_assortativity, AssortativityMode, AssortativityResult};
pub use concentration::{all_concentration, concentration, ConcentrationScore};
pub use distribution::{
    reciprocity_distribution, HistogramBin, ReciprocityHistogram, DEFAULT_BIN_WIDTH,
};
pub use reciprocity::{
    all_reciprocity, classify, equidispersion_prediction, reciprocity, reciprocity_between,
    reciprocity_from_parts, reciprocity_ratio_form, DyadClass, ReciprocityRecord,
    CLASS_BOUNDARY_SLACK, PARTIAL_MAX, RECIPROCAL_MAX,
};
