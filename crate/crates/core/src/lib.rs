//! Data-aware categorical color palette optimization.
//!
//! Given labeled 2-D marks (scatterplot points, resampled line series or bar
//! centers) and a background color, [`anneal::optimize`] searches CIELAB for
//! one color per class maximizing a weighted sum of three terms:
//!
//! * point distinctness: distance-weighted CIEDE2000 contrast between each
//!   mark and its spatial neighbors ([`scoring::point_distinctness`]),
//! * name difference: cosine distance between color-name count vectors
//!   ([`names::palette_name_difference`]),
//! * color discrimination: the smallest CIEDE2000 distance among the class
//!   colors and the background ([`scoring::color_discrimination`]).
//!
//! Every palette the optimizer keeps satisfies a hard minimum pairwise
//! distance `tau` (10 CIEDE2000 units by default).
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the CLI and the
//! HTTP service live in companion crates.
#![cfg_attr(not(test), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod anneal;
pub mod charts;
pub mod color;
mod error;
pub mod filter;
pub mod graph;
pub mod names;
pub mod scoring;

pub use anneal::{
    accept, optimize, propose, refine, AnnealConfig, AnnealResult, Observer, Progress, Start,
    TracePoint, Unobserved,
};
pub use charts::{bars_to_graph, discretize_lines, BarChartData, Canvas, LineChartData};
pub use color::{ciede2000, lab_to_srgb, srgb_to_lab, LabColor, RgbColor};
pub use error::{Error, Result};
pub use filter::{passes_filter, sample_candidate, ColorFilter, HueTerm, HueTermTable, TermRule};
pub use graph::{alpha_shape_graph, delaunay, knn_graph, LabeledPointSet, NeighborGraph, Point};
pub use names::{name_difference, palette_name_difference, NameCountMatrix, NameVector};
pub use scoring::{
    color_discrimination, energy_breakdown, point_distinctness, precompute_pair_weights,
    total_energy, ClassPairWeights, EnergyBreakdown, Palette, ScoreWeights,
};
