//! File formats, the end-to-end pipeline and SVG previews around
//! [`datapal_core`].
//!
//! * [`dataset`]: chart data in JSON (scatter, line, bar).
//! * [`settings`]: run configuration as it arrives from flags or requests.
//! * [`terms`]: hue-term tables in TOML.
//! * [`pipeline`]: graph construction, weights, seeded (parallel) annealing.
//! * [`output`]: palette JSON, SVG rendering and trace CSV.

pub mod dataset;
mod error;
pub mod output;
pub mod pipeline;
pub mod settings;
pub mod terms;

pub use dataset::{ChartDataset, ChartKind, Marks};
pub use error::{Error, Result};
pub use output::{render_svg, trace_csv, EnergyDocument, PaletteDocument};
pub use pipeline::{load_name_matrix, run_pipeline, score_palette, RunOutput};
pub use settings::{GraphSettings, RunConfig, RunSettings};
