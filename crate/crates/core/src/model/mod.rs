//! The Polygrid model: configuration, fitting, prediction and the fitted
//! instance document.

mod config;
mod fit;
mod instance;
mod order;

pub use config::{
    default_grid, CutoffScheme, GridSpec, PolygridConfig, VertexOrder, DEFAULT_THRESHOLD_GRANULARITY,
};
pub use fit::{fit, fit_dataset, fit_labelranking, fit_multilabel, select_thresholds, tree_radii, Thresholds};
pub use instance::{
    decide, rank_labels, LabelReadouts, PolygridInstance, Prediction, FORMAT_VERSION,
};
pub use order::{canonical_cycle, cyclic_arrangements, order_vertices, reorder_row};
