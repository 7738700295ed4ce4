//! Polygrid: an interpretable model for multilabel classification and label
//! ranking on psychometric assessments.
//!
//! Each assessment is drawn as a polygon on the unit disc, the disc is cut
//! into annular sectors, and the area the polygon covers in each sector is
//! the feature vector fed to a per-label linear readout. Every number shown
//! in an explanation diagram is a byproduct of that forward computation.

pub mod baselines;
pub mod cart;
pub mod data;
pub mod diagram;
pub mod error;
pub mod eval;
pub mod geometry;
pub mod labels;
pub mod model;
pub mod solvers;
pub mod stats;

pub use error::{PolygridError, Result};
