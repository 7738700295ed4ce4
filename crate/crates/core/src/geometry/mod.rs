//! Polygons on the complex plane, the partition of the unit disc into
//! annular sectors, and the per-cell area features built on top of them.

mod disc;
mod partition;
mod polygon;

pub use disc::{check_scaled_row, star_area, uh_to_ud, RootsOfUnity};
pub use partition::{
    cell_coverage, partition_ud, AnnulusType, DiscPartition, PartitionSpec, SectorType,
    DEFAULT_ARC_RESOLUTION,
};
pub use polygon::{polygon_area, HalfPlane, Point, Polygon};
