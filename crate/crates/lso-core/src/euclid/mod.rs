//! Euclidean and ℓp orderings: ball-carving triangle LSOs, the shifted-grid
//! classic LSO, and a Monte Carlo estimator for ball-intersection volumes.

mod grid;
mod scheme;
mod triangle;
mod volume;

pub use grid::{
    build_classic_grid_lso, build_classic_grid_lso_with_shifts, grid_branching, zigzag_path_of, zigzag_rank, GridLso,
    GridSummary, MAX_GRID_DIM,
};
pub use scheme::{ordering_scale_range, BallCarvingScheme, ClusterKey, ScaleClustering};
pub use triangle::{
    build_triangle_lso, build_triangle_lso_resampled, carve_ordering, max_stretch_setting, ResampleOutcome,
    TriangleLsoParams,
};
pub use volume::{estimate_volume_ratio, VolumeEstimate};
