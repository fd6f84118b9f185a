//! Padded partition covers, laminar chains, ultrametric covers and the
//! preorder triangle LSO they induce.

mod cover;
mod laminar;
mod ultra;

pub use cover::{build_padded_partition_cover, PaddedPartitionCover, Partition, MAX_PARTITIONS};
pub use laminar::{hierarchy_to_hst, laminarize, LaminarHierarchy};
pub use ultra::{
    build_ultrametric_cover, cover_padding, cover_preorder_to_triangle_lso, verify_ultrametric_cover, CoverReport,
    UltrametricCover,
};
