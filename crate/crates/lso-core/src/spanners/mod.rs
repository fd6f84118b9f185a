//! Spanners derived from orderings and decompositions: 2-hop path-reporting
//! spanners, fault-tolerant spanners and spanner oracles.

mod cover;
mod edges;
mod ft;
mod lso;
mod oracle;
mod spd;
mod tz;

pub use cover::{build_sparse_cover, sparse_cover_spanner, SparseCover, SparseCoverSpanner, MAX_SCALES};
pub use edges::{check_path_reporting, graph_stretch, path_weight, Adjacency, EdgeSet, PathReporting, SpannerReport};
pub use ft::{ft_spanner_from_family, FaultReport, FtSpanner};
pub use lso::{
    pr_spanner_from_classic, pr_spanner_from_rooted, pr_spanner_from_triangle, OrderingSpanner, RootedSpanner,
};
pub use oracle::{
    spanner_oracle_classic, spanner_oracle_triangle, OracleOutput, OracleRule, OracleStretchReport, SpannerOracle,
};
pub use spd::{heavy_path_spd, parse_spd, spd_spanner, treewidth_spd, Spd, SpdEntry, SpdNode, SpdSpanner};
pub use tz::{tz_bunch_threshold, tz_spanner, TzOracle};
