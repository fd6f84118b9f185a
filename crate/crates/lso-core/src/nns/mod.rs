//! Labeled nearest-neighbor search: predecessor sets, LCA labels and the
//! ultrametric, rooted and triangle search structures.

mod lca;
mod pred;
mod rooted;
mod triangle;
mod ultra;

pub use lca::{lca_from_labels, lca_labels, LcaEntry, LcaLabel};
pub use pred::PredecessorSet;
pub use rooted::{rooted_labels, RootedEntry, RootedLabel, RootedNns};
pub use triangle::{triangle_labels, TriangleEntry, TriangleLabel, TriangleNns};
pub use ultra::{ultrametric_labels, UltraLabel, UltraStrategy, UltrametricNns};
