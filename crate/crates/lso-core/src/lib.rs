//! Locality-sensitive orderings over finite metric spaces and the structures
//! built from them: hop-bounded path spanners, labeled nearest-neighbor
//! search and path-reporting spanners.

pub mod datasets;
pub mod doubling;
pub mod error;
pub mod euclid;
pub mod hop;
pub mod hst;
pub mod io;
pub mod lso;
pub mod metric;
pub mod nns;
pub mod rng;
pub mod spanners;

pub use error::{Error, Result};
