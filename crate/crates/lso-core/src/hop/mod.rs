//! Hop-bounded path spanners on the path graph `1..=n`.

mod ft;
mod multi;
mod two_hop;

pub use ft::FtTwoHopPathSpanner;
pub use multi::{HopCount, MultiHopPathSpanner};
pub(crate) use two_hop::midpoint;
pub use two_hop::TwoHopPathSpanner;
