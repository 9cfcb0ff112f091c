//! Reverse skyline queries over R-tree indexed products and customers, and
//! k-most-attractive-candidates selection on top of them.
//!
//! A customer `c` is in the reverse skyline of a query point `q` when no
//! product is at least as close to `c` as `q` in every dimension and
//! strictly closer in one. The query's influence set is that set of
//! customers.

pub mod datagen;
pub mod error;
pub mod geometry;
pub mod greedy;
pub mod index;
pub mod kmac;
pub mod region;
pub mod skyline;

pub use error::{Error, Result};
pub use geometry::{Point, Rect};
pub use greedy::{kgcs, CandidateProfile, Selection};
pub use index::{build_artree, ARTree, RTree};
pub use skyline::{brs, rsl, InfluenceSet, QueryStats};
