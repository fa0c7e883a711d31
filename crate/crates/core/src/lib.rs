//! Finite simplicial sets with Kan's subdivision and extension functors.
//! Horn-lifting oracles decide the classes `fib_n` up to a dimension bound,
//! and distance certificates come from the fibrant-replacement tower.

pub mod category;
pub mod error;
pub mod ex;
pub mod fibrancy;
pub mod hom;
pub mod metric;
pub mod ordinal;
pub mod rays;
pub mod sset;
pub mod subdivision;

pub use error::{Error, Result};
pub use ordinal::OrdinalMap;
pub use sset::{FaceRecord, SimplexRef, SimplicialMap, SimplicialSet};
