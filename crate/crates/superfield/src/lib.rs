//! Exact symbolic engine for SUSY vertex algebras and formal supercurve
//! coordinate changes.

pub mod error;
pub mod scalar;
pub mod series;
pub mod supermatrix;
pub mod disk;
pub mod random;
pub mod derlie;
pub mod lca;
pub mod bundle;

pub use error::{Error, Result};
pub use scalar::{Parity, Qi, Scalar};
pub use series::{Chart, Derivation, Dir, Side, SuperSeries, Variant};
