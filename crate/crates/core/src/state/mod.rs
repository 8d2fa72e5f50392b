//! Marble and apparatus states: factorized products, sparse superpositions
//! over labelled configurations, and the conversions between them.

mod label;
mod product;
mod schmidt;
mod sparse;

pub use label::{Configuration, Label, Subsystem, SubsystemKind};
pub use product::{ProductState, TwoRegionMarble};
pub use schmidt::{SchmidtCheck, MAX_MATRIX_ENTRIES, RANK_ONE_TOLERANCE};
pub use sparse::{SparseState, NORMALIZATION_TOLERANCE};

/// Default cap on the number of marbles expanded into `2ⁿ` explicit terms.
pub const DEFAULT_DENSE_LIMIT: usize = 20;
