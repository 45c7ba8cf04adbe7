//! Vietoris-Rips persistence barcodes over Z2 and 1-Wasserstein distances
//! between persistence diagrams.
//!
//! The barcode side combines a union-find pass for dimension 0 with an
//! apparent-pair scan and implicit coboundary submatrix reduction for higher
//! dimensions, on top of clearing, an enclosing-radius default threshold,
//! and emergent-pair shortcuts. An explicit boundary-matrix toolbox
//! (standard, twist, compression, anti-transpose) backs the same pairing
//! computation on externally supplied matrices.
//!
//! The distance side computes exact 1-Wasserstein via uncapacitated min-cost
//! flow on a transshipment network with diagonal super-nodes, and a
//! guaranteed `(1 + O(eps))` approximation via delta-condensation, an s-WSPD
//! spanner and a block-search network simplex.

pub mod diagram;
pub mod error;
pub mod filtration;
pub mod metric;
pub mod reduction;
pub mod simplex;
pub mod vr;
pub mod wasserstein;

pub use error::{Error, Result};
