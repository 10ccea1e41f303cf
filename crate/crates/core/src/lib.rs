//! Computable pieces of the space of marked groups: free-group words and
//! balls, the ultrametric on normal subgroups via ball fingerprints,
//! small-cancellation and one-relator membership, the oracle groups over
//! `{a, b, c, d}`, and subgroups of `Z^m`.

pub mod budget;
pub mod cancellation;
pub mod dehn;
pub mod error;
pub mod format;
pub mod grigorchuk;
pub mod lattice;
pub mod metric;
pub mod one_relator;
pub mod word;

pub use budget::Budget;
pub use error::{Error, Result};
pub use metric::{BallFingerprint, Distance, Geometry};
pub use word::{FreeAlphabet, Word};
