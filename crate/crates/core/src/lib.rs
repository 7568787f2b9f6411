//! Boolean independence and random matrices with Boolean independent
//! entries.
//!
//! The crate covers the interval-partition lattice, Boolean cumulants and
//! B-diagonal laws, exact finite-`N` trace moments of matrices whose entries
//! are Boolean independent, and the limits of those moments (B-diagonal,
//! mixed words, permuted entries, partial transposes, and the self-adjoint
//! case). All arithmetic is exact over the rationals.

pub mod boolean_model;
pub mod cumulants;
pub mod error;
pub mod matrix_moments;
pub mod partitions;
pub mod permutations;
pub mod scalar;
pub mod verify;

pub use error::{Error, Result};
pub use partitions::{IndexTuple, IntervalPartition, LabelTuple, Sign, SignPattern};
pub use scalar::Scalar;
