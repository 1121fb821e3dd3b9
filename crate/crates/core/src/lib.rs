//! Structure recovery for real-valued degree-1 functions on the symmetric group.
//!
//! A function on `S_n` is *linear* (degree 1) when it can be written as
//! `c + Σ c[i][j] · x[i][j]`, where `x[i][j]` indicates that the input
//! permutation sends `i` to `j`. This crate measures how far such functions
//! are from `{0, 1}`-valued in L2, L0 and L∞, and recovers the approximating
//! structure: unions of mostly disjoint cosets, and dictators.
//!
//! The crate is `no_std` and only needs `alloc`. Every randomized routine
//! takes an explicit seed, so results are reproducible.
//!
//! Indices are zero-based throughout; the file formats in the companion CLI
//! crate are one-based.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod cube;
pub mod error;
pub mod gen;
pub mod l0;
pub mod l2;
pub mod linf;
pub mod linfn;
pub mod numeric;
pub mod perm;
pub mod report;

pub use error::{Error, Result};
pub use linfn::{Grid, LinearFunction, ValueTable};
pub use perm::{Cell, CellSet, Permutation, SquareSystem};
pub use report::{Dictator, Measurement, Orientation, Regime, StructureReport, Verdict};

/// Largest `n` for which whole-group enumeration is performed by default.
pub const DEFAULT_EXACT_THRESHOLD: usize = 10;

/// Tolerance used for "is exactly this value" judgments on float inputs.
pub const DEFAULT_TAU: f64 = 1e-9;
