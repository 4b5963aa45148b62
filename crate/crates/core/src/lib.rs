//! Exhaustive enumeration and structural analysis of normal magic squares.
//!
//! The crate is `no_std` and only needs an allocator. It covers the whole
//! algorithmic side of the pipeline:
//!
//! - [`square`]: squares, line sums, broken diagonals, complement pairs,
//!   exact determinants and the row/column/transpose action.
//! - [`constraints`]: the linear magic-sum system, its rank and a free-cell
//!   basis obtained by exact elimination.
//! - [`enumerate`]: backtracking with forced-cell propagation over that basis,
//!   optionally restricted to a shard of the search tree.
//! - [`classify`]: complement-pair signatures, the twelve pairing classes of
//!   order 4 and their coarser four-way grouping.
//! - [`group`]: transformation groups of square sets and their orbits.
//! - [`generators`]: orbit peeling into generator sets and partition checks.
//!
//! IO, file formats, parallel sharding and the command line live in the
//! `magic-squares` crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod classify;
pub mod constraints;
pub mod enumerate;
mod error;
pub mod generators;
pub mod group;
mod perm;
pub mod square;

pub use error::{Error, Result};
pub use square::{magic_constant, Square, Transformation};
