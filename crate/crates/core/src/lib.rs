//! Verification toolkit for quantum insertion/deletion error-correcting codes.
//!
//! The crate builds the Kraus operators of insertion, deletion, and insdel
//! channels on qudit registers, mechanizes the commutation algebra of those
//! operators as a small term-rewriting system, and checks the Knill-Laflamme
//! error-correction conditions for arbitrary small codes, including an
//! explicit recovery-channel construction.
//!
//! Organization:
//! - [`matrix`]: dense complex matrices and kets, Kronecker products, partial
//!   traces.
//! - [`density`]: density matrices, separable states, spectral decomposition.
//! - [`kraus`]: the structured insertion/deletion operators, both dense and
//!   matrix-free.
//! - [`word`]: symbolic words in the insertion/deletion letters and their
//!   rewriting rules and normal form.
//! - [`channel`]: insertion, deletion, and insdel channels on density
//!   matrices, plus spanning Kraus families.
//! - [`code`]: quantum codes and the code-file format.
//! - [`kl`]: Knill-Laflamme checks, capability sweeps, and recovery channels.
//! - [`selftest`]: the seeded randomized property suites behind the CLI
//!   `selftest` command.

// Indexed loops over matrix dimensions are the clearer idiom in the dense
// kernels here.
#![allow(clippy::needless_range_loop)]

pub mod channel;
pub mod code;
pub mod density;
pub mod eigen;
pub mod error;
pub mod kl;
pub mod kraus;
pub mod matrix;
pub mod policy;
pub mod sampling;
pub mod selftest;
pub mod word;

pub use error::{Error, Result};
pub use matrix::{c64, ComplexMatrix, Ket};
pub use policy::{NumericPolicy, RunConfig};
