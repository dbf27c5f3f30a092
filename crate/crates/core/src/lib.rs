//! Self-expressive subspace clustering for unions of affine subspaces.
//!
//! The crate provides:
//!
//! - an affine-geometry toolkit (span/affine-hull dimensions via numerical
//!   rank, independence and disjointness predicates) in [`geometry`];
//! - a seeded random affine subspace model and CSV dataset ingestion in
//!   [`data`];
//! - the four self-expression solvers — sparse (`SSC`, `A-SSC`) and least
//!   squares (`LSR`, `A-LSR`), each in exact and noise-penalized form — in
//!   [`solvers`];
//! - spectral clustering of the resulting affinity in [`clustering`];
//! - subspace-preserving rate and clustering accuracy in [`metrics`];
//! - the synthetic sweep / verification / plotting harness behind the CLI
//!   in [`experiments`].

pub mod clustering;
pub mod data;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod metrics;
pub mod solvers;

pub use error::{Error, Result};
