//! Compiling finite solvable groups into diagonal state-space models.
//!
//! The crate covers the whole pipeline: explicit Cayley-table groups and
//! their derived series, complex affine dynamics, a finite-precision cascade
//! of diagonal layers with tabular parameters, a compiler from solvable groups
//! into such cascades, exhaustive and random verification, dataset generation
//! for the group word problem, and a hand-checkable `S3` reference.

pub mod cli;
pub mod compiler;
pub mod dynamics;
pub mod group;
pub mod s3;
pub mod ssm;
pub mod tasks;
pub mod verifier;
