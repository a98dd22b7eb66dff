//! Gapped Dirac operators with locally periodic potentials.
//!
//! The crate discretizes a one-dimensional two-component Dirac operator with
//! potentials of the form `W(x) + V1(x) V2(h x)`, computes eigenvalues inside
//! the spectral gap, builds the homogenized limit operator and measures how
//! eigenvalues, resolvents, spectral projectors and unitary groups converge as
//! `h` grows. A Schrödinger traveling-well example shows that resolvent
//! convergence alone does not control the spectrum.

pub mod counterexample;
pub mod dirac;
pub mod eigen;
pub mod error;
pub mod evolution;
pub mod factor;
pub mod grid;
pub mod homogenization;
pub mod operator;
pub mod resolvent;
pub mod spectral;

pub use error::{Error, Result};
