//! Finite element simulation of Gaussian generalized random fields
//! `Z = gamma(L) W` on triangulated domains.
//!
//! The pipeline is: build or load a [`mesh::Mesh`], assemble the P1 matrices
//! in [`fem`], pick a [`spectral::SpectralFunction`], then draw weight
//! vectors with [`sampler`]. [`analysis`] measures the approximation against
//! exact covariances and analytic spectra.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cli;
pub mod error;
pub mod fem;
pub mod mesh;
pub mod sampler;
pub mod sparse;
pub mod spectral;

pub use error::{Error, Result};
