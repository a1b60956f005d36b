//! Numerical laboratory for quantum and classical dynamics on the 2-torus.
//!
//! The crate provides exact Weyl quantization over a truncated Fourier box,
//! two-microlocal Wigner observables attached to a rational direction,
//! split-step and spectral propagators for the semiclassical Schrödinger
//! equation with a small potential, the associated integrable classical
//! flows (pendulum reduction, moment map, Liouville tori), and a
//! reproducible experiment harness with a CLI (`lab`).

pub mod classical;
pub mod error;
pub mod experiments;
pub mod fft;
pub mod lattice;
pub mod potential;
pub mod quantum;
pub mod weyl;
pub mod wigner;

// keeps the BLAS backend linked even in builds that only touch matrix-free paths
use ndarray_linalg as _;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
