//! Core machinery for discrete (lattice) diffraction problems: five/seven-point
//! Helmholtz stencils with their boundary weight tables and Green's identity,
//! dispersion relations with physical branch selection, the catalog of
//! continuous and discrete Wiener-Hopf kernels for the canonical scattering
//! geometries, and the finite-element construction that reproduces the
//! boundary weights.
//!
//! The crate is `no_std`-compatible (requires `alloc`); the `std` feature
//! (default) enables `std`-backed float math and error interop.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod catalog;
pub mod dispersion;
pub mod fem;
pub mod lattice;

/// Complex scalar used throughout.
pub type C = num_complex::Complex<f64>;
