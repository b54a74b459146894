//! Numerical realization of the non-harmonic pseudo-differential calculus on
//! one-dimensional model boundary value problems.
//!
//! The crate is `no_std` (it needs `alloc`). Every object is built from closed-form
//! eigen-data of three model operators:
//!
//! * the Dirichlet Laplacian `-d²/dx²` on `[0, 1]`,
//! * the periodic momentum operator `-i d/dx` on `[0, 2π)`,
//! * the twisted momentum operator `-i d/dx` on `[0, 1]` with `u(1) = h·u(0)`,
//!   which is not self-adjoint and carries a genuinely biorthogonal system.
//!
//! On top of a [`SpectralSystem`] the crate provides the L- and L*-Fourier
//! transforms ([`fourier`]), quantization of global symbols ([`quantization`]),
//! regularized traces and their small-`t` asymptotics ([`trace`]) and
//! Dixmier trace estimators ([`dixmier`]). IO, caching and the CLI live in the
//! `nhtrace` crate.

#![no_std]
// `!(x > 0.0)` is how NaN gets rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod dixmier;
mod error;
pub mod fourier;
pub mod linalg;
pub mod quadrature;
pub mod quantization;
pub mod regression;
pub mod spectral;
pub mod trace;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use spectral::{ModelId, SpectralSystem, Spectrum};

/// Default tolerance for discrete biorthogonality of the quadrature.
pub const QUAD_TOL: f64 = 1e-8;

/// Modulus below which an eigenfunction sample is treated as a zero.
pub const WZ_FLOOR: f64 = 1e-10;

/// Fraction of the largest bracket kept as the "interior" of a truncation.
pub const INTERIOR_FRACTION: f64 = 0.9;
