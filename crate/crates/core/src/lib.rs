//! Fractional Laplacians, fractional heat operators and their extension
//! problems, computed on uniform grids and cross-checked against each other.
//!
//! Module map:
//! - [`specfun`]: Gamma, Beta, Bessel, hypergeometric and lattice zeta functions.
//! - [`quad`]: half-line and principal-value quadrature.
//! - [`field`]: sampled fields on centered boxes, Fourier transforms, convolution.
//! - [`heatsg`]: heat kernel, heat semigroup and the evolutive semigroup.
//! - [`fracops`]: fractional Laplacian by several routes, Riesz potentials,
//!   fundamental solutions and the fractional heat operator.
//! - [`extension`]: Poisson kernels, extension solvers and Dirichlet-to-Neumann maps.
//! - [`report`]: verification records.
//! - [`suites`]: the check suites run by `verify`.

pub mod error;
pub mod extension;
pub mod field;
pub mod fracops;
pub mod heatsg;
pub mod quad;
pub mod report;
pub mod specfun;
pub mod suites;
pub mod cli;

pub use error::{Error, Result};
pub use num_complex::Complex64;
