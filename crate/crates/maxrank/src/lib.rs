//! Numerical toolkit for constant-coefficient systems of PDEs with the
//! maximal-rank property: principal-symbol classification, pseudo-inverse
//! Fourier multipliers, masked-domain solves with polynomial DC correction,
//! Korn / Helmholtz / weak-Korn projections, and a reproducible benchmark
//! harness that measures the projection constants empirically.
//!
//! Entry points:
//! - [`symbol::OperatorSpec`] and [`classify::classify`] for the symbol algebra;
//! - [`catalog`] for the named operators used throughout the tests;
//! - [`solver::solve`] for the masked pseudo-spectral solve;
//! - [`project`] for the projection constructions;
//! - [`bench`] for scenario-driven CSV/JSON reports.
//!
//! The runnable examples under `examples/` walk through each capability.

pub mod catalog;
pub mod bench;
pub mod grid;
pub mod io;
pub mod multiplier;
pub mod classify;
pub mod domain;
pub mod error;
pub mod linalg;
pub mod norms;
pub mod project;
pub mod solver;
pub mod stencil;
pub mod symbol;

pub use error::{Error, Result};
