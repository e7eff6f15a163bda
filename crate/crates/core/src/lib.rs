//! Transfer operators of the Gauss map.
//!
//! The crate evaluates the family `L_β f(z) = Σ_{n≥1} (n+z)^{-2β} f(1/(n+z))`
//! with its analytic continuation in β, builds collocation models for
//! spectra and Fredholm determinants, runs Hölder-space interpolation
//! experiments and solves Lewis' three-term functional equation.

pub mod cf_core;
pub mod cli;
pub mod error;
pub mod grid;
pub mod holder;
pub mod linalg;
pub mod parallel;
pub mod scan;
pub mod special;
pub mod three_term;
pub mod transfer;

pub use error::{Error, Result};
