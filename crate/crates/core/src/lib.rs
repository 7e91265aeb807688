//! Numerical toolkit for the fractional Laplacian on bounded domains.

pub mod boundary;
pub mod closed_form;
pub mod constants;
pub mod error;
pub mod geometry;
pub mod moving_plane;
pub mod mp_harness;
pub mod operator;
pub(crate) mod quadrature;
pub mod solver;

pub use constants::FracParams;
pub use error::{Error, Result};
pub use geometry::{Domain, Grid, HalfSpace};
pub use operator::{Field, ScalarField};
