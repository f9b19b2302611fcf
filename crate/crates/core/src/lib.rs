//! Fedosov deformation quantization on flat coordinate charts: the Weyl
//! algebra bundle, the Abelian connection, flat sections and star products,
//! and a dedicated two-dimensional test for finiteness of the correction.

#![allow(clippy::needless_range_loop)]

pub mod algebra;
pub mod calculus;
pub mod dump;
pub mod error;
pub mod expr;
pub mod fedosov;
pub mod geometry;
pub mod manifest;
pub mod twodim;
pub mod weyl;

pub use algebra::{BasePolynomial, GaussianRational};
pub use error::{Error, Result};
pub use fedosov::{FedosovManifold, StarProduct};
pub use geometry::{ConnectionSpec, ManifoldSpec};
pub use weyl::{HbarPoly, WeylAlgebra, WeylSeries};
