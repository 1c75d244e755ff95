//! Sub-Laplacians of sub-Riemannian manifolds described by frames.
//!
//! A chart is given symbolically ([`geometry::ManifoldSpec`]): coordinates, a
//! full frame whose first `m` fields are an orthonormal horizontal frame, and
//! optional volume densities. From it the crate computes, with exact
//! derivatives, the local coefficients of the sum of squares, the canonical
//! operator `L^V`, divergence-form operators `div^ω grad_H`, and Haar-measure
//! operators on Lie groups, and compares them.

pub mod catalog;
pub mod error;
pub mod expr;
pub mod flow;
pub mod geometry;
pub mod lie;
pub mod linalg;
pub mod specfile;

pub use error::{DomainError, Error, ParseError, Result};
pub use geometry::{CoefField, ManifoldSpec};
