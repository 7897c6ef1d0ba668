//! Chern-connection curvature of explicitly given Hermitian metrics.
//!
//! The crate evaluates curvature data of metrics written as matrices of
//! rational expressions in `(z, z̄)`, certifies sign conditions on the real
//! bisectional curvature by optimizing its quadratic form over the cone of
//! positive semidefinite Hermitian matrices, and checks the Schwarz
//! calculation for holomorphic maps numerically.
//!
//! Index conventions (fixed crate-wide):
//! - metric matrices store `g[(i, j)] = g_{i\bar j}`;
//! - curvature components are `R_{i\bar j k\bar l} = -∂_i∂_{\bar j} g_{k\bar l}
//!   + g^{p\bar q} ∂_i g_{k\bar q} ∂_{\bar j} g_{p\bar l}`, so the first index
//!   pair carries the derivative directions;
//! - connection coefficients are `Γ^k_{ij} = g^{k\bar q} ∂_i g_{j\bar q}`.

pub mod certify;
pub mod curvature;
pub mod error;
pub mod metric;
pub mod numerics;
pub mod sampling;
pub mod schwarz;
pub mod wirtinger;

pub use error::{Error, Result};
pub use numerics::{HermitianMatrix, Tolerances, UnitaryFrame, C64};
