//! Casimir forces between periodically corrugated plates for a massive or
//! massless scalar field with Dirichlet boundary conditions.
//!
//! The pipeline: build a plate [`geometry`], discretise it into a boundary
//! mesh, solve the collocation problem of [`bem`] for the renormalised Green
//! function at each spectral parameter, turn its mixed derivatives into
//! stress tensor components in [`stress`], and integrate those across a
//! lateral period in [`force`]. Closed-form reference solutions live in
//! [`oracle`].

pub mod bem;
pub mod cli;
pub mod error;
pub mod force;
pub mod geometry;
pub mod kernel;
pub mod oracle;
pub mod quadrature;
pub mod stress;
pub mod vec2;

pub use error::{Error, Result};
pub use vec2::Vec2;
