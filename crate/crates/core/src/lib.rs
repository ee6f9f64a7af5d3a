//! Numerical Plateau problem for hypersurfaces of constant Gauss curvature.
//!
//! The crate is organised around four layers:
//!
//! - [`convex`]: compact convex bodies in the plane and in space (hulls,
//!   projections, supporting normals, graph charts, local geodesic property).
//! - [`spherical`]: spherical convexity on direction grids (duals, links,
//!   hulls, normals of intersections).
//! - [`ma`]: a finite-difference Dirichlet solver for the Monge-Ampere type
//!   equation `det(D²f)^{1/n} / G(Df) = φ` with homotopy continuation.
//! - [`barrier`]: mollified distance functions, smoothed intersections,
//!   excision and the volume-minimising Plateau loop.
//!
//! [`cli`] wires these into the `plateau` binary.

pub mod barrier;
pub mod cli;
pub mod convex;
pub mod error;
pub mod field;
pub mod geom;
pub mod io;
pub mod ma;
pub mod spherical;
pub mod suite;

pub use error::{Error, Result};
pub use geom::Point;

/// Library version string embedded in every artifact.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
