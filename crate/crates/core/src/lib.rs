//! Geometry, thickness and local-knotting analysis of closed polygons.
//!
//! The crate is organised bottom-up:
//!
//! * [`geom`]: polygons, turning angles, segment distances.
//! * [`thickness`]: `MinRad`, the critical self-distances and the polygonal
//!   thickness radius / ropelength.
//! * [`tube`]: the cell decomposition of the radius-`r` tube and its
//!   embeddedness verifier.
//! * [`thresholds`]: closed-form perturbation radii for local knotting.
//! * [`homfly`]: projection to diagrams, HOMFLY polynomials, classification.
//! * [`montecarlo`]: seeded perturbation sampling and tallies.
//! * [`anneal`]: a ropelength-reducing annealer for equilateral polygons.
//! * [`fitting`]: decay-curve fits, spline correspondence, linear fits.

pub mod anneal;
pub mod error;
pub mod fitting;
pub mod geom;
pub mod homfly;
pub mod io;
pub mod montecarlo;
pub mod thickness;
pub mod thresholds;
pub mod tube;

pub use error::{Error, Result};
pub use geom::{PointOnKnot, PolygonalKnot, Vec3};
