//! Poisson-Voronoi percolation on the hyperbolic plane.
//!
//! The crate samples Poisson point processes in the Poincaré disk, builds the
//! hyperbolic Voronoi/Delaunay structure, and estimates one-arm probabilities
//! and the quantities around sharp-threshold arguments: pivotal sets,
//! influences of discretized sectors, revealments of an exploration decision
//! tree, and exact OSSS checks on finite product spaces.

pub(crate) mod cells;
pub mod delaunay;
pub mod discretization;
pub mod error;
pub mod geometry;
pub mod osss;
pub mod percolation;
pub mod plane;
pub mod rng;
pub mod sampling;
pub mod spatial;
pub mod tessellation;
pub mod world;

pub use error::{Error, Result};
pub use geometry::{Annulus, BallSpec, Circumcenter, HPoint};
pub use rng::RngStream;
