//! Geometry defined by a world function.
//!
//! A [`WorldFunction`] `σ(P, Q)` (half the squared distance) is the only
//! datum of a geometry. On top of it this crate provides:
//!
//! - [`sigma`]: scalar products, parallelism and collinearity built from σ
//!   alone;
//! - [`riemannian`]: metric fields, geodesics, metric world functions and
//!   path-dependent parallel transport;
//! - [`euclideanity`]: sampled checks of the conditions characterizing
//!   proper Euclidean space;
//! - [`tube`]: sampling and dimension classification of tubes, the
//!   σ-defined generalization of straight lines.

pub mod diff;
pub mod error;
pub mod euclideanity;
pub mod linalg;
pub mod point;
pub mod region;
pub mod riemannian;
pub mod sigma;
pub mod tube;
pub mod world;

pub use error::{Error, Result};
pub use point::Point;
pub use region::Region;
pub use world::{GeometryConfig, Kind, WorldFunction};
