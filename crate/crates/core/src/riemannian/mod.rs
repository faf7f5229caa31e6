//! Metric fields and the constructions built on them: Christoffel symbols,
//! geodesics, metric world functions, and parallel transport.

mod geodesic;
mod gradient;
mod metric;
mod transport;
mod world;

pub use geodesic::{geodesic_bvp, geodesic_integrate, BvpOptions, GeodesicNode, GeodesicSolution};
pub use gradient::{riemannian_scalar_product, sigma_gradient};
pub use metric::{Christoffel, MetricField, Signature};
pub use transport::{covector_angle, densify, geodesic_polyline, parallel_transport, TransportResult};
pub use world::MetricWorld;
