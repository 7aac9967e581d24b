//! Riemannian geometry of the spatial slice: the three surface models,
//! metric data, geodesic flow, distances, and geodesic connections.

mod geodesic;
mod model;
mod point;

pub use geodesic::GeodesicConnection;
pub use model::{Christoffel, SurfaceModel};
pub use point::{SurfacePoint, TangentRep, TangentVector};
