//! Affine linking numbers of event skies in globally hyperbolic static
//! spacetimes built over complete surfaces.
//!
//! The crate takes a spacetime of the form (surface) x (time axis), two
//! events in it, and decides how the sky of one event links the sky of the
//! other. Three independent computations of the same integer are provided:
//! counting wavefront preimages with Jacobian signs, intersecting one
//! event's null cone with a timelike curve through the other, and tallying
//! dangerous tangencies along a separating wavefront homotopy. Agreement of
//! the three, and the causal meaning of the result, are exercised by the
//! verification suite in [`verify`].
//!
//! Supported spatial models: the Euclidean plane, rectangular flat tori,
//! and round spheres. See [`surface::SurfaceModel`].

pub mod alk;
pub mod error;
pub mod numeric;
pub mod spacetime;
pub mod surface;
pub mod verify;
pub mod wavefront;

pub use alk::{
    causality_from_alk, coefficient_group, is_good, sighting_count, AlkComputation, AlkEngine,
    AlkValue, CausalityReport, CoefficientGroup, LinkVerdict, ManifoldDescriptor,
};
pub use error::{Error, Result};
pub use numeric::NumericPolicy;
pub use spacetime::{CausalVerdict, Event, StaticSpacetime, TimeOrder};
pub use surface::{GeodesicConnection, SurfaceModel, SurfacePoint, TangentRep, TangentVector};
pub use verify::{run_all, suite_passed, CriterionResult, VerifyLevel};
pub use wavefront::{Front, FrontSample};

#[cfg(test)]
pub(crate) mod testutil {
    use crate::spacetime::Event;
    use crate::surface::{SurfaceModel, SurfacePoint};
    use nalgebra::Vector3;
    use rand::Rng;
    use rand_chacha::ChaCha8Rng;

    pub fn all_models() -> Vec<SurfaceModel> {
        vec![
            SurfaceModel::FlatPlane,
            SurfaceModel::flat_torus(1.0, 1.0).unwrap(),
            SurfaceModel::round_sphere(1.0).unwrap(),
        ]
    }

    pub fn random_point(model: &SurfaceModel, rng: &mut ChaCha8Rng) -> SurfacePoint {
        match model {
            SurfaceModel::FlatPlane => {
                SurfacePoint::flat(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0))
            }
            SurfaceModel::FlatTorus { periods } => SurfacePoint::flat(
                rng.random_range(0.0..periods[0]),
                rng.random_range(0.0..periods[1]),
            ),
            SurfaceModel::RoundSphere { .. } => loop {
                let v = Vector3::new(
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                );
                if v.norm() > 1e-3 {
                    break SurfacePoint::sphere(v).unwrap();
                }
            },
        }
    }

    pub fn random_event(model: &SurfaceModel, rng: &mut ChaCha8Rng, t_range: (f64, f64)) -> Event {
        Event::new(
            random_point(model, rng),
            rng.random_range(t_range.0..t_range.1),
        )
    }
}
