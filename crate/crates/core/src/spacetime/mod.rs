//! The static product spacetime over a surface model: causal structure,
//! Lorentzian distance, the future null cone, timelike sectional curvature,
//! and a null-moment detector for pairs of event paths.

mod causal;
mod curvature;

pub use causal::{CausalVerdict, TimeOrder};
pub use curvature::{SpacetimeVector, TimelikePlane};

use crate::error::{Error, Result};
use crate::numeric::NumericPolicy;
use crate::surface::{SurfaceModel, SurfacePoint, TangentVector};

/// A point (p, t) of the product spacetime.
#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    pub point: SurfacePoint,
    pub time: f64,
}

impl Event {
    pub fn new(point: SurfacePoint, time: f64) -> Self {
        Event { point, time }
    }
}

/// Globally hyperbolic static spacetime (M x R, g = gbar (+) -dt^2).
///
/// The warp factor is fixed to 1: null geodesics project to unit-speed
/// surface geodesics traversed at dt/ds = 1, and every slice M x {t} is a
/// Cauchy surface because the underlying surface models are complete.
#[derive(Debug, Clone)]
pub struct StaticSpacetime {
    pub surface: SurfaceModel,
    pub policy: NumericPolicy,
}

impl StaticSpacetime {
    pub fn new(surface: SurfaceModel) -> Self {
        StaticSpacetime {
            surface,
            policy: NumericPolicy::default(),
        }
    }

    pub fn with_policy(surface: SurfaceModel, policy: NumericPolicy) -> Self {
        StaticSpacetime { surface, policy }
    }

    /// The event reached by the future null geodesic from `x` with initial
    /// spatial direction angle `s`, after coordinate-time advance `t`.
    pub fn null_cone_exp(&self, x: &Event, s: f64, t: f64) -> Result<Event> {
        let (point, _) = self.null_ray(x, s, t)?;
        Ok(Event::new(point, x.time + t))
    }

    /// Spatial endpoint and end velocity of the null ray. The end velocity is
    /// the conormal of the wave front through that point.
    pub fn null_ray(&self, x: &Event, s: f64, t: f64) -> Result<(SurfacePoint, TangentVector)> {
        if !(t >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "null rays advance forward in time, got t = {t}"
            )));
        }
        let dir = self.surface.ray_direction(&x.point, s)?;
        self.surface.integrate_geodesic(&dir, t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::SurfaceModel;
    use crate::testutil::{all_models, random_event, random_point};
    use approx::assert_relative_eq;
    use nalgebra::Vector3;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn plane() -> StaticSpacetime {
        StaticSpacetime::new(SurfaceModel::FlatPlane)
    }

    fn torus() -> StaticSpacetime {
        StaticSpacetime::new(SurfaceModel::flat_torus(1.0, 1.0).unwrap())
    }

    fn cylinder() -> StaticSpacetime {
        StaticSpacetime::new(SurfaceModel::round_sphere(1.0).unwrap())
    }

    #[test]
    fn equal_time_distinct_events_are_unrelated() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for model in all_models() {
            let st = StaticSpacetime::new(model.clone());
            for _ in 0..20 {
                let p = random_point(&model, &mut rng);
                let q = random_point(&model, &mut rng);
                if st.surface.riemannian_distance(&p, &q).unwrap() < 1e-6 {
                    continue;
                }
                let t = rng.random_range(-1.0..1.0);
                let v = st
                    .causal_relation(&Event::new(p, t), &Event::new(q, t))
                    .unwrap();
                assert!(matches!(v, CausalVerdict::Unrelated));
            }
        }
    }

    #[test]
    fn plane_pair_is_chronological_future() {
        let st = plane();
        let x = Event::new(SurfacePoint::flat(0.0, 0.0), 0.0);
        let y = Event::new(SurfacePoint::flat(0.3, 0.0), 1.0);
        let v = st.causal_relation(&x, &y).unwrap();
        assert!(matches!(
            v,
            CausalVerdict::ChronologicallyRelated {
                direction: TimeOrder::Future,
                identical: false
            }
        ));
    }

    #[test]
    fn cylinder_antipodal_pair_after_full_period_is_related() {
        let st = cylinder();
        let s = SurfacePoint::sphere(Vector3::new(0.3, -0.2, 0.93)).unwrap();
        let anti = SurfacePoint::sphere(-s.unit_dir().unwrap()).unwrap();
        let x = Event::new(s, 0.0);
        let y = Event::new(anti, 2.0 * std::f64::consts::PI);
        let v = st.causal_relation(&x, &y).unwrap();
        assert!(v.is_related());
        assert!(v.is_chronological());
    }

    #[test]
    fn torus_half_period_null_pair_has_two_connections() {
        let st = torus();
        let x = Event::new(SurfacePoint::flat(0.0, 0.0), 0.0);
        let y = Event::new(SurfacePoint::flat(0.5, 0.0), 0.5);
        match st.causal_relation(&x, &y).unwrap() {
            CausalVerdict::NullRelated { connections } => {
                // Both half-period routes around the torus have length 1/2.
                assert_eq!(connections.len(), 2);
                for c in connections {
                    assert_relative_eq!(c.length, 0.5, epsilon = 1e-12);
                }
            }
            other => panic!("expected null verdict, got {other:?}"),
        }
    }

    #[test]
    fn identical_events_are_flagged() {
        let st = torus();
        let x = Event::new(SurfacePoint::flat(0.25, 0.5), 1.0);
        let v = st.causal_relation(&x, &x.clone()).unwrap();
        assert!(v.is_identical());
        assert!(v.is_chronological());
    }

    #[test]
    fn lorentz_distance_examples() {
        let st = plane();
        let o = Event::new(SurfacePoint::flat(0.0, 0.0), 0.0);
        // Causally unrelated pair.
        let far = Event::new(SurfacePoint::flat(5.0, 0.0), 1.0);
        assert_eq!(st.lorentz_distance(&o, &far).unwrap(), 0.0);
        // Static observer proper time.
        let up = Event::new(SurfacePoint::flat(0.0, 0.0), 2.0);
        assert_relative_eq!(st.lorentz_distance(&o, &up).unwrap(), 2.0, epsilon = 1e-12);
        // Boosted pair.
        let y = Event::new(SurfacePoint::flat(0.6, 0.0), 1.0);
        assert_relative_eq!(st.lorentz_distance(&o, &y).unwrap(), 0.8, epsilon = 1e-12);
    }

    #[test]
    fn lorentz_distance_matches_polygonal_maximization() {
        // Independent oracle: maximize total proper time over two-segment
        // timelike polygons through a midpoint (x, t). The supremum of
        // sqrt(t^2 - x^2) + sqrt((1-t)^2 - (0.6-x)^2) is 0.8.
        let st = plane();
        let o = Event::new(SurfacePoint::flat(0.0, 0.0), 0.0);
        let y = Event::new(SurfacePoint::flat(0.6, 0.0), 1.0);
        let mut best: f64 = 0.0;
        let k = 400;
        for ix in 0..=k {
            let x = 0.6 * ix as f64 / k as f64;
            for it in 1..k {
                let t = it as f64 / k as f64;
                let a2 = t * t - x * x;
                let b2 = (1.0 - t) * (1.0 - t) - (0.6 - x) * (0.6 - x);
                if a2 > 0.0 && b2 > 0.0 {
                    best = best.max(a2.sqrt() + b2.sqrt());
                }
            }
        }
        let d = st.lorentz_distance(&o, &y).unwrap();
        assert!(best <= d + 1e-9, "polygon beat the closed form: {best} > {d}");
        assert!(best >= d - 1e-3, "polygon maximum {best} too far below {d}");
    }

    #[test]
    fn null_cone_exp_examples() {
        let st = plane();
        let x = Event::new(SurfacePoint::flat(0.0, 0.0), 0.0);
        for s in [0.0, 1.0, 2.5, 4.0] {
            let e = st.null_cone_exp(&x, s, 0.0).unwrap();
            assert_eq!(e.time, 0.0);
            assert_relative_eq!(
                st.surface.riemannian_distance(&e.point, &x.point).unwrap(),
                0.0,
                epsilon = 1e-15
            );
        }
        let e = st.null_cone_exp(&x, 0.0, 1.0).unwrap();
        let c = e.point.flat_coords().unwrap();
        assert_relative_eq!(c.x, 1.0, epsilon = 1e-12);
        assert_relative_eq!(c.y, 0.0, epsilon = 1e-12);
        assert_relative_eq!(e.time, 1.0, epsilon = 1e-15);

        let cyl = cylinder();
        let p = SurfacePoint::sphere(Vector3::new(0.1, 0.7, 0.7)).unwrap();
        let x = Event::new(p, 0.5);
        for s in [0.0, 1.3, 3.9] {
            let e = cyl.null_cone_exp(&x, s, std::f64::consts::PI).unwrap();
            let anti = -p.unit_dir().unwrap();
            assert!((e.point.unit_dir().unwrap() - anti).norm() < 1e-12);
            assert_relative_eq!(e.time, 0.5 + std::f64::consts::PI, epsilon = 1e-15);
        }
    }

    #[test]
    fn null_cone_exp_respects_slice_and_distance() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for model in all_models() {
            let st = StaticSpacetime::new(model.clone());
            for _ in 0..300 {
                let x = random_event(&model, &mut rng, (-1.0, 1.0));
                let s = rng.random_range(0.0..std::f64::consts::TAU);
                let t = rng.random_range(0.0..3.0);
                let e = st.null_cone_exp(&x, s, t).unwrap();
                assert_eq!(e.time, x.time + t);
                let d = st.surface.riemannian_distance(&x.point, &e.point).unwrap();
                assert!(d <= t + 1e-9, "ray escaped its cone: d={d} t={t}");
                // Minimizing rays realize the distance exactly.
                let injectivity = match &model {
                    SurfaceModel::FlatPlane => f64::INFINITY,
                    SurfaceModel::FlatTorus { .. } => 0.5,
                    SurfaceModel::RoundSphere { radius } => std::f64::consts::PI * radius,
                };
                if t < injectivity {
                    assert_relative_eq!(d, t, epsilon = 1e-9);
                }
            }
        }
    }

    #[test]
    fn flat_models_have_zero_timelike_curvature() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for st in [plane(), torus()] {
            for _ in 0..50 {
                let base = random_event(&st.surface.clone(), &mut rng, (-1.0, 1.0));
                let a = SpacetimeVector::new(
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                    rng.random_range(1.5..3.0),
                );
                let b = SpacetimeVector::new(
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-0.4..0.4),
                );
                let k = st.timelike_sectional_curvature(&TimelikePlane::new(base, a, b));
                if let Ok(k) = k {
                    assert!(k.abs() < 1e-6, "flat curvature {k}");
                }
            }
        }
    }

    #[test]
    fn sphere_mixed_plane_curvature_vanishes() {
        let st = cylinder();
        let base = Event::new(st.surface.point_from_chart([0.4, 1.1]).unwrap(), 0.0);
        let v = SpacetimeVector::new(0.0, 0.0, 1.0);
        let w = SpacetimeVector::new(0.6, -0.3, 0.0);
        let k = st
            .timelike_sectional_curvature(&TimelikePlane::new(base, v, w))
            .unwrap();
        assert!(k.abs() < 1e-6, "mixed plane curvature {k}");
    }

    #[test]
    fn sphere_boosted_plane_curvature_is_negative_and_matches_product_formula() {
        let st = StaticSpacetime::new(SurfaceModel::round_sphere(1.3).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut checked = 0;
        while checked < 20 {
            let lat = rng.random_range(-1.0..1.0);
            let long = rng.random_range(-3.0..3.0);
            let base = Event::new(st.surface.point_from_chart([lat, long]).unwrap(), 0.0);
            let sx: nalgebra::Vector2<f64> = nalgebra::Vector2::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            );
            let sy: nalgebra::Vector2<f64> = nalgebra::Vector2::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            );
            if sx.perp(&sy).abs() < 0.1 {
                continue;
            }
            let v = SpacetimeVector::new(sx.x, sx.y, rng.random_range(2.0..4.0));
            let w = SpacetimeVector::new(sy.x, sy.y, 0.0);
            let plane = TimelikePlane::new(base.clone(), v, w);
            let k = match st.timelike_sectional_curvature(&plane) {
                Ok(k) => k,
                Err(_) => continue,
            };

            // Product-metric oracle: only the surface block of the curvature
            // tensor survives, so K = K_surf * Gram_surf(X, Y) / Gram_g(v, w).
            let g = st
                .surface
                .metric_at(&base.point)
                .unwrap();
            let gxx = (g * sx).dot(&sx);
            let gyy = (g * sy).dot(&sy);
            let gxy = (g * sx).dot(&sy);
            let k_surf = 1.0 / (1.3_f64 * 1.3);
            let num = k_surf * (gxx * gyy - gxy * gxy);
            let gvv = gxx - v.temporal * v.temporal;
            let den = gvv * gyy - gxy * gxy;
            let oracle = num / den;
            assert!(k < 0.0, "boosted plane curvature {k} not negative");
            assert!(
                (k - oracle).abs() < 1e-6 * (1.0 + oracle.abs()),
                "fd {k} vs oracle {oracle}"
            );
            checked += 1;
        }
    }

    #[test]
    fn degenerate_planes_are_rejected() {
        let st = cylinder();
        let base = Event::new(st.surface.point_from_chart([0.2, 0.2]).unwrap(), 0.0);
        // Spacelike plane: both spatial.
        let err = st.timelike_sectional_curvature(&TimelikePlane::new(
            base.clone(),
            SpacetimeVector::new(1.0, 0.0, 0.0),
            SpacetimeVector::new(0.0, 1.0, 0.0),
        ));
        assert!(err.is_err());
        // Null plane: lightlike + orthogonal spatial direction.
        let g = st.surface.metric_at(&base.point).unwrap();
        let vnorm = g[(0, 0)].sqrt();
        let err = st.timelike_sectional_curvature(&TimelikePlane::new(
            base,
            SpacetimeVector::new(1.0, 0.0, vnorm),
            SpacetimeVector::new(0.0, 1.0, 0.0),
        ));
        assert!(matches!(err, Err(crate::Error::NullPlane(_))));
    }

    #[test]
    fn detector_ignores_separated_equal_time_paths() {
        let st = torus();
        let p1 = vec![
            Event::new(SurfacePoint::flat(0.1, 0.1), 0.0),
            Event::new(SurfacePoint::flat(0.2, 0.1), 0.0),
        ];
        let p2 = vec![
            Event::new(SurfacePoint::flat(0.6, 0.6), 0.0),
            Event::new(SurfacePoint::flat(0.7, 0.6), 0.0),
        ];
        assert_eq!(st.null_moment_detector(&p1, &p2).unwrap(), None);
    }

    #[test]
    fn detector_finds_the_boundary_crossing() {
        let st = torus();
        let p1 = vec![
            Event::new(SurfacePoint::flat(0.0, 0.0), 0.0),
            Event::new(SurfacePoint::flat(0.0, 0.0), 0.0),
        ];
        let p2 = vec![
            Event::new(SurfacePoint::flat(0.4, 0.3), 0.0),
            Event::new(SurfacePoint::flat(0.4, 0.3), 1.0),
        ];
        // Separation is 0.5 - tau, so the boundary is crossed at tau = 0.5.
        let tau = st.null_moment_detector(&p1, &p2).unwrap().unwrap();
        assert_relative_eq!(tau, 0.5, epsilon = 1e-9);
    }

    #[test]
    fn detector_reports_boundary_hit_at_the_endpoint() {
        let st = plane();
        let p1 = vec![
            Event::new(SurfacePoint::flat(0.0, 0.0), 0.0),
            Event::new(SurfacePoint::flat(0.0, 0.0), 0.0),
        ];
        let p2 = vec![
            Event::new(SurfacePoint::flat(1.0, 0.0), 0.0),
            Event::new(SurfacePoint::flat(1.0, 0.0), 1.0),
        ];
        let tau = st.null_moment_detector(&p1, &p2).unwrap().unwrap();
        assert_relative_eq!(tau, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn detector_rejects_degenerate_paths() {
        let st = plane();
        let one = vec![Event::new(SurfacePoint::flat(0.0, 0.0), 0.0)];
        let two = vec![
            Event::new(SurfacePoint::flat(0.0, 0.0), 0.0),
            Event::new(SurfacePoint::flat(0.0, 0.0), 1.0),
        ];
        assert!(st.null_moment_detector(&one, &two).is_err());
        let three = vec![
            Event::new(SurfacePoint::flat(0.0, 0.0), 0.0),
            Event::new(SurfacePoint::flat(0.0, 0.0), 0.5),
            Event::new(SurfacePoint::flat(0.0, 0.0), 1.0),
        ];
        assert!(st.null_moment_detector(&three, &two).is_err());
    }

    #[test]
    fn chronology_agrees_with_lorentz_distance() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for model in all_models() {
            let st = StaticSpacetime::new(model.clone());
            for _ in 0..1000 {
                let x = random_event(&model, &mut rng, (-2.0, 2.0));
                let y = random_event(&model, &mut rng, (-2.0, 2.0));
                let v = st.causal_relation(&x, &y).unwrap();
                if v.is_null() || v.is_identical() {
                    continue;
                }
                let chrono_future = matches!(
                    v,
                    CausalVerdict::ChronologicallyRelated {
                        direction: TimeOrder::Future,
                        ..
                    }
                );
                let positive = st.lorentz_distance(&x, &y).unwrap() > 0.0;
                assert_eq!(chrono_future, positive);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig { cases: 200, ..ProptestConfig::default() })]

        #[test]
        fn causal_verdicts_are_antisymmetric(
            px in 0.0..1.0f64, py in 0.0..1.0f64,
            qx in 0.0..1.0f64, qy in 0.0..1.0f64,
            t1 in -2.0..2.0f64, t2 in -2.0..2.0f64,
        ) {
            let st = torus();
            let x = Event::new(SurfacePoint::flat(px, py), t1);
            let y = Event::new(SurfacePoint::flat(qx, qy), t2);
            let fwd = st.causal_relation(&x, &y).unwrap();
            let bwd = st.causal_relation(&y, &x).unwrap();
            match fwd {
                CausalVerdict::Unrelated => {
                    prop_assert!(matches!(bwd, CausalVerdict::Unrelated));
                }
                CausalVerdict::ChronologicallyRelated { direction, identical } => {
                    match bwd {
                        CausalVerdict::ChronologicallyRelated {
                            direction: back,
                            identical: id2,
                        } => {
                            prop_assert_eq!(identical, id2);
                            if !identical {
                                prop_assert!(direction != back);
                            }
                        }
                        other => prop_assert!(false, "asymmetric verdict {:?}", other),
                    }
                }
                CausalVerdict::NullRelated { connections } => {
                    match bwd {
                        CausalVerdict::NullRelated { connections: back } => {
                            prop_assert_eq!(connections.len(), back.len());
                        }
                        other => prop_assert!(false, "asymmetric verdict {:?}", other),
                    }
                }
            }
        }

        #[test]
        fn causal_verdict_is_time_translation_invariant(
            px in -1.0..1.0f64, py in -1.0..1.0f64,
            qx in -1.0..1.0f64, qy in -1.0..1.0f64,
            t1 in -1.0..1.0f64, t2 in -1.0..1.0f64,
            c in -20.0..20.0f64,
        ) {
            let st = plane();
            let x = Event::new(SurfacePoint::flat(px, py), t1);
            let y = Event::new(SurfacePoint::flat(qx, qy), t2);
            let xs = Event::new(SurfacePoint::flat(px, py), t1 + c);
            let ys = Event::new(SurfacePoint::flat(qx, qy), t2 + c);
            let a = st.causal_relation(&x, &y).unwrap();
            let b = st.causal_relation(&xs, &ys).unwrap();
            prop_assert_eq!(
                std::mem::discriminant(&a),
                std::mem::discriminant(&b)
            );
        }

        #[test]
        fn plane_causality_is_scale_invariant(
            px in -1.0..1.0f64, py in -1.0..1.0f64,
            qx in -1.0..1.0f64, qy in -1.0..1.0f64,
            t1 in -1.0..1.0f64, t2 in -1.0..1.0f64,
            c in 0.1..10.0f64,
        ) {
            let st = plane();
            let x = Event::new(SurfacePoint::flat(px, py), t1);
            let y = Event::new(SurfacePoint::flat(qx, qy), t2);
            let xs = Event::new(SurfacePoint::flat(c * px, c * py), c * t1);
            let ys = Event::new(SurfacePoint::flat(c * qx, c * qy), c * t2);
            let a = st.causal_relation(&x, &y).unwrap();
            let b = st.causal_relation(&xs, &ys).unwrap();
            prop_assert_eq!(
                std::mem::discriminant(&a),
                std::mem::discriminant(&b)
            );
        }
    }
}
