//! The intersection engine: the linking value as a signed count of
//! transverse crossings between the earlier sky's expanding fronts and a
//! timelike curve arriving at the later event.
//!
//! At a crossing the cone sheet and the curve meet in the spacetime; the
//! sign is the determinant of the resolved 2-frame (front tangent against
//! relative velocity) in the oriented slice, and the crossings sum directly
//! to the linking value.

use nalgebra::Vector2;

use crate::alk::counting::{AlkComputation, AlkEngine, CrossingMethod, SignedCrossing};
use crate::alk::group::AlkValue;
use crate::alk::roots::{self, ConeMap, Root, Target};
use crate::error::{Error, Result};
use crate::spacetime::Event;
use crate::surface::{SurfaceModel, SurfacePoint, TangentVector};

// Genericity cutoff for focal hits: a crossing whose front radius is below
// this fraction of the sphere radius counts as sitting on the caustic.
const FOCAL_MARGIN: f64 = 1e-7;

/// A future-directed timelike polygonal curve, stored as slice samples.
/// Between samples the spatial track follows the shortest-representative
/// interpolation of the model, so consecutive samples should be close
/// compared to any period of the surface.
#[derive(Clone, Debug)]
pub struct TimelikeCurve {
    samples: Vec<Event>,
}

impl TimelikeCurve {
    pub fn new(model: &SurfaceModel, samples: Vec<Event>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::TooFewSamples {
                need: 2,
                got: samples.len(),
            });
        }
        let mut canonical = Vec::with_capacity(samples.len());
        for e in &samples {
            canonical.push(Event::new(model.canonical_point(&e.point)?, e.time));
        }
        for i in 1..canonical.len() {
            let dt = canonical[i].time - canonical[i - 1].time;
            if !(dt > 0.0) {
                return Err(Error::NotFutureDirected { index: i });
            }
            let d = model.riemannian_distance(&canonical[i - 1].point, &canonical[i].point)?;
            if d >= dt {
                return Err(Error::NotTimelike { index: i });
            }
        }
        Ok(TimelikeCurve { samples: canonical })
    }

    /// Static observer: fixed spatial point, uniformly sampled in time.
    pub fn vertical(
        model: &SurfaceModel,
        point: &SurfacePoint,
        t0: f64,
        t1: f64,
        n: usize,
    ) -> Result<Self> {
        if n < 2 {
            return Err(Error::TooFewSamples { need: 2, got: n });
        }
        if !(t1 > t0) {
            return Err(Error::InvalidInput(format!(
                "vertical curve needs t1 > t0, got [{t0}, {t1}]"
            )));
        }
        let p = model.canonical_point(point)?;
        let samples = (0..n)
            .map(|i| {
                let u = i as f64 / (n - 1) as f64;
                Event::new(p, t0 + (t1 - t0) * u)
            })
            .collect();
        TimelikeCurve::new(model, samples)
    }

    /// Straight-track boost between two events; valid only when the
    /// displacement is timelike.
    pub fn tilted(model: &SurfaceModel, from: &Event, to: &Event, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::TooFewSamples { need: 2, got: n });
        }
        if !(to.time > from.time) {
            return Err(Error::NotFutureDirected { index: 1 });
        }
        let mut samples = Vec::with_capacity(n);
        for i in 0..n {
            let u = i as f64 / (n - 1) as f64;
            samples.push(Event::new(
                model.interpolate(&from.point, &to.point, u)?,
                from.time + (to.time - from.time) * u,
            ));
        }
        TimelikeCurve::new(model, samples)
    }

    pub fn samples(&self) -> &[Event] {
        &self.samples
    }

    pub fn start(&self) -> &Event {
        &self.samples[0]
    }

    pub fn end(&self) -> &Event {
        self.samples.last().unwrap()
    }

    /// Position and velocity at an absolute slice time inside the sampled
    /// range.
    pub(crate) fn locate(
        &self,
        model: &SurfaceModel,
        time: f64,
    ) -> Result<(SurfacePoint, TangentVector)> {
        let first = self.start().time;
        let last = self.end().time;
        if time < first - 1e-9 || time > last + 1e-9 {
            return Err(Error::InvalidInput(format!(
                "curve parameter {time} outside the sampled range [{first}, {last}]"
            )));
        }
        let time = time.clamp(first, last);
        let i = self
            .samples
            .partition_point(|e| e.time <= time)
            .clamp(1, self.samples.len() - 1);
        let (a, b) = (&self.samples[i - 1], &self.samples[i]);
        let dt = b.time - a.time;
        let u = ((time - a.time) / dt).clamp(0.0, 1.0);
        let pos = model.interpolate(&a.point, &b.point, u)?;
        let vel = match model {
            SurfaceModel::FlatPlane | SurfaceModel::FlatTorus { .. } => {
                let c = model.chord(&a.point, &b.point)?.flat_components()?;
                TangentVector::flat(pos, c.x / dt, c.y / dt)
            }
            SurfaceModel::RoundSphere { radius } => {
                let va = a.point.unit_dir()?;
                let vb = b.point.unit_dir()?;
                let angle = va.cross(&vb).norm().atan2(va.dot(&vb));
                let dv = if angle < 1e-9 {
                    vb - va
                } else {
                    (va * (-(((1.0 - u) * angle).cos())) + vb * (u * angle).cos())
                        * (angle / angle.sin())
                };
                TangentVector::sphere(pos, dv * *radius / dt)
            }
        };
        Ok((pos, vel))
    }
}

struct CurveTarget<'a> {
    model: &'a SurfaceModel,
    curve: &'a TimelikeCurve,
    base_time: f64,
}

impl Target for CurveTarget<'_> {
    fn position(&self, t: f64) -> Result<SurfacePoint> {
        Ok(self.curve.locate(self.model, self.base_time + t)?.0)
    }

    fn velocity(&self, t: f64) -> Result<TangentVector> {
        Ok(self.curve.locate(self.model, self.base_time + t)?.1)
    }
}

impl AlkEngine {
    /// Signed front/curve crossing count at the policy ray resolution.
    pub fn alk_by_intersection(
        &self,
        x: &Event,
        y: &Event,
        curve: &TimelikeCurve,
    ) -> Result<AlkComputation> {
        self.alk_by_intersection_with(x, y, curve, self.st.policy.n_samples)
    }

    pub fn alk_by_intersection_with(
        &self,
        x: &Event,
        y: &Event,
        curve: &TimelikeCurve,
        rays: usize,
    ) -> Result<AlkComputation> {
        if rays < 16 {
            return Err(Error::TooFewSamples {
                need: 16,
                got: rays,
            });
        }
        self.reject_degenerate_pair(x, y)?;
        let tau = y.time - x.time;
        if tau < 0.0 {
            return Err(Error::InvalidInput(
                "the crossing window is empty: the second event precedes the first slice"
                    .into(),
            ));
        }
        let surf = &self.st.surface;
        let end = curve.end();
        if (end.time - y.time).abs() > 1e-9
            || surf.riemannian_distance(&end.point, &y.point)? > 1e-9
        {
            return Err(Error::InvalidInput(
                "the curve must terminate at the second event".into(),
            ));
        }
        if curve.start().time > x.time + 1e-12 {
            return Err(Error::InvalidInput(
                "the curve must start no later than the first event's slice".into(),
            ));
        }
        let p = surf.canonical_point(&x.point)?;
        let (at_vertex, _) = curve.locate(surf, x.time)?;
        if surf.riemannian_distance(&at_vertex, &p)? < 1e-9 {
            return Err(Error::CurveThroughVertex);
        }
        let mut crossings = Vec::new();
        let mut raw: i64 = 0;
        if tau > 0.0 {
            let target = CurveTarget {
                model: surf,
                curve,
                base_time: x.time,
            };
            let hits = roots::find_preimages(&self.st, &p, tau, rays, &target)?;
            let cone = ConeMap::new(&self.st, &p)?;
            for root in &hits {
                let cdot = target.velocity(root.t)?;
                let sigma = self.crossing_sign_at(&cone, root, &cdot)?;
                raw += i64::from(sigma);
                crossings.push(SignedCrossing {
                    parameter: x.time + root.t,
                    location: root.point,
                    sign: sigma,
                    method: CrossingMethod::FrameDeterminant,
                });
            }
        }
        Ok(AlkComputation {
            value: AlkValue::new(raw, self.group),
            crossings,
            swapped: false,
            perturbed: false,
        })
    }

    /// Sign of one transverse crossing: determinant of the front tangent
    /// against the relative velocity of curve and front, in the oriented
    /// orthonormal frame of the slice at the crossing point.
    fn crossing_sign_at(
        &self,
        cone: &ConeMap,
        root: &Root,
        cdot: &TangentVector,
    ) -> Result<i8> {
        let (det, scale) = match cone {
            ConeMap::Flat { .. } => {
                let (sn, cs) = root.s.sin_cos();
                let front_tangent = Vector2::new(-sn, cs) * root.t;
                let relative = cdot.flat_components()? - Vector2::new(cs, sn);
                (front_tangent.perp(&relative), front_tangent.norm() * relative.norm())
            }
            ConeMap::Sphere { n, e1, e2, r } => {
                let (sns, css) = root.s.sin_cos();
                let (snt, cst) = (root.t / r).sin_cos();
                // Focal instants t = k*pi*r shrink the sheet to a point, so a
                // crossing there is never transverse regardless of the frame
                // determinant: the whole ray bundle lands on one event and the
                // relative test below stays O(1) while both factors vanish.
                if snt.abs() < FOCAL_MARGIN {
                    return Err(Error::NonGenericCurve(format!(
                        "crossing at t = {:.6} sits on a focal point of the cone \
                         (front radius {:.1e}); move the observer off the caustic",
                        root.t,
                        (snt * *r).abs()
                    )));
                }
                let d = e1 * css + e2 * sns;
                let dp = -e1 * sns + e2 * css;
                let front_tangent = dp * (*r * snt);
                let relative = cdot.sphere_components()? - (-n * snt + d * cst);
                let outward = n * cst + d * snt;
                (
                    front_tangent.cross(&relative).dot(&outward),
                    front_tangent.norm() * relative.norm(),
                )
            }
        };
        if det.abs() <= self.st.policy.tol_frame * scale.max(1e-30) {
            return Err(Error::NonGenericCurve(format!(
                "crossing at (s = {:.6}, t = {:.6}) is not transverse: frame determinant \
                 {det:.3e} against scale {scale:.3e}",
                root.s, root.t
            )));
        }
        Ok(if det > 0.0 { 1 } else { -1 })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alk::group::CoefficientGroup;
    use crate::spacetime::StaticSpacetime;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn engine(model: SurfaceModel) -> AlkEngine {
        AlkEngine::new(StaticSpacetime::new(model), CoefficientGroup::Integers)
    }

    fn ev(x: f64, y: f64, t: f64) -> Event {
        Event::new(SurfacePoint::flat(x, y), t)
    }

    #[test]
    fn curve_validation_catches_bad_inputs() {
        let plane = SurfaceModel::FlatPlane;
        let one = vec![ev(0.0, 0.0, 0.0)];
        assert!(matches!(
            TimelikeCurve::new(&plane, one),
            Err(Error::TooFewSamples { need: 2, got: 1 })
        ));
        let back = vec![ev(0.0, 0.0, 1.0), ev(0.0, 0.0, 0.5)];
        assert!(matches!(
            TimelikeCurve::new(&plane, back),
            Err(Error::NotFutureDirected { index: 1 })
        ));
        let fast = vec![ev(0.0, 0.0, 0.0), ev(2.0, 0.0, 1.0)];
        assert!(matches!(
            TimelikeCurve::new(&plane, fast),
            Err(Error::NotTimelike { index: 1 })
        ));
    }

    #[test]
    fn static_observer_is_crossed_once_on_the_plane() {
        let eng = engine(SurfaceModel::FlatPlane);
        let x = ev(0.0, 0.0, 0.0);
        let y = ev(0.3, 0.0, 1.0);
        let curve = TimelikeCurve::vertical(
            &eng.st.surface,
            &SurfacePoint::flat(0.3, 0.0),
            -0.5,
            1.0,
            4,
        )
        .unwrap();
        let out = eng.alk_by_intersection_with(&x, &y, &curve, 64).unwrap();
        assert_eq!(out.value.representative, 1);
        assert_eq!(out.crossings.len(), 1);
        let c = &out.crossings[0];
        assert_eq!(c.sign, 1);
        assert_eq!(c.method, CrossingMethod::FrameDeterminant);
        assert_relative_eq!(c.parameter, 0.3, epsilon = 1e-8);
    }

    #[test]
    fn torus_unit_window_crosses_three_times() {
        let eng = engine(SurfaceModel::flat_torus(1.0, 1.0).unwrap());
        let x = ev(0.0, 0.0, 0.0);
        let y = ev(0.1, 0.1, 1.0);
        let curve = TimelikeCurve::vertical(
            &eng.st.surface,
            &SurfacePoint::flat(0.1, 0.1),
            -0.1,
            1.0,
            8,
        )
        .unwrap();
        let out = eng.alk_by_intersection(&x, &y, &curve).unwrap();
        assert_eq!(out.value.representative, 3);
        assert!(out.crossings.iter().all(|c| c.sign == 1));
    }

    #[test]
    fn the_value_does_not_depend_on_the_arriving_curve() {
        let eng = engine(SurfaceModel::flat_torus(1.0, 1.0).unwrap());
        let x = ev(0.0, 0.0, 0.0);
        let y = ev(0.1, 0.1, 1.0);
        let vertical = TimelikeCurve::vertical(
            &eng.st.surface,
            &SurfacePoint::flat(0.1, 0.1),
            -0.2,
            1.0,
            8,
        )
        .unwrap();
        let boosted = TimelikeCurve::tilted(
            &eng.st.surface,
            &ev(0.4, 0.5, -0.2),
            &ev(0.1, 0.1, 1.0),
            10,
        )
        .unwrap();
        let a = eng.alk_by_intersection(&x, &y, &vertical).unwrap();
        let b = eng.alk_by_intersection(&x, &y, &boosted).unwrap();
        assert_eq!(a.value.representative, 3);
        assert_eq!(b.value.representative, 3);
    }

    #[test]
    fn vertical_crossings_reproduce_the_preimage_ledger() {
        let eng = engine(SurfaceModel::flat_torus(1.0, 1.0).unwrap());
        let x = ev(0.3, 0.3, 0.0);
        let y = ev(0.55, 0.8, 1.4);
        let counted = eng.alk_by_counting_with(&x, &y, 512).unwrap();
        let curve =
            TimelikeCurve::vertical(&eng.st.surface, &y.point, -0.5, y.time, 6).unwrap();
        let crossed = eng.alk_by_intersection_with(&x, &y, &curve, 512).unwrap();
        assert_eq!(
            counted.value.representative,
            crossed.value.representative
        );
        assert_eq!(counted.crossings.len(), crossed.crossings.len());
        for (a, b) in counted.crossings.iter().zip(crossed.crossings.iter()) {
            assert_relative_eq!(a.parameter, b.parameter, epsilon = 1e-7);
            assert_eq!(a.sign, b.sign);
        }
    }

    #[test]
    fn unrelated_pair_is_never_crossed() {
        let eng = engine(SurfaceModel::FlatPlane);
        let x = ev(0.0, 0.0, 0.0);
        let y = ev(5.0, 0.0, 1.0);
        let curve = TimelikeCurve::vertical(
            &eng.st.surface,
            &SurfacePoint::flat(5.0, 0.0),
            -0.5,
            1.0,
            4,
        )
        .unwrap();
        let out = eng.alk_by_intersection_with(&x, &y, &curve, 64).unwrap();
        assert_eq!(out.value.representative, 0);
        assert!(out.crossings.is_empty());
    }

    #[test]
    fn window_and_endpoint_preconditions_are_enforced() {
        let eng = engine(SurfaceModel::FlatPlane);
        let x = ev(0.0, 0.0, 0.0);
        let y = ev(0.3, 0.0, 1.0);
        let curve = TimelikeCurve::vertical(
            &eng.st.surface,
            &SurfacePoint::flat(0.3, 0.0),
            -0.5,
            1.0,
            4,
        )
        .unwrap();
        // Reversed window.
        let err = eng.alk_by_intersection_with(&y, &x, &curve, 64).unwrap_err();
        assert!(matches!(err, Error::InvalidInput(_)));
        // Curve ending elsewhere.
        let wrong = TimelikeCurve::vertical(
            &eng.st.surface,
            &SurfacePoint::flat(0.4, 0.0),
            -0.5,
            1.0,
            4,
        )
        .unwrap();
        let err = eng.alk_by_intersection_with(&x, &y, &wrong, 64).unwrap_err();
        assert!(matches!(err, Error::InvalidInput(_)));
        // Curve starting inside the window.
        let late = TimelikeCurve::vertical(
            &eng.st.surface,
            &SurfacePoint::flat(0.3, 0.0),
            0.5,
            1.0,
            4,
        )
        .unwrap();
        let err = eng.alk_by_intersection_with(&x, &y, &late, 64).unwrap_err();
        assert!(matches!(err, Error::InvalidInput(_)));
    }

    #[test]
    fn curves_through_the_cone_vertex_are_rejected() {
        let eng = engine(SurfaceModel::FlatPlane);
        let x = ev(0.0, 0.0, 0.0);
        let y = ev(0.0, 0.0, 1.0);
        let curve = TimelikeCurve::vertical(
            &eng.st.surface,
            &SurfacePoint::flat(0.0, 0.0),
            -0.5,
            1.0,
            4,
        )
        .unwrap();
        let err = eng.alk_by_intersection_with(&x, &y, &curve, 64).unwrap_err();
        assert!(matches!(err, Error::CurveThroughVertex));
    }

    #[test]
    fn sphere_crossings_match_the_counting_engine() {
        let eng = engine(SurfaceModel::round_sphere(1.0).unwrap());
        let x = Event::new(eng.st.surface.point_from_chart([0.0, 0.0]).unwrap(), 0.0);
        let y = Event::new(eng.st.surface.point_from_chart([0.0, 1.0]).unwrap(), 6.0);
        let counted = eng.alk_by_counting_with(&x, &y, 256).unwrap();
        let curve =
            TimelikeCurve::vertical(&eng.st.surface, &y.point, -0.5, y.time, 6).unwrap();
        let crossed = eng.alk_by_intersection_with(&x, &y, &curve, 256).unwrap();
        assert_eq!(counted.value.representative, crossed.value.representative);
        assert_eq!(counted.crossings.len(), crossed.crossings.len());
        let signs: Vec<i8> = crossed.crossings.iter().map(|c| c.sign).collect();
        assert!(signs.contains(&1) && signs.contains(&-1));
    }

    #[test]
    fn an_observer_parked_on_the_caustic_is_rejected() {
        // The antipodal static observer meets the cone exactly when the whole
        // front has refocused onto it; every ray lands at once and no sign is
        // meaningful there.
        let eng = engine(SurfaceModel::round_sphere(1.0).unwrap());
        let x = Event::new(eng.st.surface.point_from_chart([0.0, 0.0]).unwrap(), 0.0);
        let y = Event::new(
            eng.st.surface.point_from_chart([0.0, std::f64::consts::PI]).unwrap(),
            2.0 * std::f64::consts::PI,
        );
        let curve =
            TimelikeCurve::vertical(&eng.st.surface, &y.point, -0.5, y.time, 6).unwrap();
        let err = eng.alk_by_intersection_with(&x, &y, &curve, 64).unwrap_err();
        assert!(matches!(err, Error::NonGenericCurve(_)), "got {err:?}");
    }

    #[test]
    fn random_pairs_agree_with_counting_under_random_observers() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        for model in [
            SurfaceModel::FlatPlane,
            SurfaceModel::flat_torus(1.0, 1.0).unwrap(),
        ] {
            let eng = engine(model.clone());
            let mut checked = 0;
            while checked < 12 {
                let x = crate::testutil::random_event(&model, &mut rng, (-0.5, 0.5));
                let y = crate::testutil::random_event(&model, &mut rng, (0.6, 2.0));
                let d = eng
                    .st
                    .surface
                    .riemannian_distance(&x.point, &y.point)
                    .unwrap();
                let dt = y.time - x.time;
                if (d - dt).abs() < 5e-2 || d < 1e-2 {
                    continue;
                }
                let counted = match eng.alk_by_counting_with(&x, &y, 256) {
                    Ok(c) => c,
                    Err(_) => continue,
                };
                let curve = TimelikeCurve::vertical(
                    &eng.st.surface,
                    &y.point,
                    x.time - 0.5,
                    y.time,
                    6,
                )
                .unwrap();
                let crossed = eng.alk_by_intersection_with(&x, &y, &curve, 256).unwrap();
                assert_eq!(
                    counted.value.representative,
                    crossed.value.representative,
                    "pair {x:?} {y:?}"
                );
                checked += 1;
            }
        }
    }
}
