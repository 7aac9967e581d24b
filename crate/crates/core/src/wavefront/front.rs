use nalgebra::Vector2;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::spacetime::{Event, StaticSpacetime};
use crate::surface::{SurfaceModel, SurfacePoint, TangentVector};

/// One record of a discretized front: circle parameter, position, the d/ds
/// tangent of the front curve, and the unit conormal (for static models this
/// is the outward ray direction, which doubles as the lift codirection).
#[derive(Clone, Copy, Debug)]
pub struct FrontSample {
    pub s: f64,
    pub point: SurfacePoint,
    pub tangent: TangentVector,
    pub conormal: TangentVector,
}

/// A wave front on a fixed time slice together with its conormal lift.
///
/// Samples are ordered by strictly increasing `s` in `[0, 2pi)` and are
/// immutable after construction; every accessor hands out copies.
#[derive(Clone, Debug)]
pub struct Front {
    pub source: Event,
    pub slice_time: f64,
    pub samples: Vec<FrontSample>,
}

/// A degenerate front concentrated at one point: the full circle of unit
/// directions in the fiber over `center`.
#[derive(Clone, Debug)]
pub struct FiberFront {
    pub center: SurfacePoint,
    pub samples: Vec<TangentVector>,
}

/// Geodesic flow backend for front propagation. The closed form is exact;
/// the Runge-Kutta option exists so convergence toward the closed form can
/// be demonstrated rather than assumed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Integrator {
    ClosedForm,
    Rk4 { step: f64 },
}

/// Propagates the front of `x` to parameter time `t` with `n` uniformly
/// spaced rays, using closed-form geodesics.
pub fn propagate_front(st: &StaticSpacetime, x: &Event, t: f64, n: usize) -> Result<Front> {
    propagate_front_with(st, x, t, n, Integrator::ClosedForm)
}

/// Propagation with an explicit integrator choice.
///
/// Each ray is independent, so endpoints are evaluated in parallel; the
/// collect preserves index order, which keeps parallel and serial runs
/// bit-identical.
pub fn propagate_front_with(
    st: &StaticSpacetime,
    x: &Event,
    t: f64,
    n: usize,
    integrator: Integrator,
) -> Result<Front> {
    if n < 16 {
        return Err(Error::TooFewSamples { need: 16, got: n });
    }
    if !(t >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "front parameter time must be nonnegative, got {t}"
        )));
    }
    let ends: Vec<(SurfacePoint, TangentVector)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let s = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
            match integrator {
                Integrator::ClosedForm => st.null_ray(x, s, t),
                Integrator::Rk4 { step } => {
                    let dir = st.surface.ray_direction(&x.point, s)?;
                    st.surface.integrate_geodesic_rk4(&dir, t, step)
                }
            }
        })
        .collect::<Result<Vec<_>>>()?;

    let ds = 2.0 * std::f64::consts::PI / n as f64;
    let mut samples = Vec::with_capacity(n);
    for i in 0..n {
        let (point, velocity) = ends[i];
        let prev = ends[(i + n - 1) % n].0;
        let next = ends[(i + 1) % n].0;
        // Symmetric difference through chords based at the sample itself;
        // on the sphere both chords live in the same tangent plane.
        let fwd = st.surface.chord(&point, &next)?;
        let bwd = st.surface.chord(&point, &prev)?;
        let tangent = TangentVector::combine(&fwd, 1.0 / (2.0 * ds), &bwd, -1.0 / (2.0 * ds))?;
        let norm = st.surface.norm(&velocity)?;
        let conormal = if norm > 1e-12 {
            velocity.scaled(1.0 / norm)
        } else {
            velocity
        };
        samples.push(FrontSample {
            s: 2.0 * std::f64::consts::PI * i as f64 / n as f64,
            point,
            tangent,
            conormal,
        });
    }
    Ok(Front {
        source: x.clone(),
        slice_time: x.time + t,
        samples,
    })
}

/// The fiber front at `v`: `n` uniformly spaced unit directions, all based
/// at the same point. Any positive `n` is accepted since no differencing
/// happens on a degenerate front.
pub fn fiber_front(model: &SurfaceModel, v: &SurfacePoint, n: usize) -> Result<FiberFront> {
    if n == 0 {
        return Err(Error::TooFewSamples { need: 1, got: 0 });
    }
    let center = model.canonical_point(v)?;
    let samples = (0..n)
        .map(|i| {
            let s = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
            model.ray_direction(&center, s)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FiberFront { center, samples })
}

/// Reports the focal point when the whole front has collapsed: if the
/// maximum pairwise distance among sample points is below `tol_refocus`,
/// returns the cluster center, otherwise `None`.
pub fn refocus_detect(st: &StaticSpacetime, front: &Front) -> Result<Option<SurfacePoint>> {
    let pts: Vec<SurfacePoint> = front.samples.iter().map(|r| r.point).collect();
    if pts.is_empty() {
        return Ok(None);
    }
    let tol = st.policy.tol_refocus;
    for i in 0..pts.len() {
        for j in (i + 1)..pts.len() {
            if st.surface.riemannian_distance(&pts[i], &pts[j])? >= tol {
                return Ok(None);
            }
        }
    }
    let center = match st.surface {
        SurfaceModel::FlatPlane | SurfaceModel::FlatTorus { .. } => {
            // Mean of chords from the first sample; immune to wrap seams.
            let base = pts[0];
            let mut acc = Vector2::zeros();
            for p in &pts {
                acc += st.surface.chord(&base, p)?.flat_components()?;
            }
            let c = base.flat_coords()? + acc / pts.len() as f64;
            st.surface.canonical_point(&SurfacePoint::Flat(c))?
        }
        SurfaceModel::RoundSphere { .. } => {
            let mut acc = nalgebra::Vector3::zeros();
            for p in &pts {
                acc += p.unit_dir()?;
            }
            SurfacePoint::sphere(acc)?
        }
    };
    Ok(Some(center))
}

/// Coorientation of a synthetic circular front.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Coorientation {
    Outward,
    Inward,
}

/// Builds a planar circle front with analytic tangents and the requested
/// coorientation. Outward circles match `propagate_front` on the plane; the
/// inward variant exists for staging tangency scenes.
pub fn circle_front(
    center: Vector2<f64>,
    radius: f64,
    n: usize,
    coorient: Coorientation,
    slice_time: f64,
) -> Result<Front> {
    if n < 16 {
        return Err(Error::TooFewSamples { need: 16, got: n });
    }
    if !(radius > 0.0) {
        return Err(Error::InvalidInput(format!(
            "circle front needs positive radius, got {radius}"
        )));
    }
    let sign = match coorient {
        Coorientation::Outward => 1.0,
        Coorientation::Inward => -1.0,
    };
    let samples = (0..n)
        .map(|i| {
            let s = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
            let u = Vector2::new(s.cos(), s.sin());
            let point = SurfacePoint::Flat(center + u * radius);
            FrontSample {
                s,
                point,
                tangent: TangentVector::flat(point, -radius * s.sin(), radius * s.cos()),
                conormal: TangentVector::flat(point, sign * u.x, sign * u.y),
            }
        })
        .collect();
    Ok(Front {
        source: Event::new(SurfacePoint::Flat(center), slice_time - radius),
        slice_time,
        samples,
    })
}

impl Front {
    /// Rigid translation of a planar front. Chart-only operation, so it is
    /// restricted to fronts whose samples carry flat coordinates.
    pub fn translated(&self, delta: Vector2<f64>) -> Result<Front> {
        let shift_point = |p: &SurfacePoint| -> Result<SurfacePoint> {
            Ok(SurfacePoint::Flat(p.flat_coords()? + delta))
        };
        let shift_tangent = |v: &TangentVector| -> Result<TangentVector> {
            let c = v.flat_components()?;
            Ok(TangentVector::flat(shift_point(&v.base)?, c.x, c.y))
        };
        let samples = self
            .samples
            .iter()
            .map(|r| {
                Ok(FrontSample {
                    s: r.s,
                    point: shift_point(&r.point)?,
                    tangent: shift_tangent(&r.tangent)?,
                    conormal: shift_tangent(&r.conormal)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Front {
            source: Event::new(shift_point(&self.source.point)?, self.source.time),
            slice_time: self.slice_time,
            samples,
        })
    }

    /// Maximum chart distance between adjacent samples (wraparound pair
    /// included). Zero exactly when the front is degenerate.
    pub fn max_adjacent_spacing(&self, model: &SurfaceModel) -> Result<f64> {
        let n = self.samples.len();
        let mut max = 0.0f64;
        for i in 0..n {
            let d = model.riemannian_distance(
                &self.samples[i].point,
                &self.samples[(i + 1) % n].point,
            )?;
            max = max.max(d);
        }
        Ok(max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::testutil::{all_models, random_point};
    use approx::assert_abs_diff_eq;
    use nalgebra::Vector3;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn plane_st() -> StaticSpacetime {
        StaticSpacetime::new(SurfaceModel::FlatPlane)
    }

    #[test]
    fn plane_front_is_unit_circle_with_outward_conormals() {
        let st = plane_st();
        let x = Event::new(SurfacePoint::flat(0.0, 0.0), 0.0);
        let f = propagate_front(&st, &x, 1.0, 512).unwrap();
        assert_eq!(f.samples.len(), 512);
        assert_abs_diff_eq!(f.slice_time, 1.0);
        for r in &f.samples {
            let p = r.point.flat_coords().unwrap();
            assert_abs_diff_eq!(p.norm(), 1.0, epsilon = 1e-12);
            let co = r.conormal.flat_components().unwrap();
            assert!((co - p).norm() < 1e-12, "conormal must point outward");
            let tan = r.tangent.flat_components().unwrap();
            let analytic = Vector2::new(-r.s.sin(), r.s.cos());
            assert!(
                (tan - analytic).norm() < 1e-4,
                "central difference should track the analytic tangent"
            );
        }
        for w in f.samples.windows(2) {
            assert!(w[1].s > w[0].s);
        }
    }

    #[test]
    fn zero_time_front_collapses_onto_fiber_front() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for model in all_models() {
            let st = StaticSpacetime::new(model.clone());
            let p = random_point(&model, &mut rng);
            let x = Event::new(p, 0.3);
            let f = propagate_front(&st, &x, 0.0, 32).unwrap();
            let ff = fiber_front(&model, &p, 32).unwrap();
            assert_abs_diff_eq!(f.slice_time, 0.3);
            for (r, dir) in f.samples.iter().zip(&ff.samples) {
                assert!(model.riemannian_distance(&r.point, &ff.center).unwrap() < 1e-12);
                assert!(model.inner(&r.conormal, dir).unwrap() > 1.0 - 1e-9);
            }
        }
    }

    #[test]
    fn fiber_front_covers_four_axis_directions() {
        let ff = fiber_front(&SurfaceModel::FlatPlane, &SurfacePoint::flat(0.0, 0.0), 4).unwrap();
        let expect = [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)];
        for (v, (ex, ey)) in ff.samples.iter().zip(expect) {
            let c = v.flat_components().unwrap();
            assert_abs_diff_eq!(c.x, ex, epsilon = 1e-12);
            assert_abs_diff_eq!(c.y, ey, epsilon = 1e-12);
        }
    }

    #[test]
    fn lift_is_legendrian_on_every_model() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for model in all_models() {
            let st = StaticSpacetime::new(model.clone());
            let x = Event::new(random_point(&model, &mut rng), 0.0);
            for t in [0.5, 2.0, 10.0] {
                let f = propagate_front(&st, &x, t, 512).unwrap();
                let mut worst = 0.0f64;
                for r in &f.samples {
                    worst = worst.max(model.inner(&r.conormal, &r.tangent).unwrap().abs());
                }
                assert!(worst < 1e-6, "{model:?} at t = {t}: defect {worst}");
            }
        }
    }

    #[test]
    fn flat_fronts_stay_immersed() {
        let models = [
            SurfaceModel::FlatPlane,
            SurfaceModel::flat_torus(1.0, 1.0).unwrap(),
        ];
        let n = 512usize;
        for model in models {
            let st = StaticSpacetime::new(model.clone());
            let x = Event::new(SurfacePoint::flat(0.4, 0.1), 0.0);
            for t in [0.5, 2.0, 10.0] {
                let f = propagate_front(&st, &x, t, n).unwrap();
                let mut min = f64::INFINITY;
                for i in 0..n {
                    let d = model
                        .riemannian_distance(
                            &f.samples[i].point,
                            &f.samples[(i + 1) % n].point,
                        )
                        .unwrap();
                    min = min.min(d);
                }
                let nominal = 2.0 * PI * t / n as f64;
                assert!(
                    min >= 0.5 * nominal,
                    "{model:?} t = {t}: min spacing {min} vs nominal {nominal}"
                );
            }
        }
    }

    #[test]
    fn sphere_front_refocuses_at_antipode_then_source() {
        let st = StaticSpacetime::new(SurfaceModel::round_sphere(1.0).unwrap());
        let src = SurfacePoint::sphere(Vector3::new(1.0, 0.0, 0.0)).unwrap();
        let antipode = SurfacePoint::sphere(Vector3::new(-1.0, 0.0, 0.0)).unwrap();
        let x = Event::new(src, 0.0);

        let f_half = propagate_front(&st, &x, PI, 256).unwrap();
        let c = refocus_detect(&st, &f_half).unwrap().expect("refocus at pi");
        assert!(st.surface.riemannian_distance(&c, &antipode).unwrap() < 1e-3);

        let f_full = propagate_front(&st, &x, 2.0 * PI, 256).unwrap();
        let c = refocus_detect(&st, &f_full)
            .unwrap()
            .expect("front returns to the source");
        assert!(st.surface.riemannian_distance(&c, &src).unwrap() < 1e-3);

        let f_mid = propagate_front(&st, &x, 1.0, 256).unwrap();
        assert!(refocus_detect(&st, &f_mid).unwrap().is_none());
    }

    #[test]
    fn rk4_propagation_reproduces_the_refocus() {
        let st = StaticSpacetime::new(SurfaceModel::round_sphere(1.0).unwrap());
        let src = SurfacePoint::sphere(Vector3::new(0.0, 0.0, 1.0)).unwrap();
        let x = Event::new(src, 0.0);
        let f = propagate_front_with(&st, &x, PI, 64, Integrator::Rk4 { step: 1e-3 }).unwrap();
        let mut spread = 0.0f64;
        for a in &f.samples {
            for b in &f.samples {
                spread = spread.max(
                    st.surface
                        .riemannian_distance(&a.point, &b.point)
                        .unwrap(),
                );
            }
        }
        assert!(spread < 1e-3, "front spread at the focal time: {spread}");
    }

    #[test]
    fn plane_front_never_refocuses() {
        let st = plane_st();
        let x = Event::new(SurfacePoint::flat(0.0, 0.0), 0.0);
        let f = propagate_front(&st, &x, 1.0, 64).unwrap();
        assert!(refocus_detect(&st, &f).unwrap().is_none());
    }

    #[test]
    fn front_is_independent_of_the_source_slice() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for model in all_models() {
            let st = StaticSpacetime::new(model.clone());
            let p = random_point(&model, &mut rng);
            let f0 = propagate_front(&st, &Event::new(p, 0.0), 1.7, 64).unwrap();
            let fc = propagate_front(&st, &Event::new(p, 5.25), 1.7, 64).unwrap();
            assert_abs_diff_eq!(fc.slice_time - f0.slice_time, 5.25);
            for (a, b) in f0.samples.iter().zip(&fc.samples) {
                // Static time translation must not touch the spatial data.
                assert_eq!(a.point, b.point);
                assert_eq!(a.conormal.rep, b.conormal.rep);
            }
        }
    }

    #[test]
    fn torus_front_lifts_to_the_plane_circle() {
        let model = SurfaceModel::flat_torus(1.0, 1.0).unwrap();
        let st = StaticSpacetime::new(model.clone());
        let center = Vector2::new(0.2, 0.7);
        let t = 0.9;
        let n = 128usize;
        let f = propagate_front(&st, &Event::new(SurfacePoint::Flat(center), 0.0), t, n).unwrap();
        for (i, r) in f.samples.iter().enumerate() {
            let s = 2.0 * PI * i as f64 / n as f64;
            let lift = center + Vector2::new(s.cos(), s.sin()) * t;
            let wrapped = model.canonical_point(&SurfacePoint::Flat(lift)).unwrap();
            assert!(model.riemannian_distance(&wrapped, &r.point).unwrap() < 1e-9);
        }
    }

    #[test]
    fn sparse_sampling_is_rejected() {
        let st = plane_st();
        let x = Event::new(SurfacePoint::flat(0.0, 0.0), 0.0);
        match propagate_front(&st, &x, 1.0, 8) {
            Err(Error::TooFewSamples { need: 16, got: 8 }) => {}
            other => panic!("expected TooFewSamples, got {other:?}"),
        }
    }

    #[test]
    fn translation_moves_points_but_not_conormals() {
        let f = circle_front(Vector2::new(0.0, 0.0), 1.0, 64, Coorientation::Outward, 2.0)
            .unwrap();
        let g = f.translated(Vector2::new(3.0, -1.0)).unwrap();
        assert_abs_diff_eq!(g.slice_time, 2.0);
        for (a, b) in f.samples.iter().zip(&g.samples) {
            let pa = a.point.flat_coords().unwrap();
            let pb = b.point.flat_coords().unwrap();
            assert_abs_diff_eq!(pb.x - pa.x, 3.0, epsilon = 1e-12);
            assert_abs_diff_eq!(pb.y - pa.y, -1.0, epsilon = 1e-12);
            assert_eq!(a.conormal.rep, b.conormal.rep);
        }
    }

    #[test]
    fn circle_front_matches_propagation_on_the_plane() {
        let st = plane_st();
        let x = Event::new(SurfacePoint::flat(0.3, -0.2), 0.5);
        let prop = propagate_front(&st, &x, 1.25, 128).unwrap();
        let synth = circle_front(
            Vector2::new(0.3, -0.2),
            1.25,
            128,
            Coorientation::Outward,
            1.75,
        )
        .unwrap();
        assert_abs_diff_eq!(prop.slice_time, synth.slice_time);
        for (a, b) in prop.samples.iter().zip(&synth.samples) {
            let pa = a.point.flat_coords().unwrap();
            let pb = b.point.flat_coords().unwrap();
            assert!((pa - pb).norm() < 1e-12);
            let ca = a.conormal.flat_components().unwrap();
            let cb = b.conormal.flat_components().unwrap();
            assert!((ca - cb).norm() < 1e-12);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn conormals_are_unit_for_any_front(seed in 0u64..1024, t in 1e-3f64..5.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for model in all_models() {
                let st = StaticSpacetime::new(model.clone());
                let x = Event::new(random_point(&model, &mut rng), 0.0);
                let f = propagate_front(&st, &x, t, 32).unwrap();
                for r in &f.samples {
                    let n = model.norm(&r.conormal).unwrap();
                    prop_assert!((n - 1.0).abs() < 1e-9);
                }
            }
        }
    }
}
