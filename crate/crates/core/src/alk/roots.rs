//! Shared root finder for the cone-hit equation `W(s, t) = c(t)`.
//!
//! `W(s, t)` is the spatial endpoint of the future null ray leaving a fixed
//! vertex with direction angle `s` after time advance `t`; the target `c` is
//! either a fixed slice point or a point moving along a curve. Both signed
//! counting engines reduce to enumerating every solution with `t` strictly
//! between 0 and the time separation, so the bracketing grid, the
//! Gauss-Newton polish, the duplicate merge, and the cone Jacobian helpers
//! live here once.

use nalgebra::{Matrix2, Vector2, Vector3};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::spacetime::StaticSpacetime;
use crate::surface::{SurfaceModel, SurfacePoint, TangentVector};

/// Moving side of the hit equation.
pub(crate) trait Target: Sync {
    fn position(&self, t: f64) -> Result<SurfacePoint>;
    /// Velocity at parameter `t`; identically zero for a fixed target.
    fn velocity(&self, t: f64) -> Result<TangentVector>;
}

pub(crate) struct FixedTarget(pub SurfacePoint);

impl Target for FixedTarget {
    fn position(&self, _: f64) -> Result<SurfacePoint> {
        Ok(self.0)
    }

    fn velocity(&self, _: f64) -> Result<TangentVector> {
        Ok(match self.0 {
            SurfacePoint::Flat(_) => TangentVector::flat(self.0, 0.0, 0.0),
            SurfacePoint::Sphere(_) => TangentVector::sphere(self.0, Vector3::zeros()),
        })
    }
}

/// One polished solution of the hit equation.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Root {
    /// Ray direction angle, folded into `[0, 2pi)`.
    pub s: f64,
    /// Time advance from the vertex slice, strictly inside `(0, tau)`.
    pub t: f64,
    /// Where the hit lands on the surface.
    pub point: SurfacePoint,
    /// Final residual of the polish (chart or chordal distance).
    pub residual: f64,
}

/// Precomputed geometry of the null cone over one vertex.
pub(crate) enum ConeMap {
    Flat {
        p: Vector2<f64>,
        periods: Option<[f64; 2]>,
    },
    Sphere {
        n: Vector3<f64>,
        e1: Vector3<f64>,
        e2: Vector3<f64>,
        r: f64,
    },
}

fn wrap_half(x: f64, period: f64) -> f64 {
    let m = x.rem_euclid(period);
    if m > 0.5 * period {
        m - period
    } else {
        m
    }
}

impl ConeMap {
    pub fn new(st: &StaticSpacetime, vertex: &SurfacePoint) -> Result<ConeMap> {
        let v = st.surface.canonical_point(vertex)?;
        Ok(match &st.surface {
            SurfaceModel::FlatPlane => ConeMap::Flat {
                p: v.flat_coords()?,
                periods: None,
            },
            SurfaceModel::FlatTorus { periods } => ConeMap::Flat {
                p: v.flat_coords()?,
                periods: Some(*periods),
            },
            SurfaceModel::RoundSphere { radius } => {
                // Same frame as ray_direction, so (s, t) here means exactly
                // what it means for null_cone_exp.
                let frame = st.surface.orthonormal_frame(&v)?;
                ConeMap::Sphere {
                    n: v.unit_dir()?,
                    e1: frame[0].sphere_components()?,
                    e2: frame[1].sphere_components()?,
                    r: *radius,
                }
            }
        })
    }

    /// Cone point at `(s, t)` in canonical surface form.
    pub fn position(&self, st: &StaticSpacetime, s: f64, t: f64) -> Result<SurfacePoint> {
        match self {
            ConeMap::Flat { p, .. } => {
                let c = p + Vector2::new(s.cos(), s.sin()) * t;
                st.surface.canonical_point(&SurfacePoint::flat(c.x, c.y))
            }
            ConeMap::Sphere { n, e1, e2, r } => {
                let d = e1 * s.cos() + e2 * s.sin();
                let (snt, cst) = (t / r).sin_cos();
                SurfacePoint::sphere(n * cst + d * snt)
            }
        }
    }

    /// Closed-form cone Jacobian determinant in the oriented orthonormal
    /// frame at the endpoint: `-t` on flat models, `-r sin(t/r)` on the
    /// sphere.
    pub fn analytic_jacobian_det(&self, t: f64) -> f64 {
        match self {
            ConeMap::Flat { .. } => -t,
            ConeMap::Sphere { r, .. } => -r * (t / r).sin(),
        }
    }

    /// Central-difference evaluation of the same determinant, computed from
    /// cone positions alone.
    pub fn fd_jacobian_det(&self, s: f64, t: f64, h: f64) -> f64 {
        match self {
            ConeMap::Flat { p, .. } => {
                // Cover coordinates: differences are small, no wrap needed.
                let g = |s: f64, t: f64| p + Vector2::new(s.cos(), s.sin()) * t;
                let ds = (g(s + h, t) - g(s - h, t)) / (2.0 * h);
                let dt = (g(s, t + h) - g(s, t - h)) / (2.0 * h);
                ds.perp(&dt)
            }
            ConeMap::Sphere { n, e1, e2, r } => {
                let pos = |s: f64, t: f64| {
                    let d = e1 * s.cos() + e2 * s.sin();
                    let (snt, cst) = (t / r).sin_cos();
                    (n * cst + d * snt) * *r
                };
                let ds = (pos(s + h, t) - pos(s - h, t)) / (2.0 * h);
                let dt = (pos(s, t + h) - pos(s, t - h)) / (2.0 * h);
                let outward = pos(s, t).normalize();
                ds.cross(&dt).dot(&outward)
            }
        }
    }
}

/// All hits of the cone over `vertex` on the target, for `t` in `(0, tau)`.
///
/// Bracketing walks `rays` directions with a `t_grid` time grid, keeps local
/// minima of the miss distance inside a generous capture band, polishes each
/// seed with damped Gauss-Newton, then merges converged roots that agree
/// within `merge_tol`. Distinct roots closer than ten merge widths are
/// reported as ambiguous rather than silently merged or double counted.
pub(crate) fn find_preimages<T: Target>(
    st: &StaticSpacetime,
    vertex: &SurfacePoint,
    tau: f64,
    rays: usize,
    target: &T,
) -> Result<Vec<Root>> {
    if !(tau > 0.0) {
        return Err(Error::InvalidInput(format!(
            "root search needs a positive time separation, got {tau}"
        )));
    }
    let cone = ConeMap::new(st, vertex)?;
    let k_grid = st.policy.t_grid.max(16);
    let dt = tau / k_grid as f64;

    let mut grid: Vec<SurfacePoint> = Vec::with_capacity(k_grid + 1);
    for k in 0..=k_grid {
        grid.push(target.position(dt * k as f64)?);
    }

    let seeds: Vec<(f64, f64)> = match &cone {
        ConeMap::Flat { p, periods } => {
            let cs: Vec<Vector2<f64>> = grid
                .iter()
                .map(|q| q.flat_coords())
                .collect::<Result<_>>()?;
            (0..rays)
                .into_par_iter()
                .map(|i| {
                    let s = std::f64::consts::TAU * i as f64 / rays as f64;
                    let u = Vector2::new(s.cos(), s.sin());
                    let rho: Vec<f64> = cs
                        .iter()
                        .enumerate()
                        .map(|(k, c)| {
                            let mut w = p + u * (dt * k as f64) - c;
                            if let Some(per) = periods {
                                w.x = wrap_half(w.x, per[0]);
                                w.y = wrap_half(w.y, per[1]);
                            }
                            w.norm_squared()
                        })
                        .collect();
                    collect_seeds(&rho, s, dt, rays)
                })
                .flatten()
                .collect()
        }
        ConeMap::Sphere { n, e1, e2, r } => {
            let dirs: Vec<Vector3<f64>> = grid
                .iter()
                .map(|q| q.unit_dir())
                .collect::<Result<_>>()?;
            let axial: Vec<f64> = dirs.iter().map(|c| n.dot(c)).collect();
            let trig: Vec<(f64, f64)> = (0..=k_grid)
                .map(|k| (dt * k as f64 / r).sin_cos())
                .collect();
            (0..rays)
                .into_par_iter()
                .map(|i| {
                    let s = std::f64::consts::TAU * i as f64 / rays as f64;
                    let d = e1 * s.cos() + e2 * s.sin();
                    let rho: Vec<f64> = (0..=k_grid)
                        .map(|k| {
                            let (snt, cst) = trig[k];
                            // Chordal miss distance squared.
                            (2.0 * r * r * (1.0 - cst * axial[k] - snt * d.dot(&dirs[k])))
                                .max(0.0)
                        })
                        .collect();
                    collect_seeds(&rho, s, dt, rays)
                })
                .flatten()
                .collect()
        }
    };

    let polished: Vec<Option<Root>> = seeds
        .par_iter()
        .map(|&(s, t)| polish(st, &cone, target, tau, s, t))
        .collect::<Result<Vec<_>>>()?;
    merge_roots(st, polished.into_iter().flatten().collect())
}

/// Local minima of the per-ray miss profile that lie inside the capture
/// band. The band combines the angular spread of neighboring rays with the
/// grid spacing, so no root can hide between two bracketing samples. Roots
/// between a boundary and the first interior sample have no bracketing
/// minimum, so the edge samples are seeded whenever the profile climbs away
/// from their end.
fn collect_seeds(rho: &[f64], s: f64, dt: f64, rays: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let last = rho.len() - 1;
    for k in 1..last {
        let interior_min = rho[k] <= rho[k - 1] && rho[k] <= rho[k + 1];
        let low_edge = k == 1 && rho[1] <= rho[2];
        let high_edge = k == last - 1 && rho[k] <= rho[k - 1];
        if interior_min || low_edge || high_edge {
            let t = dt * k as f64;
            let capture = 4.0 * std::f64::consts::PI * t / rays as f64 + 2.0 * dt;
            if rho[k] < capture * capture {
                out.push((s, t));
            }
        }
    }
    out
}

/// Normal equations of the hit residual at `(s, t)`: returns
/// `(J^T J, J^T r, |r|)` for the damped Gauss-Newton step.
fn normal_system<T: Target>(
    cone: &ConeMap,
    target: &T,
    s: f64,
    t: f64,
) -> Result<(Matrix2<f64>, Vector2<f64>, f64)> {
    match cone {
        ConeMap::Flat { p, periods } => {
            let c = target.position(t)?.flat_coords()?;
            let cdot = target.velocity(t)?.flat_components()?;
            let (sn, cs) = s.sin_cos();
            let u = Vector2::new(cs, sn);
            let du = Vector2::new(-sn, cs);
            let mut w = p + u * t - c;
            if let Some(per) = periods {
                w.x = wrap_half(w.x, per[0]);
                w.y = wrap_half(w.y, per[1]);
            }
            let j = Matrix2::from_columns(&[du * t, u - cdot]);
            Ok((j.transpose() * j, j.transpose() * w, w.norm()))
        }
        ConeMap::Sphere { n, e1, e2, r } => {
            let cq = target.position(t)?;
            let cdot = target.velocity(t)?.sphere_components()?;
            let cdir = cq.unit_dir()?;
            let (sns, css) = s.sin_cos();
            let (snt, cst) = (t / r).sin_cos();
            let d = e1 * css + e2 * sns;
            let dp = -e1 * sns + e2 * css;
            let res = (n * cst + d * snt - cdir) * *r;
            let js = dp * (*r * snt);
            let jt = -n * snt + d * cst - cdot;
            let a = Matrix2::new(js.dot(&js), js.dot(&jt), js.dot(&jt), jt.dot(&jt));
            let g = Vector2::new(js.dot(&res), jt.dot(&res));
            Ok((a, g, res.norm()))
        }
    }
}

fn polish<T: Target>(
    st: &StaticSpacetime,
    cone: &ConeMap,
    target: &T,
    tau: f64,
    s0: f64,
    t0: f64,
) -> Result<Option<Root>> {
    let pol = &st.policy;
    let t_lo = tau * 1e-12;
    let t_hi = tau * (1.0 - 1e-12);
    let mut s = s0;
    let mut t = t0.clamp(t_lo, t_hi);
    let mut converged = false;
    for _ in 0..60 {
        let (mut a, g, _) = normal_system(cone, target, s, t)?;
        let damp = 1e-14 * (a[(0, 0)] + a[(1, 1)]).max(1e-30);
        a[(0, 0)] += damp;
        a[(1, 1)] += damp;
        let Some(inv) = a.try_inverse() else {
            return Ok(None);
        };
        let step = -(inv * g);
        s += step.x;
        t = (t + step.y).clamp(t_lo, t_hi);
        if step.norm() < pol.root_tol {
            converged = true;
            break;
        }
    }
    if !converged {
        return Ok(None);
    }
    let (_, _, residual) = normal_system(cone, target, s, t)?;
    let t_excl = 0.5 * pol.null_tolerance(tau);
    if residual > 1e-8 * (1.0 + tau) || t <= t_excl || t >= tau - t_excl {
        return Ok(None);
    }
    let s = s.rem_euclid(std::f64::consts::TAU);
    Ok(Some(Root {
        s,
        t,
        point: cone.position(st, s, t)?,
        residual,
    }))
}

fn root_distance(a: &Root, b: &Root) -> f64 {
    let ds = {
        let d = (a.s - b.s).rem_euclid(std::f64::consts::TAU);
        d.min(std::f64::consts::TAU - d)
    };
    ds.hypot(a.t - b.t)
}

/// Single-link merge of converged roots, keeping the best-residual member of
/// each cluster. Distinct survivors inside ten merge widths of each other
/// mean bracketing cannot tell them apart, which is an error, not a count.
fn merge_roots(st: &StaticSpacetime, mut raw: Vec<Root>) -> Result<Vec<Root>> {
    let tol = st.policy.merge_tol;
    if raw.is_empty() {
        return Ok(raw);
    }
    raw.sort_by(|a, b| (a.t, a.s).partial_cmp(&(b.t, b.s)).unwrap());
    let n = raw.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            // Sorted by t, so the inner scan stops early.
            if raw[j].t - raw[i].t > tol {
                break;
            }
            if root_distance(&raw[i], &raw[j]) < tol {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                parent[ri] = rj;
            }
        }
    }
    let mut best: Vec<Option<Root>> = vec![None; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if best[r].is_none_or(|b| raw[i].residual < b.residual) {
            best[r] = Some(raw[i]);
        }
    }
    let mut reps: Vec<Root> = best.into_iter().flatten().collect();
    for i in 0..reps.len() {
        for j in i + 1..reps.len() {
            let d = root_distance(&reps[i], &reps[j]);
            if d < 10.0 * tol {
                return Err(Error::AmbiguousPreimage(format!(
                    "two polished roots at (s = {:.9}, t = {:.9}) and (s = {:.9}, t = {:.9}) \
                     are separated by {d:.3e}, inside the ambiguity band",
                    reps[i].s, reps[i].t, reps[j].s, reps[j].t
                )));
            }
        }
    }
    reps.sort_by(|a, b| (a.s, a.t).partial_cmp(&(b.s, b.t)).unwrap());
    Ok(reps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spacetime::StaticSpacetime;
    use crate::surface::SurfaceModel;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn plane_fixed_target_has_one_root_at_the_distance() {
        let st = StaticSpacetime::new(SurfaceModel::FlatPlane);
        let p = SurfacePoint::flat(0.0, 0.0);
        let roots =
            find_preimages(&st, &p, 1.0, 64, &FixedTarget(SurfacePoint::flat(0.3, 0.0)))
                .unwrap();
        assert_eq!(roots.len(), 1);
        assert_relative_eq!(roots[0].t, 0.3, epsilon = 1e-9);
        assert_relative_eq!(roots[0].s, 0.0, epsilon = 1e-9);
        let c = roots[0].point.flat_coords().unwrap();
        assert_relative_eq!(c.x, 0.3, epsilon = 1e-9);
        assert!(roots[0].residual < 1e-10);
    }

    #[test]
    fn torus_root_count_matches_the_lattice_oracle() {
        let st = StaticSpacetime::new(SurfaceModel::flat_torus(1.0, 1.0).unwrap());
        let p = SurfacePoint::flat(0.0, 0.0);
        let v = SurfacePoint::flat(0.5, 0.0);
        let tau = 2.2;
        let roots = find_preimages(&st, &p, tau, 1024, &FixedTarget(v)).unwrap();
        // Plane-cover images of the target strictly inside the cone window.
        let mut expected = 0;
        for i in -4i32..=4 {
            for j in -4i32..=4 {
                let d = (0.5 + i as f64).hypot(j as f64);
                if d > 0.0 && d < tau {
                    expected += 1;
                }
            }
        }
        assert_eq!(expected, 16);
        assert_eq!(roots.len(), 16);
        // Every root lands on the target point on the torus.
        for r in &roots {
            let d = st.surface.riemannian_distance(&r.point, &v).unwrap();
            assert!(d < 1e-8, "root misses the target by {d}");
        }
    }

    #[test]
    fn sphere_roots_come_in_short_and_long_pairs() {
        let st = StaticSpacetime::new(SurfaceModel::round_sphere(1.0).unwrap());
        let p = st.surface.point_from_chart([0.0, 0.0]).unwrap();
        let v = st.surface.point_from_chart([0.0, 1.0]).unwrap();
        // Window of one full wrap: hits at t = 1 and t = 2pi - 1.
        let roots = find_preimages(&st, &p, 6.0, 256, &FixedTarget(v)).unwrap();
        assert_eq!(roots.len(), 2);
        let mut ts: Vec<f64> = roots.iter().map(|r| r.t).collect();
        ts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_relative_eq!(ts[0], 1.0, epsilon = 1e-8);
        assert_relative_eq!(ts[1], std::f64::consts::TAU - 1.0, epsilon = 1e-8);
    }

    #[test]
    fn jacobian_determinant_finite_differences_match_closed_forms() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for model in [
            SurfaceModel::FlatPlane,
            SurfaceModel::flat_torus(1.0, 1.0).unwrap(),
            SurfaceModel::round_sphere(1.4).unwrap(),
        ] {
            let st = StaticSpacetime::new(model.clone());
            let p = crate::testutil::random_point(&model, &mut rng);
            let cone = ConeMap::new(&st, &p).unwrap();
            for _ in 0..50 {
                let s = rng.random_range(0.0..std::f64::consts::TAU);
                let t = rng.random_range(0.05..3.0);
                let fd = cone.fd_jacobian_det(s, t, 1e-4);
                let exact = cone.analytic_jacobian_det(t);
                assert!(
                    (fd - exact).abs() < 1e-6 * (1.0 + exact.abs()),
                    "fd {fd} vs exact {exact} at t = {t}"
                );
            }
        }
    }

    #[test]
    fn near_coincident_roots_are_merged_not_doubled() {
        // Two seeds from adjacent rays converge to the same root; the merge
        // must return it once.
        let st = StaticSpacetime::new(SurfaceModel::FlatPlane);
        let p = SurfacePoint::flat(-1.0, 0.2);
        let v = SurfacePoint::flat(1.3, 0.7);
        let roots = find_preimages(&st, &p, 4.0, 512, &FixedTarget(v)).unwrap();
        assert_eq!(roots.len(), 1);
    }
}
