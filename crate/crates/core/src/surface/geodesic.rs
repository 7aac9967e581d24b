//! Geodesic flow: closed forms per model, a Runge-Kutta fallback used for
//! cross-checks, and enumeration of geodesic connections up to a length cap.

use nalgebra::{Vector2, Vector3};

use super::model::SurfaceModel;
use super::point::{SurfacePoint, TangentRep, TangentVector};
use crate::error::{Error, Result};
use crate::numeric::NumericPolicy;

/// A geodesic from one point to another: initial unit tangent and length.
#[derive(Clone, Debug)]
pub struct GeodesicConnection {
    pub initial: TangentVector,
    pub length: f64,
}

fn check_unit(model: &SurfaceModel, v: &TangentVector) -> Result<f64> {
    let n = model.norm(v)?;
    if (n - 1.0).abs() > 1e-6 {
        return Err(Error::InvalidInput(format!(
            "geodesic initial velocity must be unit (norm {n})"
        )));
    }
    Ok(n)
}

impl SurfaceModel {
    /// Unit-speed geodesic flow in closed form. Returns the endpoint and the
    /// unit end velocity.
    pub fn integrate_geodesic(
        &self,
        v: &TangentVector,
        length: f64,
    ) -> Result<(SurfacePoint, TangentVector)> {
        let base = self.canonical_point(&v.base)?;
        let scale = check_unit(self, v)?;
        match (self, &v.rep) {
            (SurfaceModel::FlatPlane | SurfaceModel::FlatTorus { .. }, TangentRep::Flat(u)) => {
                let u = u / scale;
                let end = base.flat_coords()? + u * length;
                let end = self.canonical_point(&SurfacePoint::Flat(end))?;
                Ok((end, TangentVector::flat(end, u.x, u.y)))
            }
            (SurfaceModel::RoundSphere { radius }, TangentRep::Sphere(d)) => {
                let n = base.unit_dir()?;
                let d = d / scale;
                let sigma = length / radius;
                let end_dir = n * sigma.cos() + d * sigma.sin();
                let end_vel = d * sigma.cos() - n * sigma.sin();
                let end = SurfacePoint::sphere(end_dir)?;
                Ok((end, TangentVector::sphere(end, end_vel)))
            }
            _ => Err(Error::RepresentationMismatch),
        }
    }

    /// Classical fourth-order Runge-Kutta integration of the geodesic
    /// equation. Flat models integrate the straight-line system in the
    /// covering chart; the sphere integrates the embedded system
    /// `x'' = -(|x'|^2 / r^2) x`, which has no chart singularities.
    ///
    /// The returned velocity is the raw integrated value: its norm drift is
    /// the integration error and is asserted on by the verification suite.
    pub fn integrate_geodesic_rk4(
        &self,
        v: &TangentVector,
        length: f64,
        step: f64,
    ) -> Result<(SurfacePoint, TangentVector)> {
        if !(step > 0.0) {
            return Err(Error::InvalidInput("step must be positive".into()));
        }
        let base = self.canonical_point(&v.base)?;
        check_unit(self, v)?;
        match (self, &v.rep) {
            (SurfaceModel::FlatPlane | SurfaceModel::FlatTorus { .. }, TangentRep::Flat(u)) => {
                let mut pos = base.flat_coords()?;
                let vel = *u;
                let mut remaining = length;
                while remaining > 0.0 {
                    let h = step.min(remaining);
                    // Derivative of (pos, vel) is (vel, 0); RK4 collapses to Euler.
                    pos += vel * h;
                    remaining -= h;
                }
                let end = self.canonical_point(&SurfacePoint::Flat(pos))?;
                Ok((end, TangentVector::flat(end, vel.x, vel.y)))
            }
            (SurfaceModel::RoundSphere { radius }, TangentRep::Sphere(d)) => {
                let r2 = radius * radius;
                let mut x = base.unit_dir()? * *radius;
                let mut xdot = *d;
                let acc = |x: &Vector3<f64>, v: &Vector3<f64>| -> Vector3<f64> {
                    -x * (v.dot(v) / r2)
                };
                let mut remaining = length;
                while remaining > 1e-15 {
                    let h = step.min(remaining);
                    let k1x = xdot;
                    let k1v = acc(&x, &xdot);
                    let k2x = xdot + k1v * (h / 2.0);
                    let k2v = acc(&(x + k1x * (h / 2.0)), &(xdot + k1v * (h / 2.0)));
                    let k3x = xdot + k2v * (h / 2.0);
                    let k3v = acc(&(x + k2x * (h / 2.0)), &(xdot + k2v * (h / 2.0)));
                    let k4x = xdot + k3v * h;
                    let k4v = acc(&(x + k3x * h), &(xdot + k3v * h));
                    x += (k1x + k2x * 2.0 + k3x * 2.0 + k4x) * (h / 6.0);
                    xdot += (k1v + k2v * 2.0 + k3v * 2.0 + k4v) * (h / 6.0);
                    remaining -= h;
                }
                let end = SurfacePoint::sphere(x)?;
                Ok((end, TangentVector::sphere(end, xdot)))
            }
            _ => Err(Error::RepresentationMismatch),
        }
    }

    /// All geodesics from `p` to `q` of length at most `l_max`, sorted by
    /// length. Includes the trivial length-0 connection when `p = q`.
    ///
    /// On the torus there is one connection per lattice translate within
    /// range. On the sphere the family `d + 2 pi k r` / `(2 pi - d/r) r + ...`
    /// is enumerated; at conjugate configurations (coincident or antipodal
    /// endpoints) a whole circle of geodesics shares each length and a single
    /// representative per length is returned.
    pub fn geodesic_connections(
        &self,
        p: &SurfacePoint,
        q: &SurfacePoint,
        l_max: f64,
        policy: &NumericPolicy,
    ) -> Result<Vec<GeodesicConnection>> {
        if !(l_max >= 0.0) {
            return Err(Error::InvalidInput("l_max must be nonnegative".into()));
        }
        let p = self.canonical_point(p)?;
        let q = self.canonical_point(q)?;
        let mut out: Vec<GeodesicConnection> = Vec::new();
        match self {
            SurfaceModel::FlatPlane => {
                let d = q.flat_coords()? - p.flat_coords()?;
                let len = d.norm();
                if len == 0.0 {
                    out.push(GeodesicConnection {
                        initial: TangentVector::flat(p, 1.0, 0.0),
                        length: 0.0,
                    });
                } else if len <= l_max {
                    let u = d / len;
                    out.push(GeodesicConnection {
                        initial: TangentVector::flat(p, u.x, u.y),
                        length: len,
                    });
                }
            }
            SurfaceModel::FlatTorus { periods } => {
                let base = q.flat_coords()? - p.flat_coords()?;
                let min_period = periods[0].min(periods[1]);
                let range = (l_max / min_period).ceil() as i64 + policy.lattice_margin as i64;
                for i in -range..=range {
                    for j in -range..=range {
                        let delta = Vector2::new(
                            base.x + i as f64 * periods[0],
                            base.y + j as f64 * periods[1],
                        );
                        let len = delta.norm();
                        if len > l_max {
                            continue;
                        }
                        let initial = if len == 0.0 {
                            TangentVector::flat(p, 1.0, 0.0)
                        } else {
                            TangentVector::flat(p, delta.x / len, delta.y / len)
                        };
                        out.push(GeodesicConnection {
                            initial,
                            length: len,
                        });
                    }
                }
            }
            SurfaceModel::RoundSphere { radius } => {
                let a = p.unit_dir()?;
                let b = q.unit_dir()?;
                let alpha = a.cross(&b).norm().atan2(a.dot(&b));
                let circumference = 2.0 * std::f64::consts::PI * radius;
                let d = radius * alpha;
                let degenerate = alpha < 1e-9 || (std::f64::consts::PI - alpha) < 1e-9;
                let dir_to_q = if degenerate {
                    self.orthonormal_frame(&p)?[0]
                } else {
                    let t = (b - a * alpha.cos()) / alpha.sin();
                    TangentVector::sphere(p, t)
                };
                let mut lengths: Vec<(f64, bool)> = Vec::new();
                let mut k = 0.0;
                loop {
                    let l1 = d + k * circumference;
                    let l2 = circumference - d + k * circumference;
                    if l1 > l_max && l2 > l_max {
                        break;
                    }
                    if l1 <= l_max {
                        lengths.push((l1, true));
                    }
                    if l2 <= l_max {
                        lengths.push((l2, false));
                    }
                    k += 1.0;
                }
                lengths.sort_by(|x, y| x.0.total_cmp(&y.0));
                // Conjugate configurations list each length twice; keep one.
                lengths.dedup_by(|x, y| (x.0 - y.0).abs() < 1e-9);
                for (len, forward) in lengths {
                    let initial = if forward {
                        dir_to_q
                    } else {
                        dir_to_q.scaled(-1.0)
                    };
                    out.push(GeodesicConnection {
                        initial,
                        length: len,
                    });
                }
            }
        }
        out.sort_by(|x, y| {
            x.length.total_cmp(&y.length).then_with(|| {
                let ang = |t: &TangentVector| match t.rep {
                    TangentRep::Flat(v) => v.y.atan2(v.x),
                    TangentRep::Sphere(v) => v.z.atan2(v.x),
                };
                ang(&x.initial).total_cmp(&ang(&y.initial))
            })
        });
        Ok(out)
    }
}
