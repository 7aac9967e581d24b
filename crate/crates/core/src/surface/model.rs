//! The three Cauchy-surface models and their pointwise Riemannian data.
//!
//! Chart conventions:
//! - `FlatPlane`: global Cartesian chart, metric `dx^2 + dy^2`.
//! - `FlatTorus`: Cartesian chart reduced mod the periods, same flat metric.
//! - `RoundSphere(r)`: points live as embedded unit directions; the
//!   latitude/longitude chart `(lat, long)` with metric
//!   `r^2 dlat^2 + r^2 cos^2(lat) dlong^2` is used for metric evaluation and
//!   for I/O. Orientation is the outward normal, which on the embedded
//!   representation means frames `(e1, e2)` with `e1 x e2 = n`.

use nalgebra::{Matrix2, Vector3};

use super::point::{SurfacePoint, TangentRep, TangentVector};
use crate::error::{Error, Result};

/// Christoffel symbols `G[k][i][j]` of the chart at a point.
pub type Christoffel = [[[f64; 2]; 2]; 2];

#[derive(Clone, Debug, PartialEq)]
pub enum SurfaceModel {
    FlatPlane,
    FlatTorus { periods: [f64; 2] },
    RoundSphere { radius: f64 },
}

impl SurfaceModel {
    pub fn flat_torus(p1: f64, p2: f64) -> Result<Self> {
        if !(p1 > 0.0 && p2 > 0.0) {
            return Err(Error::InvalidInput("torus periods must be positive".into()));
        }
        Ok(SurfaceModel::FlatTorus { periods: [p1, p2] })
    }

    pub fn round_sphere(radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::InvalidInput("sphere radius must be positive".into()));
        }
        Ok(SurfaceModel::RoundSphere { radius })
    }

    pub fn min_period(&self) -> Option<f64> {
        match self {
            SurfaceModel::FlatTorus { periods } => Some(periods[0].min(periods[1])),
            _ => None,
        }
    }

    /// Validates a point and brings it to canonical form: torus coordinates
    /// reduced to `[0, period)`, sphere directions normalized to unit length.
    pub fn canonical_point(&self, p: &SurfacePoint) -> Result<SurfacePoint> {
        match (self, p) {
            (SurfaceModel::FlatPlane, SurfacePoint::Flat(c)) => {
                if !c.x.is_finite() || !c.y.is_finite() {
                    return Err(Error::InvalidPoint("non-finite coordinates".into()));
                }
                Ok(*p)
            }
            (SurfaceModel::FlatTorus { periods }, SurfacePoint::Flat(c)) => {
                if !c.x.is_finite() || !c.y.is_finite() {
                    return Err(Error::InvalidPoint("non-finite coordinates".into()));
                }
                Ok(SurfacePoint::flat(
                    c.x.rem_euclid(periods[0]),
                    c.y.rem_euclid(periods[1]),
                ))
            }
            (SurfaceModel::RoundSphere { .. }, SurfacePoint::Sphere(n)) => {
                let len = n.norm();
                if !(len.is_finite() && (len - 1.0).abs() < 1e-6) {
                    return Err(Error::InvalidPoint(format!(
                        "sphere direction norm {len} is not 1"
                    )));
                }
                Ok(SurfacePoint::Sphere(n / len))
            }
            _ => Err(Error::RepresentationMismatch),
        }
    }

    /// Chart coordinates of a point: `(x, y)` on flat models,
    /// `(lat, long)` on the sphere.
    pub fn chart_of(&self, p: &SurfacePoint) -> Result<[f64; 2]> {
        match (self, p) {
            (SurfaceModel::FlatPlane, SurfacePoint::Flat(c))
            | (SurfaceModel::FlatTorus { .. }, SurfacePoint::Flat(c)) => Ok([c.x, c.y]),
            (SurfaceModel::RoundSphere { .. }, SurfacePoint::Sphere(n)) => {
                Ok([n.z.clamp(-1.0, 1.0).asin(), n.y.atan2(n.x)])
            }
            _ => Err(Error::RepresentationMismatch),
        }
    }

    pub fn point_from_chart(&self, c: [f64; 2]) -> Result<SurfacePoint> {
        match self {
            SurfaceModel::FlatPlane | SurfaceModel::FlatTorus { .. } => {
                self.canonical_point(&SurfacePoint::flat(c[0], c[1]))
            }
            SurfaceModel::RoundSphere { .. } => {
                let (lat, long) = (c[0], c[1]);
                SurfacePoint::sphere(Vector3::new(
                    lat.cos() * long.cos(),
                    lat.cos() * long.sin(),
                    lat.sin(),
                ))
            }
        }
    }

    /// Chart metric at a point.
    pub fn metric_at(&self, p: &SurfacePoint) -> Result<Matrix2<f64>> {
        let p = self.canonical_point(p)?;
        match self {
            SurfaceModel::FlatPlane | SurfaceModel::FlatTorus { .. } => {
                Ok(Matrix2::identity())
            }
            SurfaceModel::RoundSphere { radius } => {
                let [lat, _] = self.chart_of(&p)?;
                let r2 = radius * radius;
                Ok(Matrix2::new(r2, 0.0, 0.0, r2 * lat.cos() * lat.cos()))
            }
        }
    }

    /// Closed-form Christoffel symbols of the chart.
    ///
    /// Flat charts vanish identically. For the sphere in `(lat, long)`:
    /// `G^lat_{long long} = sin(lat) cos(lat)`,
    /// `G^long_{lat long} = G^long_{long lat} = -tan(lat)`.
    pub fn christoffel_at(&self, p: &SurfacePoint) -> Result<Christoffel> {
        let p = self.canonical_point(p)?;
        let mut g = [[[0.0; 2]; 2]; 2];
        if let SurfaceModel::RoundSphere { .. } = self {
            let [lat, _] = self.chart_of(&p)?;
            if lat.cos().abs() < 1e-9 {
                return Err(Error::ChartSingular("pole of the lat/long chart".into()));
            }
            g[0][1][1] = lat.sin() * lat.cos();
            g[1][0][1] = -lat.tan();
            g[1][1][0] = -lat.tan();
        }
        Ok(g)
    }

    /// Finite-difference Christoffels from `metric_at` alone. Kept as an
    /// independent evaluation path for testing the closed forms.
    pub fn christoffel_fd(&self, p: &SurfacePoint, h: f64) -> Result<Christoffel> {
        let c = self.chart_of(&self.canonical_point(p)?)?;
        let g_at = |c: [f64; 2]| -> Result<Matrix2<f64>> {
            self.metric_at(&self.point_from_chart(c)?)
        };
        // dg[l][i][j] = d g_ij / d x_l
        let mut dg = [[[0.0; 2]; 2]; 2];
        for l in 0..2 {
            let mut cp = c;
            let mut cm = c;
            cp[l] += h;
            cm[l] -= h;
            let gp = g_at(cp)?;
            let gm = g_at(cm)?;
            for i in 0..2 {
                for j in 0..2 {
                    dg[l][i][j] = (gp[(i, j)] - gm[(i, j)]) / (2.0 * h);
                }
            }
        }
        let g = g_at(c)?;
        let ginv = g
            .try_inverse()
            .ok_or_else(|| Error::ChartSingular("metric not invertible".into()))?;
        let mut gamma = [[[0.0; 2]; 2]; 2];
        for k in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    let mut s = 0.0;
                    for l in 0..2 {
                        s += ginv[(k, l)] * (dg[i][j][l] + dg[j][i][l] - dg[l][i][j]);
                    }
                    gamma[k][i][j] = 0.5 * s;
                }
            }
        }
        Ok(gamma)
    }

    /// Positively oriented orthonormal frame at a point. On the sphere the
    /// frame satisfies `e1 x e2 = n` (outward orientation) and is chosen
    /// deterministically from the coordinate axes.
    pub fn orthonormal_frame(&self, p: &SurfacePoint) -> Result<[TangentVector; 2]> {
        let p = self.canonical_point(p)?;
        match self {
            SurfaceModel::FlatPlane | SurfaceModel::FlatTorus { .. } => Ok([
                TangentVector::flat(p, 1.0, 0.0),
                TangentVector::flat(p, 0.0, 1.0),
            ]),
            SurfaceModel::RoundSphere { .. } => {
                let n = p.unit_dir()?;
                let axis = if n.z.abs() < 0.9 {
                    Vector3::z()
                } else {
                    Vector3::x()
                };
                let e1 = axis.cross(&n).normalize();
                let e2 = n.cross(&e1);
                Ok([TangentVector::sphere(p, e1), TangentVector::sphere(p, e2)])
            }
        }
    }

    /// Unit tangent `cos(s) e1 + sin(s) e2` in the frame above.
    pub fn ray_direction(&self, p: &SurfacePoint, s: f64) -> Result<TangentVector> {
        let [e1, e2] = self.orthonormal_frame(p)?;
        let (c, sn) = (s.cos(), s.sin());
        Ok(match (e1.rep, e2.rep) {
            (TangentRep::Flat(a), TangentRep::Flat(b)) => TangentVector {
                base: e1.base,
                rep: TangentRep::Flat(a * c + b * sn),
            },
            (TangentRep::Sphere(a), TangentRep::Sphere(b)) => TangentVector {
                base: e1.base,
                rep: TangentRep::Sphere(a * c + b * sn),
            },
            _ => unreachable!("frame representations always match"),
        })
    }

    /// Riemannian inner product of two tangent vectors at the same point.
    pub fn inner(&self, a: &TangentVector, b: &TangentVector) -> Result<f64> {
        match (self, &a.rep, &b.rep) {
            (
                SurfaceModel::FlatPlane | SurfaceModel::FlatTorus { .. },
                TangentRep::Flat(u),
                TangentRep::Flat(v),
            ) => Ok(u.dot(v)),
            (SurfaceModel::RoundSphere { .. }, TangentRep::Sphere(u), TangentRep::Sphere(v)) => {
                Ok(u.dot(v))
            }
            _ => Err(Error::RepresentationMismatch),
        }
    }

    pub fn norm(&self, a: &TangentVector) -> Result<f64> {
        Ok(self.inner(a, a)?.sqrt())
    }

    /// Chart components of a tangent vector, in the same chart as `chart_of`.
    pub fn tangent_to_chart(&self, v: &TangentVector) -> Result<[f64; 2]> {
        match (self, &v.rep) {
            (
                SurfaceModel::FlatPlane | SurfaceModel::FlatTorus { .. },
                TangentRep::Flat(u),
            ) => Ok([u.x, u.y]),
            (SurfaceModel::RoundSphere { radius }, TangentRep::Sphere(u)) => {
                let [lat, long] = self.chart_of(&v.base)?;
                if lat.cos().abs() < 1e-9 {
                    return Err(Error::ChartSingular("pole of the lat/long chart".into()));
                }
                // Coordinate basis embedded as position velocities.
                let dlat = Vector3::new(
                    -lat.sin() * long.cos(),
                    -lat.sin() * long.sin(),
                    lat.cos(),
                ) * *radius;
                let dlong = Vector3::new(-lat.cos() * long.sin(), lat.cos() * long.cos(), 0.0)
                    * *radius;
                Ok([
                    u.dot(&dlat) / dlat.norm_squared(),
                    u.dot(&dlong) / dlong.norm_squared(),
                ])
            }
            _ => Err(Error::RepresentationMismatch),
        }
    }

    /// Tangent vector from chart components at a point.
    pub fn tangent_from_chart(&self, p: &SurfacePoint, c: [f64; 2]) -> Result<TangentVector> {
        let p = self.canonical_point(p)?;
        match self {
            SurfaceModel::FlatPlane | SurfaceModel::FlatTorus { .. } => {
                Ok(TangentVector::flat(p, c[0], c[1]))
            }
            SurfaceModel::RoundSphere { radius } => {
                let [lat, long] = self.chart_of(&p)?;
                let dlat = Vector3::new(
                    -lat.sin() * long.cos(),
                    -lat.sin() * long.sin(),
                    lat.cos(),
                ) * *radius;
                let dlong = Vector3::new(-lat.cos() * long.sin(), lat.cos() * long.cos(), 0.0)
                    * *radius;
                Ok(TangentVector::sphere(p, dlat * c[0] + dlong * c[1]))
            }
        }
    }

    /// Shortest-representative displacement from `from` to `to`, expressed as
    /// a tangent vector at `from`. On flat models this is the minimal-image
    /// chart difference; on the sphere, the chord projected onto the tangent
    /// plane at `from`.
    pub fn chord(&self, from: &SurfacePoint, to: &SurfacePoint) -> Result<TangentVector> {
        let from = self.canonical_point(from)?;
        let to = self.canonical_point(to)?;
        match self {
            SurfaceModel::FlatPlane => {
                let d = to.flat_coords()? - from.flat_coords()?;
                Ok(TangentVector::flat(from, d.x, d.y))
            }
            SurfaceModel::FlatTorus { periods } => {
                let d = to.flat_coords()? - from.flat_coords()?;
                let wrap = |x: f64, p: f64| {
                    let m = x.rem_euclid(p);
                    if m > p / 2.0 {
                        m - p
                    } else {
                        m
                    }
                };
                Ok(TangentVector::flat(
                    from,
                    wrap(d.x, periods[0]),
                    wrap(d.y, periods[1]),
                ))
            }
            SurfaceModel::RoundSphere { radius } => {
                let a = from.unit_dir()?;
                let b = to.unit_dir()?;
                let chord = (b - a) * *radius;
                let tangential = chord - a * chord.dot(&a);
                Ok(TangentVector::sphere(from, tangential))
            }
        }
    }

    /// Point `u` of the way from `a` to `b` along the shortest representative:
    /// straight chart segment on flat models (minimal image on the torus),
    /// spherical linear interpolation on the sphere. Used for sampled paths
    /// and curves, not for geodesic flow.
    pub fn interpolate(&self, a: &SurfacePoint, b: &SurfacePoint, u: f64) -> Result<SurfacePoint> {
        let a = self.canonical_point(a)?;
        match self {
            SurfaceModel::FlatPlane | SurfaceModel::FlatTorus { .. } => {
                let d = self.chord(&a, b)?.flat_components()?;
                let c = a.flat_coords()? + d * u;
                self.canonical_point(&SurfacePoint::flat(c.x, c.y))
            }
            SurfaceModel::RoundSphere { .. } => {
                let va = a.unit_dir()?;
                let vb = self.canonical_point(b)?.unit_dir()?;
                let angle = va.cross(&vb).norm().atan2(va.dot(&vb));
                if angle < 1e-9 {
                    return SurfacePoint::sphere(va + (vb - va) * u);
                }
                if (std::f64::consts::PI - angle).abs() < 1e-9 {
                    return Err(Error::InvalidInput(
                        "cannot interpolate between antipodal samples".into(),
                    ));
                }
                let s = angle.sin();
                SurfacePoint::sphere(
                    va * (((1.0 - u) * angle).sin() / s) + vb * ((u * angle).sin() / s),
                )
            }
        }
    }

    /// Geodesic distance between two points.
    pub fn riemannian_distance(&self, p: &SurfacePoint, q: &SurfacePoint) -> Result<f64> {
        let p = self.canonical_point(p)?;
        let q = self.canonical_point(q)?;
        match self {
            SurfaceModel::FlatPlane => Ok((q.flat_coords()? - p.flat_coords()?).norm()),
            SurfaceModel::FlatTorus { periods } => {
                // Rectangular lattice: the axes minimize independently.
                let d = q.flat_coords()? - p.flat_coords()?;
                let per_axis = |x: f64, p: f64| {
                    let m = x.abs().rem_euclid(p);
                    m.min(p - m)
                };
                let dx = per_axis(d.x, periods[0]);
                let dy = per_axis(d.y, periods[1]);
                Ok(dx.hypot(dy))
            }
            SurfaceModel::RoundSphere { radius } => {
                let a = p.unit_dir()?;
                let b = q.unit_dir()?;
                Ok(radius * a.cross(&b).norm().atan2(a.dot(&b)))
            }
        }
    }

    /// Timelike sectional curvature certificate for the static product:
    /// true when the model guarantees nonnegative values everywhere.
    pub fn certified_nonnegative_timelike_curvature(&self) -> bool {
        match self {
            SurfaceModel::FlatPlane | SurfaceModel::FlatTorus { .. } => true,
            SurfaceModel::RoundSphere { .. } => false,
        }
    }
}
