use nalgebra::{Vector2, Vector3};

use crate::error::{Error, Result};

/// A point of the spatial slice, in the representation native to its model.
///
/// Flat models store chart coordinates directly; the round sphere stores the
/// unit direction in R^3 (the point itself is `radius * dir`). The embedded
/// form has no coordinate singularities, so latitude and longitude appear
/// only at I/O boundaries.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SurfacePoint {
    Flat(Vector2<f64>),
    Sphere(Vector3<f64>),
}

impl SurfacePoint {
    pub fn flat(x: f64, y: f64) -> Self {
        SurfacePoint::Flat(Vector2::new(x, y))
    }

    /// Builds a sphere point from any nonzero direction, normalizing it.
    pub fn sphere(dir: Vector3<f64>) -> Result<Self> {
        let n = dir.norm();
        if n < 1e-12 {
            return Err(Error::InvalidPoint("zero sphere direction".into()));
        }
        Ok(SurfacePoint::Sphere(dir / n))
    }

    pub fn flat_coords(&self) -> Result<Vector2<f64>> {
        match self {
            SurfacePoint::Flat(c) => Ok(*c),
            SurfacePoint::Sphere(_) => Err(Error::RepresentationMismatch),
        }
    }

    /// Unit direction of a sphere point.
    pub fn unit_dir(&self) -> Result<Vector3<f64>> {
        match self {
            SurfacePoint::Sphere(n) => Ok(*n),
            SurfacePoint::Flat(_) => Err(Error::RepresentationMismatch),
        }
    }
}

/// Tangent data in the same representation as its base point: chart
/// components on flat models, the embedded velocity in R^3 on the sphere
/// (always orthogonal to the base direction).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TangentRep {
    Flat(Vector2<f64>),
    Sphere(Vector3<f64>),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TangentVector {
    pub base: SurfacePoint,
    pub rep: TangentRep,
}

impl TangentVector {
    pub fn flat(base: SurfacePoint, dx: f64, dy: f64) -> Self {
        TangentVector {
            base,
            rep: TangentRep::Flat(Vector2::new(dx, dy)),
        }
    }

    pub fn sphere(base: SurfacePoint, v: Vector3<f64>) -> Self {
        TangentVector {
            base,
            rep: TangentRep::Sphere(v),
        }
    }

    pub fn flat_components(&self) -> Result<Vector2<f64>> {
        match &self.rep {
            TangentRep::Flat(v) => Ok(*v),
            TangentRep::Sphere(_) => Err(Error::RepresentationMismatch),
        }
    }

    pub fn sphere_components(&self) -> Result<Vector3<f64>> {
        match &self.rep {
            TangentRep::Sphere(v) => Ok(*v),
            TangentRep::Flat(_) => Err(Error::RepresentationMismatch),
        }
    }

    pub fn scaled(&self, k: f64) -> Self {
        let rep = match self.rep {
            TangentRep::Flat(v) => TangentRep::Flat(v * k),
            TangentRep::Sphere(v) => TangentRep::Sphere(v * k),
        };
        TangentVector {
            base: self.base,
            rep,
        }
    }

    /// Linear combination `ka * a + kb * b` of two tangent vectors in the
    /// same representation. The result keeps `a`'s base point; callers are
    /// responsible for only combining vectors that live in (numerically)
    /// the same fiber, as in finite-difference stencils.
    pub fn combine(a: &TangentVector, ka: f64, b: &TangentVector, kb: f64) -> Result<Self> {
        let rep = match (&a.rep, &b.rep) {
            (TangentRep::Flat(u), TangentRep::Flat(v)) => TangentRep::Flat(u * ka + v * kb),
            (TangentRep::Sphere(u), TangentRep::Sphere(v)) => TangentRep::Sphere(u * ka + v * kb),
            _ => return Err(Error::RepresentationMismatch),
        };
        Ok(TangentVector { base: a.base, rep })
    }
}
