//! Timelike sectional curvature of the product metric.
//!
//! The curvature tensor is assembled from central finite differences of the
//! spacetime Christoffel symbols in chart coordinates (x1, x2, t). For the
//! product metric the Christoffels are the surface ones on the spatial block
//! and zero whenever a temporal index is involved, so only spatial
//! derivatives contribute.

use nalgebra::{Matrix3, Vector2, Vector3};

use super::{Event, StaticSpacetime};
use crate::error::{Error, Result};

/// Tangent vector of the product spacetime in chart components: two spatial
/// slots in the surface chart, one temporal.
#[derive(Debug, Clone, Copy)]
pub struct SpacetimeVector {
    pub spatial: Vector2<f64>,
    pub temporal: f64,
}

impl SpacetimeVector {
    pub fn new(s1: f64, s2: f64, temporal: f64) -> Self {
        SpacetimeVector {
            spatial: Vector2::new(s1, s2),
            temporal,
        }
    }

    fn components(&self) -> Vector3<f64> {
        Vector3::new(self.spatial.x, self.spatial.y, self.temporal)
    }
}

/// A tangent 2-plane at an event. The span must be linearly independent and
/// the restricted metric nondegenerate and not positive definite (checked by
/// the curvature operation, not at construction).
#[derive(Debug, Clone)]
pub struct TimelikePlane {
    pub base: Event,
    pub span: [SpacetimeVector; 2],
}

impl TimelikePlane {
    pub fn new(base: Event, v: SpacetimeVector, w: SpacetimeVector) -> Self {
        TimelikePlane { base, span: [v, w] }
    }
}

type Christoffel3 = [[[f64; 3]; 3]; 3];

impl StaticSpacetime {
    /// Spacetime metric in chart coordinates at spatial chart point `c`.
    fn metric3(&self, c: [f64; 2]) -> Result<Matrix3<f64>> {
        let g = self.surface.metric_at(&self.surface.point_from_chart(c)?)?;
        let mut out = Matrix3::zeros();
        for i in 0..2 {
            for j in 0..2 {
                out[(i, j)] = g[(i, j)];
            }
        }
        out[(2, 2)] = -1.0;
        Ok(out)
    }

    /// Christoffels of the product metric: surface symbols on the spatial
    /// block, zero on anything temporal.
    fn christoffel3(&self, c: [f64; 2]) -> Result<Christoffel3> {
        let gamma = self
            .surface
            .christoffel_at(&self.surface.point_from_chart(c)?)?;
        let mut out = [[[0.0; 3]; 3]; 3];
        for k in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    out[k][i][j] = gamma[k][i][j];
                }
            }
        }
        Ok(out)
    }

    /// Sectional curvature K(E) = g(R(w,v)v, w) / (g(v,v)g(w,w) - g(v,w)^2)
    /// for a timelike plane E = span(v, w).
    pub fn timelike_sectional_curvature(&self, plane: &TimelikePlane) -> Result<f64> {
        let c = self.surface.chart_of(&plane.base.point)?;
        let g = self.metric3(c)?;
        let v = plane.span[0].components();
        let w = plane.span[1].components();
        let gvv = (g * v).dot(&v);
        let gww = (g * w).dot(&w);
        let gvw = (g * v).dot(&w);
        let den = gvv * gww - gvw * gvw;
        let scale = v.norm_squared() * w.norm_squared();
        if den.abs() < 1e-10 * scale.max(1e-300) {
            return Err(Error::NullPlane(format!(
                "restricted metric degenerate (Gram determinant {den:.3e})"
            )));
        }
        if den > 0.0 {
            return Err(Error::InvalidInput(
                "plane is spacelike: restricted metric is positive definite".into(),
            ));
        }

        // dGamma[mu][k][i][j] = d_mu Gamma^k_ij; temporal derivatives vanish.
        let h = self.policy.fd_step;
        let mut dgamma = [[[[0.0; 3]; 3]; 3]; 3];
        for mu in 0..2 {
            let mut cp = c;
            let mut cm = c;
            cp[mu] += h;
            cm[mu] -= h;
            let gp = self.christoffel3(cp)?;
            let gm = self.christoffel3(cm)?;
            for k in 0..3 {
                for i in 0..3 {
                    for j in 0..3 {
                        dgamma[mu][k][i][j] = (gp[k][i][j] - gm[k][i][j]) / (2.0 * h);
                    }
                }
            }
        }
        let gamma = self.christoffel3(c)?;

        // R^r_{s mu nu} = d_mu G^r_{nu s} - d_nu G^r_{mu s}
        //              + G^r_{mu l} G^l_{nu s} - G^r_{nu l} G^l_{mu s}
        let riem_up = |r: usize, s: usize, mu: usize, nu: usize| -> f64 {
            let mut val = dgamma[mu][r][nu][s] - dgamma[nu][r][mu][s];
            for l in 0..3 {
                val += gamma[r][mu][l] * gamma[l][nu][s] - gamma[r][nu][l] * gamma[l][mu][s];
            }
            val
        };

        // g(R(w,v)v, w) with (R(X,Y)Z)^r = R^r_{s mu nu} Z^s X^mu Y^nu.
        let mut num = 0.0;
        for r in 0..3 {
            let mut comp = 0.0;
            for s in 0..3 {
                for mu in 0..3 {
                    for nu in 0..3 {
                        comp += riem_up(r, s, mu, nu) * v[s] * w[mu] * v[nu];
                    }
                }
            }
            for a in 0..3 {
                num += g[(a, r)] * comp * w[a];
            }
        }
        Ok(num / den)
    }
}
