//! Ground-truth causal relations for static products.
//!
//! For g = gbar (+) -dt^2 the causal structure is explicit: y is in the
//! chronological future of x iff d(p, q) < t_y - t_x, and the two events lie
//! on a common null geodesic iff some surface geodesic from p to q has length
//! exactly |t_y - t_x|. These closed forms serve as the oracle against which
//! the linking-number computations are verified.

use super::{Event, StaticSpacetime};
use crate::error::{Error, Result};
use crate::surface::GeodesicConnection;

/// Temporal position of the second event relative to the first.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeOrder {
    Future,
    Past,
}

#[derive(Debug, Clone)]
pub enum CausalVerdict {
    Unrelated,
    /// Joined by a timelike curve. `identical` marks the degenerate x = y
    /// case, which is reported here rather than as an error.
    ChronologicallyRelated { direction: TimeOrder, identical: bool },
    /// The events lie on at least one common null geodesic; carries every
    /// geodesic connection whose length matches |dt| within tolerance.
    /// Takes precedence over the chronological verdict when both hold
    /// (possible on the torus and sphere through wrapping connections).
    NullRelated { connections: Vec<GeodesicConnection> },
}

impl CausalVerdict {
    pub fn is_related(&self) -> bool {
        !matches!(self, CausalVerdict::Unrelated)
    }

    pub fn is_null(&self) -> bool {
        matches!(self, CausalVerdict::NullRelated { .. })
    }

    pub fn is_chronological(&self) -> bool {
        matches!(self, CausalVerdict::ChronologicallyRelated { .. })
    }

    pub fn is_identical(&self) -> bool {
        matches!(
            self,
            CausalVerdict::ChronologicallyRelated {
                identical: true,
                ..
            }
        )
    }
}

impl StaticSpacetime {
    pub fn causal_relation(&self, x: &Event, y: &Event) -> Result<CausalVerdict> {
        let dt = y.time - x.time;
        let d = self.surface.riemannian_distance(&x.point, &y.point)?;
        if d < 1e-12 && dt.abs() < 1e-12 {
            return Ok(CausalVerdict::ChronologicallyRelated {
                direction: TimeOrder::Future,
                identical: true,
            });
        }
        let tol = self.policy.null_tolerance(dt);
        let conns =
            self.surface
                .geodesic_connections(&x.point, &y.point, dt.abs() + 2.0 * tol, &self.policy)?;
        let null_conns: Vec<GeodesicConnection> = conns
            .into_iter()
            .filter(|c| (c.length - dt.abs()).abs() < tol)
            .collect();
        if !null_conns.is_empty() {
            return Ok(CausalVerdict::NullRelated {
                connections: null_conns,
            });
        }
        if d < dt.abs() {
            return Ok(CausalVerdict::ChronologicallyRelated {
                direction: if dt > 0.0 {
                    TimeOrder::Future
                } else {
                    TimeOrder::Past
                },
                identical: false,
            });
        }
        Ok(CausalVerdict::Unrelated)
    }

    /// Lorentzian distance: supremum of proper time over causal curves from
    /// x to y; zero when y is not in the causal future of x. For these static
    /// products the supremum is sqrt(dt^2 - d^2), realized in the limit by
    /// straight chart segments.
    pub fn lorentz_distance(&self, x: &Event, y: &Event) -> Result<f64> {
        let dt = y.time - x.time;
        if dt < 0.0 {
            return Ok(0.0);
        }
        let d = self.surface.riemannian_distance(&x.point, &y.point)?;
        if d > dt {
            return Ok(0.0);
        }
        Ok((dt * dt - d * d).max(0.0).sqrt())
    }

    /// d(p1, p2) - |dt|: positive exactly when the pair is spacelike
    /// separated, zero on the boundary of the causal relation.
    fn separation(&self, a: &Event, b: &Event) -> Result<f64> {
        let d = self.surface.riemannian_distance(&a.point, &b.point)?;
        Ok(d - (b.time - a.time).abs())
    }

    fn event_on_path(&self, path: &[Event], tau: f64) -> Result<Event> {
        let n = path.len();
        let x = tau.clamp(0.0, 1.0) * (n - 1) as f64;
        let i = (x.floor() as usize).min(n - 2);
        let u = x - i as f64;
        let point = self
            .surface
            .interpolate(&path[i].point, &path[i + 1].point, u)?;
        let time = path[i].time + u * (path[i + 1].time - path[i].time);
        Ok(Event::new(point, time))
    }

    /// First parameter at which the two interpolated paths become null
    /// related: either a grid sample is already on a common null geodesic, or
    /// the separation changes sign inside a grid interval (located by
    /// bisection). Returns `None` if the pair stays spacelike separated.
    pub fn null_moment_detector(&self, path1: &[Event], path2: &[Event]) -> Result<Option<f64>> {
        self.validate_paths(path1, path2)?;
        let n = path1.len();
        let tau_of = |i: usize| i as f64 / (n - 1) as f64;
        let sep_at = |tau: f64| -> Result<f64> {
            let a = self.event_on_path(path1, tau)?;
            let b = self.event_on_path(path2, tau)?;
            self.separation(&a, &b)
        };
        for i in 0..n {
            if self.causal_relation(&path1[i], &path2[i])?.is_null() {
                return Ok(Some(tau_of(i)));
            }
            if i + 1 < n {
                let f0 = sep_at(tau_of(i))?;
                let f1 = sep_at(tau_of(i + 1))?;
                if f0 > 0.0 && f1 <= 0.0 {
                    return Ok(Some(self.bisect_boundary(
                        path1,
                        path2,
                        tau_of(i),
                        tau_of(i + 1),
                    )?));
                }
            }
        }
        Ok(None)
    }

    /// Every boundary crossing of the causal relation along the paths, in
    /// increasing parameter order: each grid sample that is null related and
    /// each sign change of the separation in either direction.
    pub fn null_moments_exhaustive(&self, path1: &[Event], path2: &[Event]) -> Result<Vec<f64>> {
        self.validate_paths(path1, path2)?;
        let n = path1.len();
        let tau_of = |i: usize| i as f64 / (n - 1) as f64;
        let mut out = Vec::new();
        for i in 0..n {
            if self.causal_relation(&path1[i], &path2[i])?.is_null() {
                out.push(tau_of(i));
            }
            if i + 1 < n {
                let a = self.event_on_path(path1, tau_of(i))?;
                let b = self.event_on_path(path2, tau_of(i))?;
                let f0 = self.separation(&a, &b)?;
                let a1 = self.event_on_path(path1, tau_of(i + 1))?;
                let b1 = self.event_on_path(path2, tau_of(i + 1))?;
                let f1 = self.separation(&a1, &b1)?;
                if (f0 > 0.0) != (f1 > 0.0) {
                    let (lo, hi) = if f0 > 0.0 {
                        (tau_of(i), tau_of(i + 1))
                    } else {
                        (tau_of(i + 1), tau_of(i))
                    };
                    out.push(self.bisect_boundary(path1, path2, lo, hi)?);
                }
            }
        }
        out.sort_by(|a, b| a.partial_cmp(b).unwrap());
        out.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
        Ok(out)
    }

    fn validate_paths(&self, path1: &[Event], path2: &[Event]) -> Result<()> {
        if path1.len() < 2 || path2.len() < 2 {
            return Err(Error::TooFewSamples {
                need: 2,
                got: path1.len().min(path2.len()),
            });
        }
        if path1.len() != path2.len() {
            return Err(Error::InvalidInput(format!(
                "paths must share the parameter grid: {} vs {} samples",
                path1.len(),
                path2.len()
            )));
        }
        Ok(())
    }

    /// Bisection on the separation; `pos` has separation > 0, `neg` has <= 0.
    fn bisect_boundary(
        &self,
        path1: &[Event],
        path2: &[Event],
        mut pos: f64,
        mut neg: f64,
    ) -> Result<f64> {
        for _ in 0..100 {
            if (pos - neg).abs() < 1e-12 {
                break;
            }
            let mid = 0.5 * (pos + neg);
            let a = self.event_on_path(path1, mid)?;
            let b = self.event_on_path(path2, mid)?;
            if self.separation(&a, &b)? > 0.0 {
                pos = mid;
            } else {
                neg = mid;
            }
        }
        Ok(neg)
    }
}
