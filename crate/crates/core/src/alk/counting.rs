//! The counting engine: the linking value of two event skies as a signed
//! count of future null rays from the earlier event that pass through the
//! later one.
//!
//! Every hit of the cone map `G(s, t) = W_x^t(s)` on the later spatial point
//! carries the sign of the cone Jacobian there; the value is the number of
//! orientation-reversing hits minus the number of orientation-preserving
//! ones, reduced into the coefficient group of the surface.

use crate::alk::group::{AlkValue, CoefficientGroup};
use crate::alk::roots::{self, ConeMap, FixedTarget};
use crate::error::{Error, Result};
use crate::spacetime::{CausalVerdict, Event, StaticSpacetime};
use crate::surface::{SurfaceModel, SurfacePoint};

/// Reference orientation of the spatial slice. `Reversed` is a mutation
/// hook for tests: it flips the sign convention of the counting Jacobian,
/// and the reported value of any fixed pair must flip with it.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Orientation {
    #[default]
    Standard,
    Reversed,
}

/// How a ledger entry was evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CrossingMethod {
    /// Sign of the cone Jacobian at a preimage of the counting map.
    PreimageJacobian,
    /// Frame determinant at a transverse cone/curve crossing.
    FrameDeterminant,
    /// Dangerous-tangency sign along a separating front homotopy.
    TangencyFormula,
}

/// One signed contribution. Signs are normalized so that the ledger of any
/// engine sums to the unreduced linking value.
#[derive(Clone, Copy, Debug)]
pub struct SignedCrossing {
    /// Engine parameter of the contribution: the slice time for the
    /// counting and intersection engines, the homotopy displacement for the
    /// tangency engine.
    pub parameter: f64,
    /// Surface or chart point where the contribution sits.
    pub location: SurfacePoint,
    /// Contribution to the raw value, +1 or -1.
    pub sign: i8,
    pub method: CrossingMethod,
}

/// Outcome of one linking computation, with its audit trail.
#[derive(Clone, Debug)]
pub struct AlkComputation {
    pub value: AlkValue,
    /// Audit ledger; summing `sign` over it recovers the raw representative.
    pub crossings: Vec<SignedCrossing>,
    /// Whether the events had to be swapped into slice-time order first.
    pub swapped: bool,
    /// Whether the regular-value device moved the target point.
    pub perturbed: bool,
}

pub struct AlkEngine {
    pub st: StaticSpacetime,
    pub group: CoefficientGroup,
    pub orientation: Orientation,
}

impl AlkEngine {
    pub fn new(st: StaticSpacetime, group: CoefficientGroup) -> Self {
        AlkEngine {
            st,
            group,
            orientation: Orientation::Standard,
        }
    }

    /// Rejects the configurations on which no linking value exists: events
    /// joined by a null geodesic (the skies intersect) and identical events.
    pub(crate) fn reject_degenerate_pair(&self, x: &Event, y: &Event) -> Result<()> {
        match self.st.causal_relation(x, y)? {
            CausalVerdict::NullRelated { connections } => Err(Error::CommonNullGeodesic {
                count: connections.len(),
            }),
            v if v.is_identical() => Err(Error::IdenticalEvents),
            _ => Ok(()),
        }
    }

    /// Signed preimage count at the policy ray resolution.
    pub fn alk_by_counting(&self, x: &Event, y: &Event) -> Result<AlkComputation> {
        self.alk_by_counting_with(x, y, self.st.policy.n_samples)
    }

    pub fn alk_by_counting_with(
        &self,
        x: &Event,
        y: &Event,
        rays: usize,
    ) -> Result<AlkComputation> {
        if rays < 16 {
            return Err(Error::TooFewSamples {
                need: 16,
                got: rays,
            });
        }
        self.reject_degenerate_pair(x, y)?;
        let (a, b, swapped) = if y.time >= x.time {
            (x, y, false)
        } else {
            (y, x, true)
        };
        let tau = b.time - a.time;
        let mut crossings = Vec::new();
        let mut perturbed = false;
        let mut raw: i64 = 0;
        if tau > 0.0 {
            let p = self.st.surface.canonical_point(&a.point)?;
            let (v, moved) = self.resolve_target(&p, &b.point, tau)?;
            perturbed = moved;
            let cone = ConeMap::new(&self.st, &p)?;
            let hits = roots::find_preimages(&self.st, &p, tau, rays, &FixedTarget(v))?;
            let mut negative = 0usize;
            let mut positive = 0usize;
            for root in &hits {
                let sign = self.counting_sign(&cone, root.s, root.t)?;
                if sign < 0 {
                    negative += 1;
                } else {
                    positive += 1;
                }
                crossings.push(SignedCrossing {
                    parameter: a.time + root.t,
                    location: root.point,
                    sign: -sign,
                    method: CrossingMethod::PreimageJacobian,
                });
            }
            // Flat cones never refocus, so mixed signs there can only be a
            // numerical fault; fail loudly instead of cancelling terms.
            if matches!(
                self.st.surface,
                SurfaceModel::FlatPlane | SurfaceModel::FlatTorus { .. }
            ) && negative > 0
                && positive > 0
            {
                return Err(Error::MixedPreimageSigns { negative, positive });
            }
            raw = negative as i64 - positive as i64;
        }
        Ok(AlkComputation {
            value: AlkValue::new(raw, self.group),
            crossings,
            swapped,
            perturbed,
        })
    }

    /// Orientation sign of the cone map at a hit. Flat models use the closed
    /// form; the sphere uses central differences, with the closed form kept
    /// as a test oracle. Hits inside the caustic band have no stable sign.
    fn counting_sign(&self, cone: &ConeMap, s: f64, t: f64) -> Result<i8> {
        let det = match &self.st.surface {
            SurfaceModel::FlatPlane | SurfaceModel::FlatTorus { .. } => {
                cone.analytic_jacobian_det(t)
            }
            SurfaceModel::RoundSphere { radius } => {
                let det = cone.fd_jacobian_det(s, t, self.st.policy.fd_step);
                if det.abs() < 1e-6 * radius {
                    return Err(Error::AmbiguousPreimage(format!(
                        "hit at (s = {s:.6}, t = {t:.6}) sits in the caustic band; \
                         its Jacobian {det:.3e} has no reliable sign"
                    )));
                }
                det
            }
        };
        let mut sign: i8 = if det < 0.0 { -1 } else { 1 };
        if self.orientation == Orientation::Reversed {
            sign = -sign;
        }
        Ok(sign)
    }

    /// Regular-value device. When the later point sits on the fiber over the
    /// earlier one (or at its sphere antipode), slide it one small geodesic
    /// step so every hit becomes transverse.
    ///
    /// The step is admissible because connection lengths vary 1-Lipschitz
    /// with the endpoint: if no length lies within `delta + guard` of `tau`
    /// to begin with, no length can cross the null band while the target
    /// moves by `delta`, so the configuration class of the pair is
    /// unchanged and the linking value is preserved.
    fn resolve_target(
        &self,
        p: &SurfacePoint,
        target: &SurfacePoint,
        tau: f64,
    ) -> Result<(SurfacePoint, bool)> {
        let surf = &self.st.surface;
        let v = surf.canonical_point(target)?;
        let mut degenerate = surf.riemannian_distance(p, &v)? < 1e-9;
        let anti = match surf {
            SurfaceModel::RoundSphere { .. } => {
                let a = SurfacePoint::Sphere(-p.unit_dir()?);
                degenerate |= surf.riemannian_distance(&a, &v)? < 1e-9;
                Some(a)
            }
            _ => None,
        };
        if !degenerate {
            return Ok((v, false));
        }
        let policy = &self.st.policy;
        let guard = 10.0 * policy.null_tolerance(tau);
        let conns = surf.geodesic_connections(p, &v, tau + 1.0, policy)?;
        let min_gap = conns
            .iter()
            .map(|c| (c.length - tau).abs())
            .fold(f64::INFINITY, f64::min);
        if min_gap <= 4.0 * guard {
            return Err(Error::PerturbationFailed(format!(
                "a geodesic connection of the degenerate pair lies within {min_gap:.3e} \
                 of the separation {tau:.6}; any step could cross the null band"
            )));
        }
        let delta = policy.perturb_delta.min(tau / 2.0).min(0.5 * min_gap);
        let frame = surf.orthonormal_frame(&v)?;
        for dir in [&frame[0], &frame[1]] {
            for sgn in [1.0, -1.0] {
                let (u, _) = surf.integrate_geodesic(&dir.scaled(sgn), delta)?;
                if surf.riemannian_distance(p, &u)? < 0.5 * delta {
                    continue;
                }
                if let Some(a) = &anti {
                    if surf.riemannian_distance(a, &u)? < 0.5 * delta {
                        continue;
                    }
                }
                return Ok((u, true));
            }
        }
        Err(Error::PerturbationFailed(
            "no chart direction produced a transverse target".into(),
        ))
    }
}
