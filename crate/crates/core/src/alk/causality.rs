//! Causality decisions read off the linking value, and the sighting bound
//! for observers.

use crate::alk::counting::AlkEngine;
use crate::alk::group::{coefficient_group, AlkValue, CoefficientGroup, ManifoldDescriptor};
use crate::error::{Error, Result};
use crate::spacetime::{CausalVerdict, Event, StaticSpacetime, TimeOrder};

/// What the linking value alone certifies about two events.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LinkVerdict {
    Related,
    Unrelated,
    Inconclusive,
}

/// A causality decision with its evidence: the linking value it was read
/// from, the slow-path oracle's verdict, and whether the two agree. The
/// oracle is consulted for the audit trail only; it never influences the
/// verdict.
#[derive(Clone, Debug)]
pub struct CausalityReport {
    pub verdict: LinkVerdict,
    pub alk: AlkValue,
    pub oracle: CausalVerdict,
    pub oracle_confirmed: bool,
}

/// Decides the causal relation of two non-null events from the linking
/// value of their skies.
///
/// A certainly-nonzero value always certifies a relation. Zero certifies
/// unrelatedness only when the coefficient group is the full integers and
/// the model carries the nonnegative-timelike-curvature certificate; in
/// every other situation zero is honestly inconclusive. The round sphere is
/// the builtin example: its refocusing cones admit genuinely related pairs
/// with unlinked skies, so its zeros never upgrade to `Unrelated`.
pub fn causality_from_alk(
    st: &StaticSpacetime,
    desc: &ManifoldDescriptor,
    x: &Event,
    y: &Event,
) -> Result<CausalityReport> {
    let group = coefficient_group(desc)?;
    let engine = AlkEngine::new(st.clone(), group);
    let alk = engine.alk_by_counting(x, y)?.value;
    let verdict = if alk.is_certainly_nonzero() {
        LinkVerdict::Related
    } else if group == CoefficientGroup::Integers
        && st.surface.certified_nonnegative_timelike_curvature()
    {
        LinkVerdict::Unrelated
    } else {
        LinkVerdict::Inconclusive
    };
    let oracle = st.causal_relation(x, y)?;
    let oracle_confirmed = match verdict {
        LinkVerdict::Related => oracle.is_related(),
        LinkVerdict::Unrelated => !oracle.is_related(),
        LinkVerdict::Inconclusive => false,
    };
    Ok(CausalityReport {
        verdict,
        alk,
        oracle,
        oracle_confirmed,
    })
}

/// Lower bound on how many times an observer traveling from `y` to `z`
/// meets light from the event `x`: the absolute difference of the integer
/// linking values at the window's two ends. Any generic timelike curve
/// between the endpoints crosses the cone of `x` at least this often.
pub fn sighting_count(st: &StaticSpacetime, x: &Event, y: &Event, z: &Event) -> Result<u64> {
    match st.causal_relation(y, z)? {
        CausalVerdict::ChronologicallyRelated {
            direction: TimeOrder::Future,
            identical: false,
        } => {}
        other => {
            return Err(Error::InvalidInput(format!(
                "the observation window needs its end strictly in the chronological future \
                 of its start, got {other:?}"
            )));
        }
    }
    let engine = AlkEngine::new(st.clone(), CoefficientGroup::Integers);
    let at_start = engine.alk_by_counting(x, y)?.value.representative;
    let at_end = engine.alk_by_counting(x, z)?.value.representative;
    Ok(at_end.abs_diff(at_start))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spacetime::Event;
    use crate::surface::{SurfaceModel, SurfacePoint};
    use nalgebra::Vector3;
    use std::f64::consts::PI;

    fn setup(model: SurfaceModel) -> (StaticSpacetime, ManifoldDescriptor) {
        let desc = ManifoldDescriptor::of_model(&model);
        (StaticSpacetime::new(model), desc)
    }

    fn ev(x: f64, y: f64, t: f64) -> Event {
        Event::new(SurfacePoint::flat(x, y), t)
    }

    #[test]
    fn a_wide_torus_window_is_related_and_confirmed() {
        let (st, desc) = setup(SurfaceModel::flat_torus(1.0, 1.0).unwrap());
        let report =
            causality_from_alk(&st, &desc, &ev(0.0, 0.0, 0.0), &ev(0.5, 0.0, 2.2)).unwrap();
        assert_eq!(report.verdict, LinkVerdict::Related);
        assert_eq!(report.alk.representative, 16);
        assert!(report.oracle_confirmed);
        assert!(report.oracle.is_related());
    }

    #[test]
    fn a_spacelike_torus_pair_is_certified_unrelated() {
        let (st, desc) = setup(SurfaceModel::flat_torus(1.0, 1.0).unwrap());
        let report =
            causality_from_alk(&st, &desc, &ev(0.0, 0.0, 0.0), &ev(0.5, 0.5, 0.3)).unwrap();
        assert_eq!(report.verdict, LinkVerdict::Unrelated);
        assert_eq!(report.alk.representative, 0);
        assert!(report.oracle_confirmed);
    }

    #[test]
    fn the_refocusing_cylinder_pair_is_inconclusive() {
        // Antipodal events one full period apart: genuinely related, yet
        // the skies unlink. The zero must not be sold as unrelatedness,
        // and the oracle disagreement is on display.
        let (st, desc) = setup(SurfaceModel::round_sphere(1.0).unwrap());
        let q = SurfacePoint::sphere(Vector3::new(1.0, 0.0, 0.0)).unwrap();
        let anti = SurfacePoint::sphere(Vector3::new(-1.0, 0.0, 0.0)).unwrap();
        let report = causality_from_alk(
            &st,
            &desc,
            &Event::new(q, 0.0),
            &Event::new(anti, 2.0 * PI),
        )
        .unwrap();
        assert_eq!(report.verdict, LinkVerdict::Inconclusive);
        assert_eq!(report.alk.representative, 0);
        assert!(!report.oracle_confirmed);
        assert!(report.oracle.is_related());
    }

    #[test]
    fn a_nonzero_sphere_value_still_certifies_relation() {
        let (st, desc) = setup(SurfaceModel::round_sphere(1.0).unwrap());
        let q = SurfacePoint::sphere(Vector3::new(0.0, 0.0, 1.0)).unwrap();
        let report = causality_from_alk(
            &st,
            &desc,
            &Event::new(q, 0.0),
            &Event::new(q, 1.5 * PI),
        )
        .unwrap();
        assert_eq!(report.verdict, LinkVerdict::Related);
        assert_eq!(report.alk.representative, 1);
        assert!(report.oracle_confirmed);
    }

    #[test]
    fn the_torus_observer_sees_the_flash_three_times() {
        let st = StaticSpacetime::new(SurfaceModel::flat_torus(1.0, 1.0).unwrap());
        let x = ev(0.0, 0.0, 0.0);
        let y = ev(0.1, 0.1, 0.05);
        let z = ev(0.1, 0.1, 1.0);
        assert_eq!(sighting_count(&st, &x, &y, &z).unwrap(), 3);
    }

    #[test]
    fn the_plane_observer_sees_the_flash_once() {
        let st = StaticSpacetime::new(SurfaceModel::FlatPlane);
        let x = ev(0.0, 0.0, 0.0);
        let y = ev(0.3, 0.0, 0.1);
        let z = ev(0.3, 0.0, 1.0);
        assert_eq!(sighting_count(&st, &x, &y, &z).unwrap(), 1);
    }

    #[test]
    fn a_quiet_window_has_no_sightings() {
        let st = StaticSpacetime::new(SurfaceModel::flat_torus(1.0, 1.0).unwrap());
        let x = ev(0.0, 0.0, 0.0);
        let y = ev(0.5, 0.5, 0.1);
        let z = ev(0.5, 0.5, 0.2);
        assert_eq!(sighting_count(&st, &x, &y, &z).unwrap(), 0);
    }

    #[test]
    fn backwards_or_null_windows_are_rejected() {
        let st = StaticSpacetime::new(SurfaceModel::FlatPlane);
        let x = ev(0.0, 0.0, 0.0);
        let y = ev(0.3, 0.0, 0.1);
        let z = ev(0.3, 0.0, 1.0);
        assert!(matches!(
            sighting_count(&st, &x, &z, &y),
            Err(Error::InvalidInput(_))
        ));
        assert!(matches!(
            sighting_count(&st, &x, &y, &y.clone()),
            Err(Error::InvalidInput(_))
        ));
        // A null observation window is no chronology either.
        let w = ev(1.3, 0.0, 1.1);
        assert!(matches!(
            sighting_count(&st, &x, &y, &w),
            Err(Error::InvalidInput(_))
        ));
    }
}
