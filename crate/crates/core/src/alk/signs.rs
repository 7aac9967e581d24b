use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::wavefront::Tangency;

/// Sign of a transverse double-point resolution, read off the frame
/// `{df1, w, df2}` in a positively oriented chart of the lift space
/// (base coordinates first, fiber angle last).
///
/// `df1` and `df2` are the lifted front tangents at the crossing, `w` the
/// resolution velocity of the second lift relative to the first.
pub fn crossing_sign_frame(
    df1: &Vector3<f64>,
    w: &Vector3<f64>,
    df2: &Vector3<f64>,
    tol_frame: f64,
) -> Result<i8> {
    let det = Matrix3::from_columns(&[*df1, *w, *df2]).determinant();
    let scale = df1.norm() * w.norm() * df2.norm();
    if det.abs() <= tol_frame * scale {
        return Err(Error::DegenerateResolution { det });
    }
    Ok(if det > 0.0 { 1 } else { -1 })
}

/// Scalar second derivative of the branch gap `g = f2 - f1` at the contact,
/// from the stored quadratic fits.
pub fn branch_gap_hessian(t: &Tangency) -> f64 {
    2.0 * (t.fit_b.coeffs[2] - t.fit_a.coeffs[2])
}

/// Traversal-orientation product of the two branches in the aligned chart.
pub fn epsilon_of(t: &Tangency) -> i8 {
    if t.fit_a.orientation * t.fit_b.orientation > 0.0 {
        1
    } else {
        -1
    }
}

/// Sign of a dangerous tangency: `alpha * epsilon * sign(g''(0))`, where
/// `alpha` is the sign of the second branch's relative displacement along
/// the chart normal and `epsilon` the branch orientation product. In two
/// dimensions the Hessian of the gap is the scalar `g''(0)`.
pub fn tangency_sign(t: &Tangency, epsilon: i8, alpha: i8, tol_hess: f64) -> Result<i8> {
    debug_assert!(epsilon == 1 || epsilon == -1);
    debug_assert!(alpha == 1 || alpha == -1);
    let hess = branch_gap_hessian(t);
    if hess.abs() <= tol_hess {
        return Err(Error::DegenerateTangency { hess: hess.abs() });
    }
    let s = if hess > 0.0 { 1 } else { -1 };
    Ok(epsilon * alpha * s)
}
