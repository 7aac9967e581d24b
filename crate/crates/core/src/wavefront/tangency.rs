use nalgebra::{Matrix2, Matrix3, Vector2, Vector3};

use crate::error::{Error, Result};
use crate::numeric::NumericPolicy;
use crate::surface::SurfacePoint;
use crate::wavefront::front::Front;

/// Local quadratic graph `v = c0 + c1 u + c2 u^2` of one front branch in the
/// aligned tangency chart, plus the direction the branch is traversed in:
/// `orientation` is +1 when the sample index increases with `u`.
#[derive(Clone, Copy, Debug)]
pub struct BranchFit {
    pub coeffs: [f64; 3],
    pub orientation: f64,
}

/// A dangerous tangency: two front branches touching with positively aligned
/// conormals, resolved into quadratic graphs over the common tangent line.
///
/// The chart is rotated so the shared conormal points along -x2; `fit_a` and
/// `fit_b` are the branch graphs in that chart, centered on the contact.
#[derive(Clone, Copy, Debug)]
pub struct Tangency {
    pub index_a: usize,
    pub index_b: usize,
    pub point: SurfacePoint,
    pub alignment: f64,
    pub fit_a: BranchFit,
    pub fit_b: BranchFit,
}

/// Scans two fronts on a common slice for dangerous tangencies.
///
/// Sample pairs closer than `tol_hit` (a multiple of the coarser front's
/// adjacent spacing) are clustered, each cluster's closest pair is polished
/// to a continuous contact point, and only contacts whose conormals agree
/// (positive inner product) survive; anti-aligned touches are crossings of
/// the lifts' mirror images and carry no double point.
pub fn front_tangency_scan(
    policy: &NumericPolicy,
    front_a: &Front,
    front_b: &Front,
) -> Result<Vec<Tangency>> {
    if (front_a.slice_time - front_b.slice_time).abs() > 1e-12 {
        return Err(Error::SliceMismatch {
            a: front_a.slice_time,
            b: front_b.slice_time,
        });
    }
    let pa = chart_points(front_a)?;
    let pb = chart_points(front_b)?;
    let sa = max_adjacent_gap(&pa);
    let sb = max_adjacent_gap(&pb);
    if sa < 1e-12 || sb < 1e-12 {
        return Err(Error::DegenerateFront);
    }
    let tol_hit = policy.tol_hit * sa.max(sb);

    let mut candidates: Vec<(usize, usize, f64)> = Vec::new();
    for (i, p) in pa.iter().enumerate() {
        for (j, q) in pb.iter().enumerate() {
            let d = (p - q).norm();
            if d < tol_hit {
                candidates.push((i, j, d));
            }
        }
    }
    if candidates.is_empty() {
        return Ok(Vec::new());
    }

    let clusters = cluster_pairs(&candidates, pa.len(), pb.len());
    let mut out = Vec::new();
    for cluster in clusters {
        let &(i, j, _) = cluster
            .iter()
            .min_by(|x, y| x.2.total_cmp(&y.2))
            .expect("cluster is nonempty");
        let na = unit_flat(front_a, i)?;
        let nb = unit_flat(front_b, j)?;
        let alignment = na.dot(&nb);
        if alignment <= 0.0 {
            continue;
        }
        let contact = polish_contact(&pa, &pb, i, j);
        // Rotate the shared conormal onto (0, -1); det = +1 preserves the
        // chart orientation.
        let m = (na + nb).normalize();
        let rot = Matrix2::new(-m.y, m.x, -m.x, -m.y);
        let fit_a = branch_fit(&pa, i, &rot, &contact)?;
        let fit_b = branch_fit(&pb, j, &rot, &contact)?;
        out.push(Tangency {
            index_a: i,
            index_b: j,
            point: SurfacePoint::Flat(contact),
            alignment,
            fit_a,
            fit_b,
        });
    }
    out.sort_by(|a, b| (a.index_a, a.index_b).cmp(&(b.index_a, b.index_b)));
    Ok(out)
}

fn chart_points(front: &Front) -> Result<Vec<Vector2<f64>>> {
    front
        .samples
        .iter()
        .map(|r| {
            r.point.flat_coords().map_err(|_| {
                Error::ChartOverflow("tangency scan needs planar chart coordinates".into())
            })
        })
        .collect()
}

fn unit_flat(front: &Front, i: usize) -> Result<Vector2<f64>> {
    let v = front.samples[i].conormal.flat_components().map_err(|_| {
        Error::ChartOverflow("tangency scan needs planar chart coordinates".into())
    })?;
    let n = v.norm();
    if n < 1e-12 {
        return Err(Error::DegenerateFront);
    }
    Ok(v / n)
}

fn max_adjacent_gap(pts: &[Vector2<f64>]) -> f64 {
    let n = pts.len();
    let mut max = 0.0f64;
    for i in 0..n {
        max = max.max((pts[(i + 1) % n] - pts[i]).norm());
    }
    max
}

/// Groups candidate index pairs that belong to one geometric contact: two
/// pairs are neighbors when both circular index distances are at most 8.
fn cluster_pairs(
    candidates: &[(usize, usize, f64)],
    na: usize,
    nb: usize,
) -> Vec<Vec<(usize, usize, f64)>> {
    let circ = |a: usize, b: usize, n: usize| {
        let d = (a as isize - b as isize).unsigned_abs() % n;
        d.min(n - d)
    };
    let mut assigned = vec![usize::MAX; candidates.len()];
    let mut clusters: Vec<Vec<(usize, usize, f64)>> = Vec::new();
    for k in 0..candidates.len() {
        if assigned[k] != usize::MAX {
            continue;
        }
        let id = clusters.len();
        clusters.push(Vec::new());
        let mut stack = vec![k];
        assigned[k] = id;
        while let Some(t) = stack.pop() {
            clusters[id].push(candidates[t]);
            for (m, d) in candidates.iter().enumerate() {
                if assigned[m] == usize::MAX
                    && circ(candidates[t].0, d.0, na) <= 8
                    && circ(candidates[t].1, d.1, nb) <= 8
                {
                    assigned[m] = id;
                    stack.push(m);
                }
            }
        }
    }
    clusters
}

/// Quadratic interpolation of a front polyline through samples
/// `c-1, c, c+1` at local parameter `u` in [-1, 1]; returns point and
/// d/du derivative.
fn local_quad(pts: &[Vector2<f64>], c: usize, u: f64) -> (Vector2<f64>, Vector2<f64>) {
    let n = pts.len();
    let pm = pts[(c + n - 1) % n];
    let p0 = pts[c];
    let pp = pts[(c + 1) % n];
    let d1 = (pp - pm) / 2.0;
    let d2 = (pp - p0 * 2.0 + pm) / 2.0;
    (p0 + d1 * u + d2 * (u * u), d1 + d2 * (2.0 * u))
}

/// Continuous contact point between the two local branches: damped
/// Gauss-Newton on the squared gap. The gap Jacobian degenerates exactly at
/// a tangency, which the damping absorbs; on stall the sample midpoint is
/// already the answer to sampling accuracy.
fn polish_contact(
    pa: &[Vector2<f64>],
    pb: &[Vector2<f64>],
    i: usize,
    j: usize,
) -> Vector2<f64> {
    let mut u = 0.0f64;
    let mut w = 0.0f64;
    for _ in 0..12 {
        let (qa, da) = local_quad(pa, i, u);
        let (qb, db) = local_quad(pb, j, w);
        let r = qa - qb;
        if r.norm() < 1e-14 {
            break;
        }
        let jtj = Matrix2::new(da.dot(&da), -da.dot(&db), -da.dot(&db), db.dot(&db));
        let damp = 1e-9 * (jtj.m11 + jtj.m22).max(1e-12);
        let lhs = jtj + Matrix2::identity() * damp;
        let rhs = -Vector2::new(da.dot(&r), -db.dot(&r));
        match lhs.lu().solve(&rhs) {
            Some(step) => {
                u = (u + step.x).clamp(-1.5, 1.5);
                w = (w + step.y).clamp(-1.5, 1.5);
                if step.norm() < 1e-12 {
                    break;
                }
            }
            None => break,
        }
    }
    let (qa, _) = local_quad(pa, i, u);
    let (qb, _) = local_quad(pb, j, w);
    (qa + qb) / 2.0
}

/// Least-squares quadratic over the 5-sample window around `center`, in the
/// rotated chart anchored at the contact point.
fn branch_fit(
    pts: &[Vector2<f64>],
    center: usize,
    rot: &Matrix2<f64>,
    contact: &Vector2<f64>,
) -> Result<BranchFit> {
    let n = pts.len();
    let mut us = [0.0f64; 5];
    let mut vs = [0.0f64; 5];
    for (slot, k) in (-2isize..=2).enumerate() {
        let idx = (center as isize + k).rem_euclid(n as isize) as usize;
        let q = rot * (pts[idx] - contact);
        us[slot] = q.x;
        vs[slot] = q.y;
    }
    // Graph condition over the common tangent line: u strictly monotone
    // across the window, otherwise the branch folds (front cusp nearby).
    let mut dir = 0.0f64;
    for k in 0..4 {
        let d = us[k + 1] - us[k];
        if d.abs() < 1e-14 || (dir != 0.0 && d.signum() != dir) {
            return Err(Error::ChartSingular(
                "front branch is not a graph near the tangency".into(),
            ));
        }
        dir = d.signum();
    }
    let mut m = Matrix3::zeros();
    let mut b = Vector3::zeros();
    for k in 0..5 {
        let row = [1.0, us[k], us[k] * us[k]];
        for r in 0..3 {
            for c in 0..3 {
                m[(r, c)] += row[r] * row[c];
            }
            b[r] += row[r] * vs[k];
        }
    }
    let c = m.lu().solve(&b).ok_or_else(|| {
        Error::ChartSingular("quadratic fit is singular in the aligned chart".into())
    })?;
    Ok(BranchFit {
        coeffs: [c.x, c.y, c.z],
        orientation: dir,
    })
}
