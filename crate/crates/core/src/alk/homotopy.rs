//! The homotopy engine: the linking value as a signed tally of dangerous
//! tangencies along an explicit disentangling translation.
//!
//! Both skies are pushed to a common slice just above the later event,
//! where they become cooriented closed fronts in a flat chart: a big circle
//! for the earlier event and a small one for the later. Translating the
//! small front rigidly out to a separated position sweeps a homotopy of its
//! lift; every change in the number of proper front crossings pins a
//! tangency moment, and the tangencies whose conormals agree are the
//! dangerous ones. Each dangerous tangency contributes minus its resolved
//! sign, and the ledger total is the linking value.
//!
//! The sweep assumes the scene is generic at the `min_feature` scale: a
//! crossing pair that both appears and vanishes within a quarter of that
//! scale would slip between strides. The circle scenes built here have no
//! such transients.

use std::collections::HashMap;
use std::f64::consts::PI;

use nalgebra::{Matrix2, Vector2};

use crate::alk::counting::{AlkComputation, AlkEngine, CrossingMethod, SignedCrossing};
use crate::alk::group::AlkValue;
use crate::alk::signs::{epsilon_of, tangency_sign};
use crate::error::{Error, Result};
use crate::numeric::NumericPolicy;
use crate::spacetime::Event;
use crate::surface::SurfaceModel;
use crate::wavefront::{circle_front, front_tangency_scan, Coorientation, Front, Tangency};

/// Rigid chart translation: the moving front slides `distance` along
/// `direction`, parameterized by displacement in `[0, distance]`.
#[derive(Clone, Copy, Debug)]
pub struct TranslationScript {
    pub direction: Vector2<f64>,
    pub distance: f64,
}

/// A disentangling problem staged in one flat chart: translate `moving`
/// along the script until it is separated from `fixed`, watching for
/// dangerous tangencies on the way.
///
/// `min_feature` is the smallest geometric scale of the scene (for the
/// two-sky scenes, the small front's radius). The sweep stride and the
/// final separation margin both derive from it.
#[derive(Clone, Debug)]
pub struct ChartScene {
    pub fixed: Front,
    pub moving: Front,
    pub script: TranslationScript,
    pub min_feature: f64,
}

/// Uniform spatial hash over the fixed polyline's segments. Cells are no
/// smaller than twice the longest segment, so a segment lies in at most
/// four cells and anything intersecting a query box is registered in one
/// of the box's own cells.
struct SegmentGrid {
    cell: f64,
    segs: Vec<(Vector2<f64>, Vector2<f64>)>,
    map: HashMap<(i64, i64), Vec<u32>>,
    stamp: Vec<u32>,
    epoch: u32,
}

impl SegmentGrid {
    fn build(points: &[Vector2<f64>], min_cell: f64) -> Self {
        let n = points.len();
        let mut segs = Vec::with_capacity(n);
        let mut longest = 0.0f64;
        for i in 0..n {
            let a = points[i];
            let b = points[(i + 1) % n];
            longest = longest.max((b - a).norm());
            segs.push((a, b));
        }
        let cell = (2.0 * longest).max(min_cell).max(1e-9);
        let mut map: HashMap<(i64, i64), Vec<u32>> = HashMap::new();
        for (k, (a, b)) in segs.iter().enumerate() {
            let (i0, i1, j0, j1) = cell_range(a, b, cell);
            for i in i0..=i1 {
                for j in j0..=j1 {
                    map.entry((i, j)).or_default().push(k as u32);
                }
            }
        }
        SegmentGrid {
            cell,
            stamp: vec![0; segs.len()],
            segs,
            map,
            epoch: 0,
        }
    }

    /// Deduplicated indices of segments registered in the query box's cells,
    /// optionally expanded by a ring of neighbors.
    fn candidates_into(
        &mut self,
        a: &Vector2<f64>,
        b: &Vector2<f64>,
        expand: i64,
        out: &mut Vec<u32>,
    ) {
        out.clear();
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamp.fill(0);
            self.epoch = 1;
        }
        let (i0, i1, j0, j1) = cell_range(a, b, self.cell);
        for i in (i0 - expand)..=(i1 + expand) {
            for j in (j0 - expand)..=(j1 + expand) {
                if let Some(v) = self.map.get(&(i, j)) {
                    for &k in v {
                        if self.stamp[k as usize] != self.epoch {
                            self.stamp[k as usize] = self.epoch;
                            out.push(k);
                        }
                    }
                }
            }
        }
    }
}

fn cell_range(a: &Vector2<f64>, b: &Vector2<f64>, cell: f64) -> (i64, i64, i64, i64) {
    let (x0, x1) = (a.x.min(b.x), a.x.max(b.x));
    let (y0, y1) = (a.y.min(b.y), a.y.max(b.y));
    (
        (x0 / cell).floor() as i64,
        (x1 / cell).floor() as i64,
        (y0 / cell).floor() as i64,
        (y1 / cell).floor() as i64,
    )
}

/// Strict proper-crossing test; touching or collinear configurations do not
/// count, which keeps the count stable except at isolated tangency moments.
fn proper_cross(p: &Vector2<f64>, q: &Vector2<f64>, a: &Vector2<f64>, b: &Vector2<f64>) -> bool {
    let pq = q - p;
    let ab = b - a;
    let d1 = pq.perp(&(a - p));
    let d2 = pq.perp(&(b - p));
    let d3 = ab.perp(&(p - a));
    let d4 = ab.perp(&(q - a));
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

fn crossings_at(
    grid: &mut SegmentGrid,
    scratch: &mut Vec<u32>,
    moving: &[Vector2<f64>],
    shift: Vector2<f64>,
) -> usize {
    let m = moving.len();
    let mut count = 0;
    for i in 0..m {
        let a = moving[i] + shift;
        let b = moving[(i + 1) % m] + shift;
        grid.candidates_into(&a, &b, 0, scratch);
        for &k in scratch.iter() {
            let (p, q) = grid.segs[k as usize];
            if proper_cross(&p, &q, &a, &b) {
                count += 1;
            }
        }
    }
    count
}

/// Parity containment test against the fixed polyline. The ray slope is
/// irrational-ish so it cannot run along a segment or through a vertex of
/// any reasonably sampled front.
fn inside_polyline(segs: &[(Vector2<f64>, Vector2<f64>)], point: Vector2<f64>) -> bool {
    let mut reach = 1.0f64;
    for (a, b) in segs {
        reach = reach.max((a - point).norm()).max((b - point).norm());
    }
    let far = point + Vector2::new(1.0, 0.137_235_910_4).normalize() * (2.0 * reach + 1.0);
    let mut hits = 0usize;
    for (a, b) in segs {
        if proper_cross(a, b, &point, &far) {
            hits += 1;
        }
    }
    hits % 2 == 1
}

/// Smallest distance from the shifted moving samples to the fixed segments,
/// floored at one grid cell: samples with no registered segment in their
/// 3x3 cell block are at least a cell away.
fn separation_floor(
    grid: &mut SegmentGrid,
    scratch: &mut Vec<u32>,
    moving: &[Vector2<f64>],
    shift: Vector2<f64>,
) -> f64 {
    let mut best = grid.cell;
    for m in moving {
        let p = m + shift;
        grid.candidates_into(&p, &p, 1, scratch);
        for &k in scratch.iter() {
            let (a, b) = grid.segs[k as usize];
            best = best.min(point_segment_distance(&p, &a, &b));
        }
    }
    best
}

fn point_segment_distance(p: &Vector2<f64>, a: &Vector2<f64>, b: &Vector2<f64>) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 < 1e-30 {
        return (p - a).norm();
    }
    let u = ((p - a).dot(&ab) / len2).clamp(0.0, 1.0);
    (p - (a + ab * u)).norm()
}

/// Resolved sign of one dangerous tangency. The shared conormal is rotated
/// onto the downward axis; the moving branch's chart velocity then has a
/// vertical component whose sign is the approach direction, and the branch
/// gap's second derivative separates creation from annihilation.
fn resolve_tangency(
    policy: &NumericPolicy,
    fixed: &Front,
    moved: &Front,
    t: &Tangency,
    dir: &Vector2<f64>,
) -> Result<i8> {
    let unit = |front: &Front, i: usize| -> Result<Vector2<f64>> {
        let v = front.samples[i].conormal.flat_components()?;
        let n = v.norm();
        if n < 1e-12 {
            return Err(Error::DegenerateFront);
        }
        Ok(v / n)
    };
    let na = unit(fixed, t.index_a)?;
    let nb = unit(moved, t.index_b)?;
    let m = na + nb;
    let mn = m.norm();
    if mn < 1e-9 {
        return Err(Error::DegenerateResolution { det: mn });
    }
    let m = m / mn;
    let rot = Matrix2::new(-m.y, m.x, -m.x, -m.y);
    let q = rot * dir;
    if q.y.abs() < 1e-9 {
        return Err(Error::DegenerateResolution { det: q.y });
    }
    let alpha = if q.y > 0.0 { 1 } else { -1 };
    tangency_sign(t, epsilon_of(t), alpha, policy.tol_hess)
}

/// Sweeps the scene's translation and returns the dangerous-tangency
/// ledger; entry signs sum to the scene's contribution to the linking
/// value. `parameter` on each entry is the displacement at which the
/// tangency happened.
///
/// Errors honestly instead of guessing: an unresolvable crossing jump is
/// [`Error::SimultaneousTangencies`], a script that ends with the fronts
/// still crossed, too close, or nested is [`Error::NotSeparated`].
pub fn homotopy_scan(policy: &NumericPolicy, scene: &ChartScene) -> Result<Vec<SignedCrossing>> {
    let raw_dir = scene.script.direction;
    if !raw_dir.x.is_finite() || !raw_dir.y.is_finite() || raw_dir.norm() < 1e-12 {
        return Err(Error::InvalidInput(
            "translation direction must be a nonzero finite vector".into(),
        ));
    }
    let dir = raw_dir / raw_dir.norm();
    let total = scene.script.distance;
    if !(total > 0.0) {
        return Err(Error::InvalidInput(format!(
            "translation distance must be positive, got {total}"
        )));
    }
    if !(scene.min_feature > 0.0) {
        return Err(Error::InvalidInput(format!(
            "scene min_feature must be positive, got {}",
            scene.min_feature
        )));
    }
    if (scene.fixed.slice_time - scene.moving.slice_time).abs() > 1e-12 {
        return Err(Error::SliceMismatch {
            a: scene.fixed.slice_time,
            b: scene.moving.slice_time,
        });
    }
    let chart = |front: &Front| -> Result<Vec<Vector2<f64>>> {
        front
            .samples
            .iter()
            .map(|r| {
                r.point.flat_coords().map_err(|_| {
                    Error::ChartOverflow("homotopy scenes need planar chart coordinates".into())
                })
            })
            .collect()
    };
    let fixed_pts = chart(&scene.fixed)?;
    let moving_pts = chart(&scene.moving)?;
    if fixed_pts.len() < 3 || moving_pts.len() < 3 {
        return Err(Error::TooFewSamples {
            need: 3,
            got: fixed_pts.len().min(moving_pts.len()),
        });
    }

    // Cells at twice the feature scale make the separation floor strict:
    // an empty 3x3 neighborhood certifies a gap of at least one cell,
    // comfortably above min_feature.
    let mut grid = SegmentGrid::build(&fixed_pts, 2.0 * scene.min_feature);
    let mut scratch: Vec<u32> = Vec::new();
    let stride = scene.min_feature / 4.0;
    let mut ledger = Vec::new();

    let mut tau = 0.0f64;
    let mut c_prev = crossings_at(&mut grid, &mut scratch, &moving_pts, dir * 0.0);
    while tau < total {
        let next = (tau + stride).min(total);
        let c_next = crossings_at(&mut grid, &mut scratch, &moving_pts, dir * next);
        if c_next == c_prev {
            tau = next;
            continue;
        }
        // Earliest change in (tau, next]: bisect on "count still undisturbed".
        let (mut lo, mut hi) = (tau, next);
        for _ in 0..48 {
            let mid = 0.5 * (lo + hi);
            if crossings_at(&mut grid, &mut scratch, &moving_pts, dir * mid) == c_prev {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let c_hi = crossings_at(&mut grid, &mut scratch, &moving_pts, dir * hi);
        if (c_hi as i64 - c_prev as i64).abs() != 2 {
            return Err(Error::SimultaneousTangencies);
        }
        let moved = scene.moving.translated(dir * (0.5 * (lo + hi)))?;
        let contacts = front_tangency_scan(policy, &scene.fixed, &moved)?;
        match contacts.len() {
            // Anti-aligned touch: the lifts pass like mirror images and no
            // double point of the link is born or dies.
            0 => {}
            1 => {
                let sigma = resolve_tangency(policy, &scene.fixed, &moved, &contacts[0], &dir)?;
                ledger.push(SignedCrossing {
                    parameter: hi,
                    location: contacts[0].point,
                    sign: -sigma,
                    method: CrossingMethod::TangencyFormula,
                });
            }
            _ => return Err(Error::SimultaneousTangencies),
        }
        c_prev = c_hi;
        tau = hi;
    }

    // The script must actually finish the job: no residual crossings, a
    // real gap, and the moving front outside the fixed one.
    let end = dir * total;
    if c_prev != 0 {
        return Err(Error::NotSeparated);
    }
    if separation_floor(&mut grid, &mut scratch, &moving_pts, end) <= scene.min_feature {
        return Err(Error::NotSeparated);
    }
    if inside_polyline(&grid.segs, moving_pts[0] + end) {
        return Err(Error::NotSeparated);
    }
    Ok(ledger)
}

/// Margin scale for a two-sky scene: a quarter of the chronology slack,
/// kept inside sane bounds.
fn scene_margin(tau: f64, d: f64) -> f64 {
    ((tau - d) / 4.0).clamp(1e-3, 0.5)
}

fn front_samples(radius: f64, h: f64, floor: usize) -> usize {
    let ideal = (2.0 * PI * radius / (h / 8.0)).ceil();
    let ideal = if ideal.is_finite() { ideal as usize } else { 4096 };
    ideal.max(floor).max(16).min(4096)
}

/// Stages the two-sky scene for one chart pair: the earlier sky grown to
/// radius `tau + h`, the later one a circle of radius `h`, both outward on
/// the slice `h` above the later event, with a script that pushes the small
/// circle radially until the fronts are separated by several margins.
fn pair_scene(
    p: Vector2<f64>,
    v: Vector2<f64>,
    tau: f64,
    later_time: f64,
    floor: usize,
) -> Result<ChartScene> {
    let d = (v - p).norm();
    let h = scene_margin(tau, d);
    let slice = later_time + h;
    let fixed = circle_front(p, tau + h, front_samples(tau + h, h, floor), Coorientation::Outward, slice)?;
    let moving = circle_front(v, h, front_samples(h, h, floor), Coorientation::Outward, slice)?;
    let direction = if d > 1e-12 {
        (v - p) / d
    } else {
        Vector2::new(1.0, 0.0)
    };
    let distance = (tau + 6.0 * h - d).max(4.0 * h);
    Ok(ChartScene {
        fixed,
        moving,
        script: TranslationScript { direction, distance },
        min_feature: h,
    })
}

impl AlkEngine {
    /// Dangerous-tangency tally at the default scene resolution.
    pub fn alk_by_homotopy(&self, x: &Event, y: &Event) -> Result<AlkComputation> {
        self.alk_by_homotopy_with(x, y, 256)
    }

    /// `floor` is the minimum sample count per front; scenes with fine
    /// margins raise it on their own (capped at 4096).
    pub fn alk_by_homotopy_with(
        &self,
        x: &Event,
        y: &Event,
        floor: usize,
    ) -> Result<AlkComputation> {
        if floor < 16 {
            return Err(Error::TooFewSamples {
                need: 16,
                got: floor,
            });
        }
        self.reject_degenerate_pair(x, y)?;
        let (first, second, swapped) = if y.time < x.time {
            (y, x, true)
        } else {
            (x, y, false)
        };
        let tau = second.time - first.time;
        let surf = &self.st.surface;
        let p = surf.canonical_point(&first.point)?;
        let v = surf.canonical_point(&second.point)?;
        if tau == 0.0 {
            return Ok(AlkComputation {
                value: AlkValue::new(0, self.group),
                crossings: Vec::new(),
                swapped,
                perturbed: false,
            });
        }
        let crossings = match surf {
            SurfaceModel::FlatPlane => {
                let scene =
                    pair_scene(p.flat_coords()?, v.flat_coords()?, tau, second.time, floor)?;
                homotopy_scan(&self.st.policy, &scene)?
            }
            SurfaceModel::FlatTorus { periods } => {
                // The torus skies unroll to lattice families of circles in
                // the covering plane, and the sweeps of distinct images are
                // independent, so the value is the sum over images close
                // enough to interact. Farther images stay separated through
                // a receding script and would contribute nothing.
                let pc = p.flat_coords()?;
                let vc = pc + surf.chord(&p, &v)?.flat_components()?;
                let reach = tau + 2.0 * scene_margin(tau, 0.0) + 0.1;
                let margin = self.st.policy.lattice_margin as i64;
                let kx = (reach / periods[0] + 0.5).ceil() as i64 + margin;
                let ky = (reach / periods[1] + 0.5).ceil() as i64 + margin;
                let mut out = Vec::new();
                for i in -kx..=kx {
                    for j in -ky..=ky {
                        let image = vc
                            + Vector2::new(i as f64 * periods[0], j as f64 * periods[1]);
                        let d = (image - pc).norm();
                        if d > tau + 2.0 * scene_margin(tau, d) + 0.1 {
                            continue;
                        }
                        let scene = pair_scene(pc, image, tau, second.time, floor)?;
                        out.extend(homotopy_scan(&self.st.policy, &scene)?);
                    }
                }
                out
            }
            SurfaceModel::RoundSphere { .. } => {
                return Err(Error::ChartOverflow(
                    "sphere skies do not fit one flat chart; use the counting or \
                     intersection engine there"
                        .into(),
                ));
            }
        };
        let raw: i64 = crossings.iter().map(|c| i64::from(c.sign)).sum();
        Ok(AlkComputation {
            value: AlkValue::new(raw, self.group),
            crossings,
            swapped,
            perturbed: false,
        })
    }
}
