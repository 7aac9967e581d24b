use crate::error::Result;
use crate::surface::SurfaceModel;
use crate::wavefront::front::Front;

/// Serializes a front as CSV: `s,px,py,nx,ny,t`, one row per sample, 12
/// significant digits. Positions and conormals are chart values, so sphere
/// fronts export as latitude/longitude pairs.
pub fn front_to_csv(model: &SurfaceModel, front: &Front) -> Result<String> {
    let mut out = String::from("s,px,py,nx,ny,t\n");
    for r in &front.samples {
        let [px, py] = model.chart_of(&r.point)?;
        let [nx, ny] = model.tangent_to_chart(&r.conormal)?;
        out.push_str(&format!(
            "{:.11e},{:.11e},{:.11e},{:.11e},{:.11e},{:.11e}\n",
            r.s, px, py, nx, ny, front.slice_time
        ));
    }
    Ok(out)
}

/// Renders a front as a standalone SVG: the front polyline (split where the
/// chart wraps), conormal ticks every few samples, and a time label.
pub fn front_to_svg(model: &SurfaceModel, front: &Front) -> Result<String> {
    let pts: Vec<[f64; 2]> = front
        .samples
        .iter()
        .map(|r| model.chart_of(&r.point))
        .collect::<Result<Vec<_>>>()?;
    let cons: Vec<[f64; 2]> = front
        .samples
        .iter()
        .map(|r| model.tangent_to_chart(&r.conormal))
        .collect::<Result<Vec<_>>>()?;
    let n = pts.len();

    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in &pts {
        for a in 0..2 {
            lo[a] = lo[a].min(p[a]);
            hi[a] = hi[a].max(p[a]);
        }
    }
    let span = ((hi[0] - lo[0]).max(hi[1] - lo[1])).max(1e-9);
    let margin = 0.1 * span;
    let scale = 720.0 / (span + 2.0 * margin);
    let to_px = |p: [f64; 2]| {
        [
            (p[0] - lo[0] + margin) * scale + 40.0,
            // Flip the vertical axis: chart y up, SVG y down.
            (hi[1] - p[1] + margin) * scale + 40.0,
        ]
    };
    let w = (hi[0] - lo[0] + 2.0 * margin) * scale + 80.0;
    let h = (hi[1] - lo[1] + 2.0 * margin) * scale + 80.0;

    // Chart wrap (torus seam, longitude jump) shows as an outsized gap;
    // split the polyline there instead of drawing a spurious chord.
    let mut gaps: Vec<f64> = (0..n)
        .map(|i| {
            let a = pts[i];
            let b = pts[(i + 1) % n];
            (a[0] - b[0]).hypot(a[1] - b[1])
        })
        .collect();
    let mut sorted = gaps.clone();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[n / 2].max(1e-12);
    gaps.push(gaps[0]);

    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w:.0}\" height=\"{h:.0}\" \
         viewBox=\"0 0 {w:.0} {h:.0}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    );
    let mut run: Vec<String> = Vec::new();
    let flush = |run: &mut Vec<String>, svg: &mut String| {
        if run.len() >= 2 {
            svg.push_str(&format!(
                "<polyline fill=\"none\" stroke=\"#1f4e9c\" stroke-width=\"1.5\" points=\"{}\"/>\n",
                run.join(" ")
            ));
        }
        run.clear();
    };
    for i in 0..n {
        let [x, y] = to_px(pts[i]);
        run.push(format!("{x:.3},{y:.3}"));
        if gaps[i] > 3.0 * median + 1e-12 {
            flush(&mut run, &mut svg);
        }
    }
    // Close the loop visually when the wraparound gap is ordinary.
    if gaps[n - 1] <= 3.0 * median + 1e-12 && !run.is_empty() {
        let [x, y] = to_px(pts[0]);
        run.push(format!("{x:.3},{y:.3}"));
    }
    flush(&mut run, &mut svg);

    let every = (n / 64).max(1);
    let tick = 0.05 * span * scale;
    for i in (0..n).step_by(every) {
        let c = cons[i];
        let norm = c[0].hypot(c[1]).max(1e-12);
        let [x, y] = to_px(pts[i]);
        let dx = c[0] / norm * tick;
        let dy = -c[1] / norm * tick;
        svg.push_str(&format!(
            "<line x1=\"{x:.3}\" y1=\"{y:.3}\" x2=\"{:.3}\" y2=\"{:.3}\" \
             stroke=\"#c23b22\" stroke-width=\"1\"/>\n",
            x + dx,
            y + dy
        ));
    }
    svg.push_str(&format!(
        "<text x=\"12\" y=\"24\" font-family=\"monospace\" font-size=\"14\">slice t = {:.6}</text>\n",
        front.slice_time
    ));
    svg.push_str("</svg>\n");
    Ok(svg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spacetime::{Event, StaticSpacetime};
    use crate::surface::SurfacePoint;
    use crate::wavefront::front::propagate_front;

    #[test]
    fn csv_schema_and_precision() {
        let st = StaticSpacetime::new(SurfaceModel::FlatPlane);
        let x = Event::new(SurfacePoint::flat(0.0, 0.0), 0.0);
        let f = propagate_front(&st, &x, 1.0, 32).unwrap();
        let csv = front_to_csv(&st.surface, &f).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 33);
        assert_eq!(lines[0], "s,px,py,nx,ny,t");
        for line in &lines[1..] {
            let fields: Vec<&str> = line.split(',').collect();
            assert_eq!(fields.len(), 6);
            for field in fields {
                field.parse::<f64>().expect("numeric field");
            }
        }
        // First sample sits at s = 0 on the unit circle: 12 significant
        // digits in scientific notation.
        assert_eq!(
            lines[1],
            "0.00000000000e0,1.00000000000e0,0.00000000000e0,\
             1.00000000000e0,0.00000000000e0,1.00000000000e0"
        );
        assert!(csv.ends_with('\n'));
    }

    #[test]
    fn csv_works_in_every_chart() {
        for model in crate::testutil::all_models() {
            let st = StaticSpacetime::new(model.clone());
            let p = match &model {
                SurfaceModel::RoundSphere { .. } => {
                    SurfacePoint::sphere(nalgebra::Vector3::new(0.3, -0.8, 0.5)).unwrap()
                }
                _ => SurfacePoint::flat(0.25, 0.5),
            };
            let f = propagate_front(&st, &Event::new(p, 0.0), 0.8, 32).unwrap();
            let csv = front_to_csv(&model, &f).unwrap();
            assert_eq!(csv.lines().count(), 33);
        }
    }

    #[test]
    fn svg_draws_polyline_and_ticks() {
        let st = StaticSpacetime::new(SurfaceModel::FlatPlane);
        let x = Event::new(SurfacePoint::flat(0.0, 0.0), 0.0);
        let f = propagate_front(&st, &x, 1.0, 128).unwrap();
        let svg = front_to_svg(&st.surface, &f).unwrap();
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("<polyline"));
        assert!(svg.contains("<line"));
        assert!(svg.contains("slice t ="));
        assert!(svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn svg_splits_the_polyline_at_torus_wrap_seams() {
        let model = SurfaceModel::flat_torus(1.0, 1.0).unwrap();
        let st = StaticSpacetime::new(model.clone());
        let x = Event::new(SurfacePoint::flat(0.5, 0.5), 0.0);
        let f = propagate_front(&st, &x, 0.9, 128).unwrap();
        let svg = front_to_svg(&model, &f).unwrap();
        assert!(svg.matches("<polyline").count() >= 2, "wrapped front should split");
    }
}
