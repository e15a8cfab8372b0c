//! Plain SVG 1.1 output for deployments and sweep curves.

use std::fmt::Write;

use vine_nav::kinematics::TraceEvent;
use vine_nav::{DeploymentTrace, MapModel, Vec2};

fn pt(p: Vec2) -> String {
    format!("{:.6},{:.6}", p.x, -p.y)
}

fn cross(d: &mut String, p: Vec2, r: f64) {
    let _ = write!(
        d,
        "M{} L{} M{} L{} ",
        pt(p - Vec2::new(r, 0.0)),
        pt(p + Vec2::new(r, 0.0)),
        pt(p - Vec2::new(0.0, r)),
        pt(p + Vec2::new(0.0, r))
    );
}

fn polyline(d: &mut String, pts: &[Vec2]) {
    for (i, p) in pts.iter().enumerate() {
        let _ = write!(d, "{}{} ", if i == 0 { "M" } else { "L" }, pt(*p));
    }
}

fn extent(map: &MapModel, trace: &DeploymentTrace) -> (Vec2, Vec2) {
    if let Some(b) = map.bounds {
        return (b.min, b.max);
    }
    let pts = map
        .obstacles
        .iter()
        .flat_map(|o| o.vertices().iter().copied())
        .chain(trace.tip_path.iter().map(|s| s.point))
        .chain([map.start, map.goal]);
    let (mut lo, mut hi) = (map.start, map.start);
    for p in pts {
        lo = Vec2::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Vec2::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    let pad = ((hi - lo).norm() * 0.05).max(0.05);
    (lo - Vec2::new(pad, pad), hi + Vec2::new(pad, pad))
}

/// Map, goal disk, final pivots and one `<path>` per event kind present in the trace.
pub fn deployment(map: &MapModel, trace: &DeploymentTrace) -> String {
    let (lo, hi) = extent(map, trace);
    let size = hi - lo;
    let stroke = size.norm() / 500.0;
    let mark = stroke * 4.0;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" viewBox="{:.6} {:.6} {:.6} {:.6}" width="800" height="{:.0}">"#,
        lo.x,
        -hi.y,
        size.x,
        size.y,
        800.0 * size.y / size.x
    );
    for o in &map.obstacles {
        let pts: Vec<String> = o.vertices().iter().map(|v| pt(*v)).collect();
        let _ = writeln!(out, r##"<polygon class="obstacle" points="{}" fill="#888" stroke="none"/>"##, pts.join(" "));
    }
    let _ = writeln!(
        out,
        r##"<circle class="goal" cx="{:.6}" cy="{:.6}" r="{:.6}" fill="#d33" fill-opacity="0.3"/>"##,
        map.goal.x, -map.goal.y, map.success_radius
    );
    let _ = writeln!(
        out,
        r##"<circle class="start" cx="{:.6}" cy="{:.6}" r="{:.6}" fill="#2aa"/>"##,
        map.start.x, -map.start.y, mark
    );
    let mut kinds: Vec<&str> = Vec::new();
    for e in &trace.events {
        if !kinds.contains(&e.kind()) {
            kinds.push(e.kind());
        }
    }
    for kind in kinds {
        let mut d = String::new();
        for e in trace.events.iter().filter(|e| e.kind() == kind) {
            match e {
                TraceEvent::FreeGrowth { from, to } => polyline(&mut d, &[*from, *to]),
                TraceEvent::Slide { path, .. } => polyline(&mut d, path),
                TraceEvent::TurnEverted { at, .. } => cross(&mut d, *at, mark),
                TraceEvent::ContactStart { hit, .. } => cross(&mut d, hit.point, mark),
                TraceEvent::ContactEnd { pivot, .. }
                | TraceEvent::GlancingContact { pivot, .. }
                | TraceEvent::PivotRemoved { pivot, .. } => cross(&mut d, pivot.position, mark),
                TraceEvent::Terminated { .. } => cross(&mut d, trace.final_tip(), mark),
            }
        }
        let color = match kind {
            "free_growth" => "#1565c0",
            "slide" => "#0d47a1",
            _ => "#e65100",
        };
        let _ = writeln!(
            out,
            r#"<path class="{kind}" d="{}" fill="none" stroke="{color}" stroke-width="{:.6}"/>"#,
            d.trim_end(),
            stroke
        );
    }
    for p in &trace.final_state.pivots {
        let _ = writeln!(
            out,
            r##"<circle class="pivot" cx="{:.6}" cy="{:.6}" r="{:.6}" fill="#111"/>"##,
            p.position.x,
            -p.position.y,
            mark * 0.6
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Line plot of `ys` in [0, 1] against `xs`.
pub fn curve(xs: &[f64], ys: &[f64], x_label: &str, y_label: &str) -> String {
    let (w, h, m) = (640.0, 400.0, 50.0);
    let (x0, x1) = xs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    let span = if x1 > x0 { x1 - x0 } else { 1.0 };
    let px = |x: f64| m + (x - x0) / span * (w - 2.0 * m);
    let py = |y: f64| h - m - y.clamp(0.0, 1.0) * (h - 2.0 * m);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" viewBox="0 0 {w} {h}" width="{w}" height="{h}">"#
    );
    let _ = writeln!(
        out,
        r#"<path class="axes" d="M{m},{} L{m},{} L{},{}" fill="none" stroke="black"/>"#,
        py(1.0),
        py(0.0),
        w - m,
        py(0.0)
    );
    let pts: Vec<String> = xs.iter().zip(ys).map(|(&x, &y)| format!("{:.3},{:.3}", px(x), py(y))).collect();
    let _ = writeln!(out, r##"<polyline class="curve" points="{}" fill="none" stroke="#1565c0"/>"##, pts.join(" "));
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">{x_label}</text>"#, w / 2.0, h - 10.0);
    let _ = writeln!(
        out,
        r#"<text x="15" y="{}" text-anchor="middle" transform="rotate(-90 15 {})">{y_label}</text>"#,
        h / 2.0,
        h / 2.0
    );
    let _ = writeln!(out, r#"<text x="{m}" y="{}" text-anchor="middle">{x0:.3}</text>"#, h - m + 16.0);
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">{x1:.3}</text>"#, w - m, h - m + 16.0);
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="end">1</text>"#, m - 4.0, py(1.0) + 4.0);
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="end">0</text>"#, m - 4.0, py(0.0) + 4.0);
    out.push_str("</svg>\n");
    out
}
