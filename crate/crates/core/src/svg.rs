//! SVG output for phase portraits and stability diagrams.
//!
//! Coordinates are written with a fixed number of decimals so that the same
//! input always produces byte-identical files.

use std::fmt::Write;

use crate::attractors::{AttractorKind, StabilityDiagram};
use crate::bifurcation::CurveKind;
use crate::equilibria::FixedPoint;
use crate::simplex::{to_triangle, SimplexState};

const SIZE: f64 = 600.0;
const MARGIN: f64 = 50.0;

const TRAJECTORY_COLORS: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

fn kind_color(kind: AttractorKind) -> &'static str {
    match kind {
        AttractorKind::InteriorFixedPoint => "#9ecae1",
        AttractorKind::LimitCycle => "#fdae6b",
        AttractorKind::BoundaryFixedPoint => "#a1d99b",
        AttractorKind::HeteroclinicLike => "#bcbddc",
        AttractorKind::Undetermined => "#d9d9d9",
    }
}

fn curve_color(kind: CurveKind) -> &'static str {
    match kind {
        CurveKind::Hopf => "#08519c",
        CurveKind::Transcritical => "#006d2c",
        CurveKind::SaddleConnection => "#54278f",
    }
}

fn header(out: &mut String, width: f64, height: f64) {
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w:.0}\" height=\"{h:.0}\" viewBox=\"0 0 {w:.0} {h:.0}\">",
        w = width,
        h = height
    );
    let _ = writeln!(out, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>");
}

/// Maps triangle coordinates to pixels with `Y` pointing up.
fn tri_px(state: &SimplexState) -> (f64, f64) {
    let (x, y) = to_triangle(state);
    let side = SIZE - 2.0 * MARGIN;
    let top = MARGIN + (SIZE - 2.0 * MARGIN - side * 3f64.sqrt() / 2.0) / 2.0;
    (MARGIN + x * side, top + (3f64.sqrt() / 2.0 - y) * side)
}

fn polyline(out: &mut String, pts: &[(f64, f64)], color: &str, width: f64) {
    if pts.len() < 2 {
        return;
    }
    let mut d = String::new();
    for (k, (x, y)) in pts.iter().enumerate() {
        if k > 0 {
            d.push(' ');
        }
        let _ = write!(d, "{:.3},{:.3}", x, y);
    }
    let _ = writeln!(
        out,
        "<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"{:.2}\"/>",
        d, color, width
    );
}

/// Phase portrait on the simplex: triangle outline, vertex labels, one
/// polyline per trajectory and a marker per fixed point (filled if stable).
pub fn phase_portrait(
    trajectories: &[Vec<SimplexState>],
    fixed_points: &[FixedPoint],
    title: &str,
) -> String {
    let mut out = String::new();
    header(&mut out, SIZE, SIZE);
    let vx = tri_px(&SimplexState::new(1.0, 0.0, 0.0));
    let vy = tri_px(&SimplexState::new(0.0, 1.0, 0.0));
    let vz = tri_px(&SimplexState::new(0.0, 0.0, 1.0));
    let _ = writeln!(
        out,
        "<polygon points=\"{:.3},{:.3} {:.3},{:.3} {:.3},{:.3}\" fill=\"none\" stroke=\"black\" stroke-width=\"1.50\"/>",
        vz.0, vz.1, vx.0, vx.1, vy.0, vy.1
    );
    for (label, (px, py), dx, dy) in [
        ("x", vx, 8.0, 16.0),
        ("y", vy, -4.0, -10.0),
        ("z", vz, -18.0, 16.0),
    ] {
        let _ = writeln!(
            out,
            "<text x=\"{:.3}\" y=\"{:.3}\" font-family=\"sans-serif\" font-size=\"16\">{}</text>",
            px + dx,
            py + dy,
            label
        );
    }
    for (k, traj) in trajectories.iter().enumerate() {
        let pts: Vec<_> = traj.iter().map(tri_px).collect();
        polyline(
            &mut out,
            &pts,
            TRAJECTORY_COLORS[k % TRAJECTORY_COLORS.len()],
            1.0,
        );
    }
    for fp in fixed_points {
        let (px, py) = tri_px(&fp.state);
        let fill = if fp.classification.is_stable() {
            "black"
        } else {
            "white"
        };
        let _ = writeln!(
            out,
            "<circle cx=\"{:.3}\" cy=\"{:.3}\" r=\"4\" fill=\"{}\" stroke=\"black\"/>",
            px, py, fill
        );
    }
    let _ = writeln!(
        out,
        "<text x=\"{:.3}\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">{}</text>",
        MARGIN,
        escape(title)
    );
    out.push_str("</svg>\n");
    out
}

/// Region colour map on the (ε, μ) grid with the bifurcation curves drawn on top.
pub fn stability_diagram(diagram: &StabilityDiagram) -> String {
    let legend_w = 190.0;
    let width = SIZE + legend_w;
    let plot = SIZE - 2.0 * MARGIN;
    let mut out = String::new();
    header(&mut out, width, SIZE);

    let eps = &diagram.epsilon_axis;
    let mus = &diagram.mu_axis;
    let (e0, e1) = (eps[0], eps[eps.len() - 1]);
    let (m0, m1) = (mus[0], mus[mus.len() - 1]);
    let cw = plot / eps.len() as f64;
    let ch = plot / mus.len() as f64;
    // grid points sit at cell centres
    let px = |e: f64| MARGIN + cw / 2.0 + (e - e0) / (e1 - e0) * (plot - cw);
    let py = |m: f64| SIZE - MARGIN - ch / 2.0 - (m - m0) / (m1 - m0) * (plot - ch);

    for (i, e) in eps.iter().enumerate() {
        for (j, m) in mus.iter().enumerate() {
            let _ = writeln!(
                out,
                "<rect x=\"{:.3}\" y=\"{:.3}\" width=\"{:.3}\" height=\"{:.3}\" fill=\"{}\" shape-rendering=\"crispEdges\"/>",
                px(*e) - cw / 2.0,
                py(*m) - ch / 2.0,
                cw,
                ch,
                kind_color(diagram.cells[i][j])
            );
        }
    }
    for curve in &diagram.overlay_curves {
        let pts: Vec<_> = curve
            .samples
            .iter()
            .filter(|(e, m)| *e >= e0 && *e <= e1 && *m >= m0 && *m <= m1)
            .map(|(e, m)| (px(*e), py(*m)))
            .collect();
        polyline(&mut out, &pts, curve_color(curve.kind), 2.0);
    }

    let _ = writeln!(
        out,
        "<rect x=\"{m:.3}\" y=\"{m:.3}\" width=\"{p:.3}\" height=\"{p:.3}\" fill=\"none\" stroke=\"black\"/>",
        m = MARGIN,
        p = plot
    );
    let text = |out: &mut String, x: f64, y: f64, anchor: &str, s: &str| {
        let _ = writeln!(
            out,
            "<text x=\"{:.3}\" y=\"{:.3}\" text-anchor=\"{}\" font-family=\"sans-serif\" font-size=\"12\">{}</text>",
            x,
            y,
            anchor,
            escape(s)
        );
    };
    text(
        &mut out,
        MARGIN,
        SIZE - MARGIN + 16.0,
        "middle",
        &format!("{}", e0),
    );
    text(
        &mut out,
        SIZE - MARGIN,
        SIZE - MARGIN + 16.0,
        "middle",
        &format!("{}", e1),
    );
    text(
        &mut out,
        SIZE / 2.0,
        SIZE - MARGIN + 32.0,
        "middle",
        "epsilon",
    );
    text(
        &mut out,
        MARGIN - 6.0,
        SIZE - MARGIN,
        "end",
        &format!("{}", m0),
    );
    text(
        &mut out,
        MARGIN - 6.0,
        MARGIN + 10.0,
        "end",
        &format!("{}", m1),
    );
    text(&mut out, MARGIN - 6.0, SIZE / 2.0, "end", "mu");
    text(
        &mut out,
        MARGIN,
        24.0,
        "start",
        &format!("pattern {}", diagram.pattern),
    );

    let mut y = MARGIN + 10.0;
    let lx = SIZE + 10.0;
    for kind in [
        AttractorKind::InteriorFixedPoint,
        AttractorKind::LimitCycle,
        AttractorKind::BoundaryFixedPoint,
        AttractorKind::HeteroclinicLike,
        AttractorKind::Undetermined,
    ] {
        let _ = writeln!(
            out,
            "<rect x=\"{:.3}\" y=\"{:.3}\" width=\"14\" height=\"14\" fill=\"{}\"/>",
            lx,
            y - 11.0,
            kind_color(kind)
        );
        text(&mut out, lx + 20.0, y, "start", kind.as_str());
        y += 22.0;
    }
    for curve in &diagram.overlay_curves {
        polyline(
            &mut out,
            &[(lx, y - 4.0), (lx + 14.0, y - 4.0)],
            curve_color(curve.kind),
            2.0,
        );
        text(&mut out, lx + 20.0, y, "start", curve.kind.as_str());
        y += 22.0;
    }
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
