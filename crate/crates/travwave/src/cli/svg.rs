//! Hand-written SVG phase portraits on the Poincaré disk.

use std::fmt::Write as _;

use crate::compactify::{chart_to_disk, to_disk, DiskPoint};
use crate::equilibria::{Equilibrium, StabilityClass};

/// Half-width of the drawing in pixels; the disk has radius `SCALE`.
const SCALE: f64 = 200.0;
const MARGIN: f64 = 40.0;
/// Polylines are thinned to at most this many vertices.
const MAX_VERTICES: usize = 1500;

fn px(d: DiskPoint) -> (f64, f64) {
    (MARGIN + SCALE * (1.0 + d.y1), MARGIN + SCALE * (1.0 - d.y2))
}

/// Disk location of an equilibrium.
pub fn equilibrium_disk(e: &Equilibrium) -> DiskPoint {
    match (e.phase_point(), e.chart_point()) {
        (Some(pt), _) => to_disk(pt),
        (None, Some(cp)) => chart_to_disk(cp),
        (None, None) => DiskPoint { y1: 0.0, y2: 0.0 },
    }
}

fn polyline(out: &mut String, pts: &[DiskPoint], style: &str) {
    if pts.len() < 2 {
        return;
    }
    let stride = pts.len().div_ceil(MAX_VERTICES);
    let mut d = String::new();
    let mut idx: Vec<usize> = (0..pts.len()).step_by(stride).collect();
    if *idx.last().unwrap() != pts.len() - 1 {
        idx.push(pts.len() - 1);
    }
    for (n, &i) in idx.iter().enumerate() {
        let (x, y) = px(pts[i]);
        let _ = write!(d, "{}{:.2},{:.2}", if n == 0 { "M" } else { " L" }, x, y);
    }
    let _ = writeln!(out, r#"<path d="{d}" {style}/>"#);
}

fn glyph(out: &mut String, e: &Equilibrium) {
    let (x, y) = px(equilibrium_disk(e));
    match e.klass {
        StabilityClass::Source => {
            let _ = writeln!(out, r#"<circle cx="{x:.2}" cy="{y:.2}" r="6" fill="white" stroke="black" stroke-width="1.5"/>"#);
        }
        StabilityClass::Sink | StabilityClass::StableNode | StabilityClass::StableFocus => {
            let _ = writeln!(out, r#"<circle cx="{x:.2}" cy="{y:.2}" r="6" fill="black"/>"#);
        }
        StabilityClass::Saddle => {
            let _ = writeln!(
                out,
                r#"<rect x="{:.2}" y="{:.2}" width="10" height="10" fill="white" stroke="black" stroke-width="1.5" transform="rotate(45 {x:.2} {y:.2})"/>"#,
                x - 5.0,
                y - 5.0
            );
        }
        StabilityClass::CenterManifold => {
            let _ = writeln!(
                out,
                r#"<path d="M{:.2},{:.2} L{:.2},{:.2} L{:.2},{:.2} Z" fill="gray" stroke="black"/>"#,
                x,
                y - 7.0,
                x - 6.0,
                y + 5.0,
                x + 6.0,
                y + 5.0
            );
        }
    }
    let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" font-size="12" font-family="sans-serif">{}</text>"#, x + 8.0, y - 8.0, e.id.name());
}

/// Portrait with the boundary circle, the sampled orbits in grey, the
/// census witnesses in colour and one glyph per equilibrium.
pub fn portrait(title: &str, equilibria: &[Equilibrium], orbits: &[Vec<DiskPoint>], witnesses: &[(String, Vec<DiskPoint>)]) -> String {
    let size = 2.0 * (SCALE + MARGIN);
    let (cx, cy) = (MARGIN + SCALE, MARGIN + SCALE);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{}" viewBox="0 0 {size} {}">"#,
        size + 60.0,
        size + 60.0
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="10" y="20" font-size="14" font-family="sans-serif">{title}</text>"#);
    let _ = writeln!(s, r#"<circle cx="{cx}" cy="{cy}" r="{SCALE}" fill="none" stroke="black" stroke-width="1.5"/>"#);
    let _ = writeln!(
        s,
        r#"<line x1="{cx}" y1="{}" x2="{cx}" y2="{}" stroke="black" stroke-width="0.5" stroke-dasharray="4 3"/>"#,
        MARGIN,
        MARGIN + 2.0 * SCALE
    );
    let _ = writeln!(
        s,
        r#"<line x1="{}" y1="{cy}" x2="{}" y2="{cy}" stroke="black" stroke-width="0.5" stroke-dasharray="4 3"/>"#,
        MARGIN,
        MARGIN + 2.0 * SCALE
    );
    for o in orbits {
        polyline(&mut s, o, r##"fill="none" stroke="#999999" stroke-width="0.7""##);
    }
    const COLOURS: [&str; 6] = ["#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];
    for (i, (label, w)) in witnesses.iter().enumerate() {
        let col = COLOURS[i % COLOURS.len()];
        polyline(&mut s, w, &format!(r#"fill="none" stroke="{col}" stroke-width="2""#));
        let _ = writeln!(
            s,
            r#"<text x="10" y="{:.0}" font-size="12" font-family="sans-serif" fill="{col}">{label}</text>"#,
            size + 15.0 * (i as f64 % 4.0) + 5.0
        );
    }
    for e in equilibria {
        glyph(&mut s, e);
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.0}" y="{:.0}" font-size="11" font-family="sans-serif">white: source, black: sink, diamond: saddle, triangle: centre manifold</text>"#,
        size - 420.0,
        size + 50.0
    );
    s.push_str("</svg>\n");
    s
}
