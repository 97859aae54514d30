//! SVG plot of a triangulation in the equirectangular plane.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::geometry::{Direction, EnclosingTriangle, Triangulation};

const SCALE: f64 = 2.0;
const MARGIN: f64 = 20.0;

fn xy(d: Direction) -> (f64, f64) {
    (MARGIN + d.azimuth() * SCALE, MARGIN + (90.0 - d.elevation()) * SCALE)
}

/// Renders points, identity-frame edges, the query and the enclosing
/// triangle. `highlight` lists vertices to mark, such as the single point
/// of a snapped plan.
pub fn triangulation_svg(
    t: &Triangulation,
    query: Direction,
    enclosing: Option<&EnclosingTriangle>,
    highlight: &[usize],
) -> String {
    let (w, h) = (360.0 * SCALE + 2.0 * MARGIN, 180.0 * SCALE + 2.0 * MARGIN);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(
        s,
        "<style>.edge{{stroke:#888;stroke-width:0.6}}.point{{fill:#1f4e9c}}.enclosing{{fill:#f5a623;fill-opacity:0.45;stroke:#c0392b;stroke-width:1.5}}.query{{fill:#c0392b}}.highlight{{fill:none;stroke:#c0392b;stroke-width:2}}</style>"
    );
    let _ = writeln!(
        s,
        r##"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="#ccc"/>"##,
        360.0 * SCALE,
        180.0 * SCALE
    );

    let v = t.vertices();
    if let Some(e) = enclosing {
        let pts: Vec<String> = e.vertex_indices.iter().map(|&i| {
            let (x, y) = xy(v[i]);
            format!("{x:.2},{y:.2}")
        }).collect();
        let ids: Vec<String> = e.vertex_indices.iter().map(|i| i.to_string()).collect();
        let _ = writeln!(
            s,
            r#"<polygon class="enclosing" data-vertices="{}" data-rotated-azimuth="{}" data-rotated-elevation="{}" points="{}"/>"#,
            ids.join(" "),
            e.rotated_azimuth,
            e.rotated_elevation,
            pts.join(" ")
        );
    }

    let mut edges = BTreeSet::new();
    for tri in t.triangles() {
        for k in 0..3 {
            let (a, b) = (tri[k], tri[(k + 1) % 3]);
            edges.insert((a.min(b), a.max(b)));
        }
    }
    for (a, b) in edges {
        let ((x1, y1), (x2, y2)) = (xy(v[a]), xy(v[b]));
        let _ = writeln!(s, r#"<line class="edge" x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}"/>"#);
    }
    for (i, &d) in v.iter().enumerate() {
        let (x, y) = xy(d);
        let _ = writeln!(
            s,
            r#"<circle class="point" data-index="{i}" cx="{x:.2}" cy="{y:.2}" r="3"><title>#{i} {d}</title></circle>"#
        );
    }
    for &i in highlight {
        let (x, y) = xy(v[i]);
        let _ = writeln!(s, r#"<circle class="highlight" data-index="{i}" cx="{x:.2}" cy="{y:.2}" r="7"/>"#);
    }
    let (x, y) = xy(query);
    let _ = writeln!(s, r#"<circle class="query" cx="{x:.2}" cy="{y:.2}" r="4"><title>query {query}</title></circle>"#);
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_triangulation, find_enclosing_triangle, lebedev::lebedev50};

    #[test]
    fn plot_has_every_element() {
        let t = build_triangulation(&lebedev50()).unwrap();
        let q = Direction::new(77.0, 33.0).unwrap();
        let e = find_enclosing_triangle(&t, q).unwrap();
        let svg = triangulation_svg(&t, q, Some(&e), &e.vertex_indices);
        assert_eq!(svg.matches(r#"class="point""#).count(), 50);
        assert_eq!(svg.matches(r#"class="enclosing""#).count(), 1);
        assert_eq!(svg.matches(r#"class="query""#).count(), 1);
        assert_eq!(svg.matches(r#"class="highlight""#).count(), 3);
        assert!(svg.matches(r#"class="edge""#).count() >= 50);
    }
}
