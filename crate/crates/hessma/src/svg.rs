//! Plain SVG renderings for inspection: subdifferential cells in dim 2 and
//! function graphs in dim 1.

use std::fmt::Write;

use hessma_core::ma_measure::CellGeometry;
use hessma_core::{GridFunction, SubdiffCell};

const SIZE: f64 = 480.0;
const PAD: f64 = 24.0;

fn bbox(points: impl Iterator<Item = (f64, f64)>) -> (f64, f64, f64, f64) {
    points.fold((f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY), |(a, b, c, d), (x, y)| {
        (a.min(x), b.min(y), c.max(x), d.max(y))
    })
}

/// Polygons of the 2D cells in slope space, one colour per site.
pub fn cells_svg(cells: &[SubdiffCell]) -> String {
    let polys: Vec<(usize, Vec<(f64, f64)>)> = cells
        .iter()
        .filter_map(|c| match &c.geometry {
            CellGeometry::Polygon(v) if !v.is_empty() => Some((c.site, v.iter().map(|p| (p[0], p[1])).collect())),
            _ => None,
        })
        .collect();
    let (x0, y0, x1, y1) = bbox(polys.iter().flat_map(|(_, v)| v.iter().copied()));
    let scale = if x1 > x0 && y1 > y0 { (SIZE - 2.0 * PAD) / (x1 - x0).max(y1 - y0) } else { 1.0 };
    let tx = |x: f64| PAD + (x - x0) * scale;
    // SVG y grows downwards.
    let ty = |y: f64| SIZE - PAD - (y - y0) * scale;
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#);
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (k, (site, v)) in polys.iter().enumerate() {
        let hue = (k * 137) % 360;
        let pts: Vec<String> = v.iter().map(|(x, y)| format!("{:.3},{:.3}", tx(*x), ty(*y))).collect();
        let _ = writeln!(
            s,
            r#"<polygon class="cell" data-site="{site}" points="{}" fill="hsl({hue},60%,75%)" stroke="black" stroke-width="1"/>"#,
            pts.join(" ")
        );
        let n = v.len() as f64;
        let (cx, cy) = v.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x / n, b + y / n));
        let _ = writeln!(
            s,
            r#"<text x="{:.3}" y="{:.3}" font-size="14" text-anchor="middle">{site}</text>"#,
            tx(cx),
            ty(cy)
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Graph of a 1D grid function over the fundamental domain.
pub fn graph_svg(g: &GridFunction) -> String {
    assert_eq!(g.dim(), 1, "graph_svg draws 1D functions");
    let pts: Vec<(f64, f64)> = GridFunction::nodes(1, g.resolution()).zip(g.values()).map(|(x, v)| (x[0], *v)).collect();
    let (_, lo, _, hi) = bbox(pts.iter().copied());
    let span = if hi > lo { hi - lo } else { 1.0 };
    let tx = |x: f64| PAD + (x + 0.5) * (SIZE - 2.0 * PAD);
    let ty = |y: f64| SIZE - PAD - (y - lo) / span * (SIZE - 2.0 * PAD);
    let line: Vec<String> = pts.iter().map(|(x, y)| format!("{:.3},{:.3}", tx(*x), ty(*y))).collect();
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#);
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="black" stroke-width="1.5"/>"#, line.join(" "));
    let _ = writeln!(s, r#"<text x="{PAD}" y="{:.0}" font-size="12">min {lo:.6}  max {hi:.6}</text>"#, PAD - 6.0);
    s.push_str("</svg>\n");
    s
}
