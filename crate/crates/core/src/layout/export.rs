//! JSON and SVG output for layouts.

use std::fmt::Write as _;
use std::path::Path;

use serde_json::{json, Value};

use super::{hyperbolic_circle_image, LayoutError, LayoutModel, LayoutResult, PlanarCircle, Point};

fn pt(p: Point) -> Value {
    json!([p.re, p.im])
}

/// JSON form of a layout.
pub fn layout_json(l: &LayoutResult) -> Value {
    let circles: Vec<Value> = l
        .circles
        .iter()
        .map(|c| match c.shape {
            PlanarCircle::Disk { center, radius } => {
                json!({"face": c.face.0, "center": pt(center), "radius": radius})
            }
            PlanarCircle::Line { point, direction } => json!({
                "face": c.face.0,
                "type": "line",
                "line": {"point": pt(point), "direction": pt(direction)}
            }),
        })
        .collect();
    let vertices: Vec<Value> = l.vertices.iter().map(|v| v.map_or(Value::Null, pt)).collect();
    let kites: Vec<Value> = l
        .kites
        .iter()
        .map(|k| json!({"edge": k.edge.0, "corners": k.corners.iter().map(|&p| pt(p)).collect::<Vec<_>>()}))
        .collect();
    json!({
        "model": l.model,
        "circles": circles,
        "vertices": vertices,
        "kites": kites,
        "periods": l.periods.map(|[a, b]| json!([pt(a), pt(b)])),
        "closure_residual": l.closure_residual,
        "side_residual": l.side_residual,
        "vertex_angle_defect": l.vertex_angle_defect,
        "face_angle_defect": l.face_angle_defect,
        "closed_up": l.closed_up,
    })
}

fn write_file(path: &Path, text: &str) -> Result<(), LayoutError> {
    std::fs::write(path, text)
        .map_err(|source| LayoutError::Io { path: path.display().to_string(), source })
}

pub fn export_json(l: &LayoutResult, path: &Path) -> Result<(), LayoutError> {
    let text = crate::json::to_string(&layout_json(l)).expect("layout JSON is serializable");
    write_file(path, &text)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SvgOptions {
    pub kites: bool,
}

/// Nine significant digits, plain decimal notation.
fn num(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return "0".into();
    }
    let mag = x.abs().log10().floor() as i32;
    let decimals = (8 - mag).clamp(0, 30) as usize;
    let s = format!("{x:.decimals$}");
    let s = if s.contains('.') { s.trim_end_matches('0').trim_end_matches('.').to_string() } else { s };
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}

/// Deterministic SVG rendering with y pointing up.
pub fn svg_document(l: &LayoutResult, opts: &SvgOptions) -> String {
    let disks: Vec<(Point, f64)> = l
        .circles
        .iter()
        .filter_map(|c| match c.shape {
            PlanarCircle::Disk { center, radius } => Some(match l.model {
                LayoutModel::Euclidean => (center, radius),
                LayoutModel::Poincare => hyperbolic_circle_image(center, radius),
            }),
            PlanarCircle::Line { .. } => None,
        })
        .collect();
    let (mut x0, mut y0, mut x1, mut y1) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    let mut grow = |p: Point, r: f64| {
        x0 = x0.min(p.re - r);
        y0 = y0.min(p.im - r);
        x1 = x1.max(p.re + r);
        y1 = y1.max(p.im + r);
    };
    for &(c, r) in &disks {
        grow(c, r);
    }
    for p in l.vertices.iter().flatten() {
        grow(*p, 0.0);
    }
    if l.model == LayoutModel::Poincare {
        grow(Point::new(0.0, 0.0), 1.0);
    }
    if !x0.is_finite() {
        (x0, y0, x1, y1) = (-1.0, -1.0, 1.0, 1.0);
    }
    let span = (x1 - x0).max(y1 - y0).max(1e-9);
    let margin = 0.05 * span;
    let (x0, y0, w, h) = (x0 - margin, y0 - margin, x1 - x0 + 2.0 * margin, y1 - y0 + 2.0 * margin);
    let stroke = num(span / 500.0);
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" viewBox=\"{} {} {} {}\">",
        num(x0),
        num(-(y0 + h)),
        num(w),
        num(h)
    );
    let _ = writeln!(out, "<g transform=\"scale(1,-1)\" fill=\"none\" stroke=\"black\" stroke-width=\"{stroke}\">");
    if l.model == LayoutModel::Poincare {
        let _ = writeln!(out, "<circle cx=\"0\" cy=\"0\" r=\"1\" stroke=\"gray\"/>");
    }
    if opts.kites {
        for k in &l.kites {
            let pts: Vec<String> = k.corners.iter().map(|p| format!("{},{}", num(p.re), num(p.im))).collect();
            let _ = writeln!(out, "<polygon points=\"{}\" stroke=\"steelblue\"/>", pts.join(" "));
        }
    }
    for &(c, r) in &disks {
        let _ = writeln!(out, "<circle cx=\"{}\" cy=\"{}\" r=\"{}\"/>", num(c.re), num(c.im), num(r));
    }
    let reach = 2.0 * span;
    for c in &l.circles {
        if let PlanarCircle::Line { point, direction } = c.shape {
            let d = direction.unscale(direction.norm()) * reach;
            let (a, b) = (point - d, point + d);
            let _ = writeln!(
                out,
                "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\"/>",
                num(a.re),
                num(a.im),
                num(b.re),
                num(b.im)
            );
        }
    }
    if let Some([a, b]) = l.periods {
        let o = l.vertices.iter().flatten().next().copied().unwrap_or_default();
        let corners = [o, o + a, o + a + b, o + b];
        let pts: Vec<String> = corners.iter().map(|p| format!("{},{}", num(p.re), num(p.im))).collect();
        let _ = writeln!(out, "<polygon points=\"{}\" stroke=\"firebrick\" stroke-dasharray=\"{}\"/>", pts.join(" "), num(4.0 * span / 500.0));
    }
    let dot = num(span / 200.0);
    for p in l.vertices.iter().flatten() {
        let _ = writeln!(out, "<circle cx=\"{}\" cy=\"{}\" r=\"{dot}\" fill=\"black\" stroke=\"none\"/>", num(p.re), num(p.im));
    }
    out.push_str("</g>\n</svg>\n");
    out
}

pub fn export_svg(l: &LayoutResult, path: &Path, opts: &SvgOptions) -> Result<(), LayoutError> {
    write_file(path, &svg_document(l, opts))
}

#[cfg(test)]
mod tests {
    use super::super::{FaceCircle, LayoutModel};
    use super::*;
    use crate::surface::FaceId;

    fn empty() -> LayoutResult {
        LayoutResult {
            model: LayoutModel::Euclidean,
            circles: vec![],
            vertices: vec![],
            kites: vec![],
            closure_residual: 0.0,
            side_residual: 0.0,
            vertex_angle_defect: 0.0,
            face_angle_defect: 0.0,
            periods: None,
            diameter: 0.0,
            closed_up: true,
        }
    }

    #[test]
    fn number_format() {
        assert_eq!(num(1.0), "1");
        assert_eq!(num(-0.5), "-0.5");
        assert_eq!(num(std::f64::consts::PI), "3.14159265");
        assert_eq!(num(1234.5678912345), "1234.56789");
        assert_eq!(num(0.0), "0");
    }

    #[test]
    fn empty_layout_is_valid_svg() {
        let s = svg_document(&empty(), &SvgOptions::default());
        assert!(s.starts_with("<?xml") && s.trim_end().ends_with("</svg>"));
        assert!(!s.contains("<circle"));
    }

    #[test]
    fn line_circles_are_lines() {
        let mut l = empty();
        l.circles.push(FaceCircle {
            face: FaceId(0),
            shape: PlanarCircle::Line { point: Point::new(0.0, 1.0), direction: Point::new(1.0, 0.0) },
        });
        l.circles.push(FaceCircle {
            face: FaceId(1),
            shape: PlanarCircle::Disk { center: Point::new(0.0, 0.0), radius: 1.0 },
        });
        let s = svg_document(&l, &SvgOptions::default());
        assert_eq!(s.matches("<line").count(), 1);
        let j = layout_json(&l);
        assert_eq!(j["circles"][0]["type"], "line");
        assert_eq!(j["circles"][1]["radius"], 1.0);
    }
}
