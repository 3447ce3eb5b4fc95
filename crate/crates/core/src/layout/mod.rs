//! Geometric realization of a solved pattern. Each edge contributes a kite
//! (two circle centers and two intersection points); kites are glued along a
//! breadth-first search in the Euclidean plane or the Poincare disk.

mod export;
pub(crate) mod model;

pub use export::{export_json, export_svg, layout_json, svg_document, SvgOptions};
pub use model::{from_origin, hyperbolic_circle_image, to_origin, Point};

use std::collections::VecDeque;
use std::f64::consts::PI;

use log::debug;
use nalgebra::Complex;
use serde::Serialize;
use thiserror::Error;

use crate::functional::{FunctionalError, Geometry, PatternSpec};
use crate::solver::SolveResult;
use crate::surface::{EdgeId, FaceId, HalfEdgeId, VertexId};
use model::{Disk, Model, Plane};

/// Tolerance for deciding that a cone angle equals 2pi.
pub const CONE_TOL: f64 = 1e-9;
/// Relative closure tolerance (times the layout diameter).
pub const CLOSURE_TOL: f64 = 1e-7;

#[derive(Debug, Error)]
pub enum LayoutError {
    #[error("pattern is not developable: {0}")]
    NotDevelopable(String),
    #[error("radius data has {got} entries, expected {expected}")]
    Length { expected: usize, got: usize },
    #[error(transparent)]
    Functional(#[from] FunctionalError),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LayoutModel {
    Euclidean,
    /// Points in the unit disk; circle centers and radii are hyperbolic.
    Poincare,
}

/// A circle or, for infinite radius, an oriented line whose disk is the
/// half-plane on its left.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PlanarCircle {
    Disk { center: Point, radius: f64 },
    Line { point: Point, direction: Point },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FaceCircle {
    pub face: FaceId,
    pub shape: PlanarCircle,
}

/// Kite of an edge: left center, origin point, right center, terminus point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Kite {
    pub edge: EdgeId,
    pub corners: [Point; 4],
}

#[derive(Clone, Debug, PartialEq)]
pub struct LayoutResult {
    pub model: LayoutModel,
    pub circles: Vec<FaceCircle>,
    /// Position of each vertex (`None` only for vertices absent from a
    /// reduced planar pattern, such as the projection center).
    pub vertices: Vec<Option<Point>>,
    pub kites: Vec<Kite>,
    /// Largest disagreement between two placements of the same point.
    pub closure_residual: f64,
    /// Largest deviation of a kite side from the radius of its circle.
    pub side_residual: f64,
    /// Largest deviation of the angle sum around an interior vertex from its
    /// prescribed value.
    pub vertex_angle_defect: f64,
    /// Same for the angles at interior circle centers.
    pub face_angle_defect: f64,
    /// Translation periods of a flat torus.
    pub periods: Option<[Point; 2]>,
    pub diameter: f64,
    /// False when the closure residual exceeds `CLOSURE_TOL * diameter`.
    pub closed_up: bool,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LayoutOptions {
    /// Edge whose kite is placed first (default edge 0).
    pub root: Option<EdgeId>,
}

/// A face, or one open walk of a boundary face: a chain of half-edges
/// placed rigidly around the face center.
struct Unit {
    face: FaceId,
    hes: Vec<HalfEdgeId>,
    closed: bool,
}

struct Placement {
    center: Point,
    /// `points[k]` is the origin of `hes[k]`; the last entry is the terminus
    /// of the last half-edge.
    points: Vec<Point>,
}

/// Checks the developability conditions and returns whether the surface is
/// a flat torus.
fn check_developable(spec: &PatternSpec) -> Result<bool, LayoutError> {
    let s = spec.surface();
    for f in s.face_ids() {
        if !s.face(f).is_boundary_face() && (spec.phi_target(f) - 2.0 * PI).abs() > CONE_TOL {
            return Err(LayoutError::NotDevelopable(format!(
                "face {f} has cone angle {} at its center",
                spec.phi_target(f)
            )));
        }
    }
    for (v, sum) in spec.vertex_angle_sums().into_iter().enumerate() {
        if !s.vertex(VertexId(v)).on_boundary && (sum - 2.0 * PI).abs() > CONE_TOL {
            return Err(LayoutError::NotDevelopable(format!("vertex {v} has cone angle {sum}")));
        }
    }
    let g = s.genus();
    let b = s.boundary_components();
    match (spec.geometry(), g, b) {
        (_, 0, 1) => Ok(false),
        (Geometry::Euclidean, 1, 0) => Ok(true),
        _ => Err(LayoutError::NotDevelopable(format!(
            "only discs and flat tori can be laid out, got genus {g} with {b} boundary components"
        ))),
    }
}

/// Lays out a solved pattern.
pub fn layout(
    spec: &PatternSpec,
    result: &SolveResult,
    opts: &LayoutOptions,
) -> Result<LayoutResult, LayoutError> {
    let n = spec.num_faces();
    if result.rho_star.rho.len() != n {
        return Err(LayoutError::Length { expected: n, got: result.rho_star.rho.len() });
    }
    let torus = check_developable(spec)?;
    let radii = result.rho_star.radii(spec.geometry())?;
    let phi = &result.cas_star.phi;
    match spec.geometry() {
        Geometry::Euclidean => Ok(develop(&Plane, spec, &radii, phi, torus, opts)),
        Geometry::Hyperbolic => Ok(develop(&Disk, spec, &radii, phi, false, opts)),
    }
}

fn develop(
    m: &dyn Model,
    spec: &PatternSpec,
    radii: &[f64],
    phi: &[f64],
    torus: bool,
    opts: &LayoutOptions,
) -> LayoutResult {
    let s = spec.surface();
    let mut units: Vec<Unit> = Vec::new();
    let mut unit_of = vec![(0usize, 0usize); s.num_half_edges()];
    for f in s.face_ids() {
        let face = s.face(f);
        let ranges = if face.walks.is_empty() { vec![(0, face.boundary.len())] } else { face.walks.clone() };
        for (a, b) in ranges {
            for (k, &h) in face.boundary[a..b].iter().enumerate() {
                unit_of[h.0] = (units.len(), k);
            }
            units.push(Unit { face: f, hes: face.boundary[a..b].to_vec(), closed: face.walks.is_empty() });
        }
    }

    let place = |center: Point, h: HalfEdgeId, p_origin: Point, unit: &Unit, k: usize| {
        let mut points = vec![Complex::new(0.0, 0.0); unit.hes.len() + 1];
        points[k] = p_origin;
        for j in k..unit.hes.len() {
            points[j + 1] = m.rotate_about(center, points[j], 2.0 * phi[unit.hes[j].0]);
        }
        for j in (0..k).rev() {
            points[j] = m.rotate_about(center, points[j + 1], -2.0 * phi[unit.hes[j].0]);
        }
        debug_assert_eq!(unit.hes[k], h);
        Placement { center, points }
    };
    // Center of the right face of `h`, given the left center and the points.
    let right_center = |h: HalfEdgeId, c: Point, p: Point| {
        let e = s.edge(h);
        m.offset(p, c, -spec.theta(e), radii[s.right_face(h).0])
    };

    let root = s.canonical(opts.root.unwrap_or(EdgeId(0)));
    let f0 = s.left_face(root);
    let (r0, a0) = (radii[f0.0], phi[root.0]);
    let (c0, p0) = if spec.geometry() == Geometry::Hyperbolic {
        (Complex::new(0.0, 0.0), Complex::from_polar((0.5 * r0).tanh(), -0.5 * PI - a0))
    } else {
        (Complex::new(0.0, r0 * a0.cos()), Complex::new(-r0 * a0.sin(), 0.0))
    };

    let mut placed: Vec<Option<Placement>> = (0..units.len()).map(|_| None).collect();
    let mut centers: Vec<Option<Point>> = vec![None; s.num_faces()];
    let mut vertices: Vec<Option<Point>> = vec![None; s.num_vertices()];
    let mut residual = 0.0f64;
    let mut translations: Vec<Point> = Vec::new();
    let mut queue = VecDeque::new();
    let (u0, k0) = unit_of[root.0];
    placed[u0] = Some(place(c0, root, p0, &units[u0], k0));
    centers[f0.0] = Some(c0);
    queue.push_back(u0);
    while let Some(u) = queue.pop_front() {
        let unit = &units[u];
        let pl = placed[u].as_ref().expect("queued units are placed");
        let (c, pts) = (pl.center, pl.points.clone());
        for (k, &h) in unit.hes.iter().enumerate() {
            for (j, v) in [(k, s.origin(h)), (k + 1, s.terminus(h))] {
                if !torus {
                    match vertices[v.0] {
                        Some(q) => residual = residual.max((q - pts[j]).norm()),
                        None => vertices[v.0] = Some(pts[j]),
                    }
                } else if vertices[v.0].is_none() {
                    vertices[v.0] = Some(pts[j]);
                }
            }
            let t = s.twin(h);
            let (ut, kt) = unit_of[t.0];
            let (pv, pw) = (pts[k], pts[k + 1]);
            if let Some(other) = &placed[ut] {
                // The twin runs from w to v.
                let (qw, qv) = (other.points[kt], other.points[kt + 1]);
                if torus {
                    let tr = pw - qw;
                    residual = residual.max((pv - qv - tr).norm());
                    translations.push(tr);
                } else {
                    residual = residual.max((pw - qw).norm()).max((pv - qv).norm());
                }
                continue;
            }
            let g = s.right_face(h);
            let cg = right_center(h, c, pv);
            if let Some(old) = centers[g.0] {
                if !torus {
                    residual = residual.max((old - cg).norm());
                }
            } else {
                centers[g.0] = Some(cg);
            }
            placed[ut] = Some(place(cg, t, pw, &units[ut], kt));
            queue.push_back(ut);
        }
    }

    // Every unit is reached: the surface is connected and every walk has an
    // edge.
    let mut side_residual = 0.0f64;
    let mut kites = Vec::with_capacity(s.num_edges());
    for e in s.edge_ids() {
        let h = s.canonical(e);
        let (u, k) = unit_of[h.0];
        let pl = placed[u].as_ref().expect("all units placed");
        let (c, pv, pw) = (pl.center, pl.points[k], pl.points[k + 1]);
        let cg = right_center(h, c, pv);
        let (rf, rg) = (radii[s.left_face(h).0], radii[s.right_face(h).0]);
        for (a, b, r) in [(c, pv, rf), (c, pw, rf), (cg, pv, rg), (cg, pw, rg)] {
            side_residual = side_residual.max((m.dist(a, b) - r).abs() / r.max(1.0));
        }
        kites.push(Kite { edge: e, corners: [c, pv, cg, pw] });
    }

    let kite_of = |h: HalfEdgeId| {
        let k = &kites[s.edge(h).0];
        if h == s.canonical(s.edge(h)) {
            k.corners
        } else {
            [k.corners[2], k.corners[3], k.corners[0], k.corners[1]]
        }
    };
    let mut vertex_angle_defect = 0.0f64;
    for v in s.vertex_ids() {
        if s.vertex(v).on_boundary {
            continue;
        }
        let mut sum = 0.0;
        for &h in &s.vertex(v).fan {
            // Corners as seen from h: [left center, origin, right center, terminus].
            let [cf, p, cg, _] = kite_of(h);
            sum += m.angle_at(p, cg, cf).rem_euclid(2.0 * PI);
        }
        let target = spec.vertex_angle_sums()[v.0];
        vertex_angle_defect = vertex_angle_defect.max((sum - target).abs());
    }
    let mut face_angle_defect = 0.0f64;
    for (u, unit) in units.iter().enumerate() {
        if !unit.closed {
            continue;
        }
        let pl = placed[u].as_ref().expect("all units placed");
        let sum: f64 = (0..unit.hes.len())
            .map(|k| m.angle_at(pl.center, pl.points[k], pl.points[k + 1]).rem_euclid(2.0 * PI))
            .sum();
        face_angle_defect = face_angle_defect.max((sum - spec.phi_target(unit.face)).abs());
    }

    let circles: Vec<FaceCircle> = s
        .face_ids()
        .map(|f| FaceCircle {
            face: f,
            shape: PlanarCircle::Disk { center: centers[f.0].expect("all faces placed"), radius: radii[f.0] },
        })
        .collect();
    let periods = if torus {
        let (p, lattice_residual) = lattice_basis(&translations);
        residual = residual.max(lattice_residual);
        p
    } else {
        None
    };
    let diameter = diameter_of(&circles, &vertices, spec.geometry());
    debug!("layout closure residual {residual:e}, side residual {side_residual:e}");
    LayoutResult {
        model: match spec.geometry() {
            Geometry::Euclidean => LayoutModel::Euclidean,
            Geometry::Hyperbolic => LayoutModel::Poincare,
        },
        circles,
        vertices,
        kites,
        closure_residual: residual,
        side_residual,
        vertex_angle_defect,
        face_angle_defect,
        periods,
        diameter,
        closed_up: residual <= CLOSURE_TOL * diameter.max(1e-300),
    }
}

fn diameter_of(circles: &[FaceCircle], vertices: &[Option<Point>], geometry: Geometry) -> f64 {
    let mut pts: Vec<Point> = vertices.iter().flatten().copied().collect();
    for c in circles {
        if let PlanarCircle::Disk { center, radius } = c.shape {
            let (c, r) = match geometry {
                Geometry::Euclidean => (center, radius),
                Geometry::Hyperbolic => hyperbolic_circle_image(center, radius),
            };
            pts.extend([c + r, c - r, c + Complex::new(0.0, r), c - Complex::new(0.0, r)]);
        }
    }
    let (mut lo, mut hi) = (Complex::new(f64::INFINITY, f64::INFINITY), Complex::new(f64::NEG_INFINITY, f64::NEG_INFINITY));
    for p in &pts {
        lo = Complex::new(lo.re.min(p.re), lo.im.min(p.im));
        hi = Complex::new(hi.re.max(p.re), hi.im.max(p.im));
    }
    if pts.is_empty() {
        0.0
    } else {
        (hi - lo).norm()
    }
}

/// Reduced basis of the lattice spanned by `vs` (near-zero vectors ignored),
/// and the largest distance of a vector from the lattice.
fn lattice_basis(vs: &[Point]) -> (Option<[Point; 2]>, f64) {
    let scale = vs.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let tiny = 1e-6 * scale.max(1e-300);
    let mut nonzero: Vec<Point> = vs.iter().copied().filter(|v| v.norm() > tiny).collect();
    nonzero.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
    let Some(&a) = nonzero.first() else { return (None, 0.0) };
    let Some(&b) = nonzero.iter().find(|b| (a.conj() * **b).im.abs() > tiny * b.norm()) else {
        return (None, 0.0);
    };
    let (mut a, mut b) = (a, b);
    // Lagrange-Gauss reduction.
    loop {
        if b.norm() < a.norm() {
            std::mem::swap(&mut a, &mut b);
        }
        let mu = ((a.conj() * b).re / a.norm_sqr()).round();
        if mu == 0.0 {
            break;
        }
        b -= a.scale(mu);
    }
    let det = (a.conj() * b).im;
    let mut worst = 0.0f64;
    for v in vs {
        // Coordinates of v in the basis (a, b).
        let x = (v.conj() * b).im / det;
        let y = (a.conj() * v).im / det;
        let w = *v - a.scale(x.round()) - b.scale(y.round());
        worst = worst.max(w.norm());
    }
    if det < 0.0 {
        std::mem::swap(&mut a, &mut b);
    }
    (Some([a, b]), worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{minimize, SolveOptions};
    use crate::surface::catalog;
    use std::sync::Arc;

    /// Square-grid disc; boundary faces get perturbed cone angles that keep
    /// the Euclidean balance, or a uniform deficit in the hyperbolic case.
    fn grid_spec(geometry: Geometry, phi_interior: f64) -> PatternSpec {
        let s = Arc::new(catalog::grid_disc(4));
        let mut sign = 1.0;
        let phi: Vec<f64> = s
            .face_ids()
            .map(|f| {
                let face = s.face(f);
                if !face.is_boundary_face() {
                    return phi_interior;
                }
                let base = face.degree() as f64 * PI / 2.0;
                match geometry {
                    Geometry::Euclidean => {
                        sign = -sign;
                        base + 0.15 * sign
                    }
                    Geometry::Hyperbolic => base - 0.3,
                }
            })
            .collect();
        let ne = s.num_edges();
        PatternSpec::new(s, geometry, vec![PI / 2.0; ne], phi).unwrap()
    }

    #[test]
    fn lattice_of_square_translations() {
        let a = Complex::new(2.0, 0.0);
        let b = Complex::new(0.0, 2.0);
        let (p, r) = lattice_basis(&[a, b, a + b, a - b, a.scale(3.0), Complex::new(0.0, 0.0)]);
        let [x, y] = p.unwrap();
        assert!((x.norm() - 2.0).abs() < 1e-12 && (y.norm() - 2.0).abs() < 1e-12);
        assert!(r < 1e-12);
    }

    #[test]
    fn torus_grid_is_square_lattice() {
        let s = Arc::new(catalog::torus_grid(4, 4));
        let spec = PatternSpec::new(s, Geometry::Euclidean, vec![PI / 2.0; 32], vec![2.0 * PI; 16]).unwrap();
        let res = minimize(&spec, &SolveOptions::default()).unwrap();
        let l = layout(&spec, &res, &LayoutOptions::default()).unwrap();
        assert!(l.closed_up, "{}", l.closure_residual);
        assert!(l.side_residual < 1e-12 && l.vertex_angle_defect < 1e-9 && l.face_angle_defect < 1e-9);
        let [a, b] = l.periods.unwrap();
        assert!((a.norm() - 4.0 * 2f64.sqrt()).abs() < 1e-9);
        assert!((a.norm() - b.norm()).abs() < 1e-9 && (a.conj() * b).re.abs() < 1e-9);
        // Neighboring centers sit at distance sqrt 2 (orthogonal unit circles).
        for k in &l.kites {
            assert!(((k.corners[0] - k.corners[2]).norm() - 2f64.sqrt()).abs() < 1e-9);
        }
    }

    #[test]
    fn disc_layouts_close_up() {
        for g in [Geometry::Euclidean, Geometry::Hyperbolic] {
            let spec = grid_spec(g, 2.0 * PI);
            let res = minimize(&spec, &SolveOptions::default()).unwrap();
            let l = layout(&spec, &res, &LayoutOptions::default()).unwrap();
            assert!(l.closed_up, "{g:?} {}", l.closure_residual);
            assert!(l.side_residual < 1e-9, "{}", l.side_residual);
            assert!(l.vertex_angle_defect < 1e-9 && l.face_angle_defect < 1e-9);
            if g == Geometry::Hyperbolic {
                for c in &l.circles {
                    if let PlanarCircle::Disk { center, radius } = c.shape {
                        let (ec, er) = hyperbolic_circle_image(center, radius);
                        assert!(ec.norm() + er < 1.0);
                    }
                }
            }
        }
    }

    #[test]
    fn cone_angles_are_rejected() {
        let spec = grid_spec(Geometry::Hyperbolic, 2.0 * PI - 0.2);
        let res = minimize(&spec, &SolveOptions::default()).unwrap();
        assert!(matches!(
            layout(&spec, &res, &LayoutOptions::default()),
            Err(LayoutError::NotDevelopable(_))
        ));
    }

    #[test]
    fn root_choice_changes_layout_by_isometry() {
        let spec = grid_spec(Geometry::Euclidean, 2.0 * PI);
        let res = minimize(&spec, &SolveOptions::default()).unwrap();
        let a = layout(&spec, &res, &LayoutOptions::default()).unwrap();
        let b = layout(&spec, &res, &LayoutOptions { root: Some(EdgeId(7)) }).unwrap();
        // Pairwise distances between vertices agree.
        let va: Vec<Point> = a.vertices.iter().flatten().copied().collect();
        let vb: Vec<Point> = b.vertices.iter().flatten().copied().collect();
        for i in 0..va.len() {
            for j in 0..i {
                assert!(((va[i] - va[j]).norm() - (vb[i] - vb[j]).norm()).abs() < 1e-9);
            }
        }
    }
}
