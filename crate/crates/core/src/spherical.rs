//! Circle patterns on the sphere without cone singularities. The faces
//! around a chosen vertex are sent through infinity: the rest is solved as a
//! planar Euclidean pattern, the removed faces come back as straight lines,
//! and everything is projected stereographically onto the unit sphere.

use std::f64::consts::PI;
use std::sync::Arc;

use log::debug;
use nalgebra::{Complex, Vector3};
use serde::Serialize;
use thiserror::Error;

use crate::feasibility::{
    check_conditions_bruteforce, find_coherent_angle_system, FeasibilityCertificate,
    FeasibilityError, SubsetViolation,
};
use crate::functional::{Geometry, PatternSpec, SpecError};
use crate::layout::{
    layout, FaceCircle, LayoutError, LayoutModel, LayoutOptions, LayoutResult, PlanarCircle, Point,
};
use crate::solver::{minimize, SolveError, SolveOptions};
use crate::surface::{CellularSurface, EdgeId, FaceId, SubsurfaceMap, SurfaceError, VertexId};

/// Tolerance on the vertex angle sums.
pub const VERTEX_SUM_TOL: f64 = 1e-9;
/// Face-count limit for the brute-force subset check.
pub const SPHERE_BRUTEFORCE_FACES: usize = 12;

#[derive(Debug, Error)]
pub enum SphereError {
    #[error("surface must be closed with genus 0, found genus {genus} with {boundary} boundary components")]
    Topology { genus: i64, boundary: usize },
    #[error("expected {expected} angles, got {got}")]
    Length { expected: usize, got: usize },
    #[error("angle {value} on edge {edge} outside (0, pi)")]
    Theta { edge: usize, value: f64 },
    #[error("vertex {vertex}: angles sum to {sum}, expected 2pi")]
    VertexSum { vertex: usize, sum: f64 },
    #[error("vertex {0} out of range")]
    BadVertex(usize),
    #[error("conditions for a spherical pattern fail: {0:?}")]
    Conditions(SphereVerdict),
    #[error("unsupported configuration: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Surface(#[from] SurfaceError),
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Feasibility(#[from] FeasibilityError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Layout(#[from] LayoutError),
}

/// Closed genus-0 surface with exterior angles and a projection center.
#[derive(Clone, Debug)]
pub struct SphericalProblem {
    pub surface: Arc<CellularSurface>,
    pub theta: Vec<f64>,
    pub v_infinity: VertexId,
}

impl SphericalProblem {
    pub fn new(
        surface: Arc<CellularSurface>,
        theta: Vec<f64>,
        v_infinity: VertexId,
    ) -> Result<Self, SphereError> {
        let (genus, boundary) = (surface.genus(), surface.boundary_components());
        if boundary != 0 || genus != 0 {
            return Err(SphereError::Topology { genus, boundary });
        }
        if theta.len() != surface.num_edges() {
            return Err(SphereError::Length { expected: surface.num_edges(), got: theta.len() });
        }
        if let Some((edge, &value)) = theta.iter().enumerate().find(|(_, t)| !(**t > 0.0 && **t < PI)) {
            return Err(SphereError::Theta { edge, value });
        }
        if v_infinity.0 >= surface.num_vertices() {
            return Err(SphereError::BadVertex(v_infinity.0));
        }
        Ok(SphericalProblem { surface, theta, v_infinity })
    }

    pub fn theta_star(&self, e: EdgeId) -> f64 {
        PI - self.theta[e.0]
    }

    fn check_vertex_sums(&self) -> Result<(), SphereError> {
        for (vertex, sum) in self.surface.vertex_angle_sums(&self.theta).into_iter().enumerate() {
            if (sum - 2.0 * PI).abs() > VERTEX_SUM_TOL {
                return Err(SphereError::VertexSum { vertex, sum });
            }
        }
        Ok(())
    }

    /// Faces incident with the projection center.
    pub fn faces_at_infinity(&self) -> Vec<FaceId> {
        let mut f = self.surface.faces_around(self.v_infinity);
        f.sort();
        f.dedup();
        f
    }
}

/// The planar problem left after removing the faces at infinity.
#[derive(Clone, Debug)]
pub enum Reduction {
    /// A single face remains.
    Elementary { face: FaceId },
    Planar {
        spec: PatternSpec,
        /// New ids to ids of the original surface.
        map: SubsurfaceMap,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum SphereVerdict {
    Satisfied,
    /// The dual graph falls apart once the faces at infinity are removed.
    Disconnected,
    /// `2pi (|F| - |F_inf|)` differs from the angle sum over the edges not
    /// incident with the projection center.
    Balance { faces_term: f64, edges_term: f64 },
    /// A boundary face would need a nonpositive angle sum.
    BoundaryAngle { face: FaceId, phi: f64 },
    /// A proper subset of the remaining faces breaks the strict inequality
    /// (face and edge ids of the original surface).
    Subset(SubsetViolation),
}

/// Removes the faces at infinity and sets the angle sums of the remaining
/// faces: 2pi for interior faces, 2pi minus twice the removed interior
/// angles for boundary faces.
pub fn reduce_to_plane(p: &SphericalProblem) -> Result<Result<Reduction, SphereVerdict>, SphereError> {
    let s = &p.surface;
    let removed = p.faces_at_infinity();
    let remaining: Vec<FaceId> = s.face_ids().filter(|f| !removed.contains(f)).collect();
    if remaining.len() == 1 {
        return Ok(Ok(Reduction::Elementary { face: remaining[0] }));
    }
    let (sub, map) = match s.remove_faces(&removed) {
        Ok(x) => x,
        Err(SurfaceError::Disconnected | SurfaceError::NoEdgesRemain) => {
            return Ok(Err(SphereVerdict::Disconnected))
        }
        Err(e) => return Err(e.into()),
    };
    let mut phi = Vec::with_capacity(sub.num_faces());
    for (i, &f) in map.face.iter().enumerate() {
        let lost: f64 = s
            .face(f)
            .boundary
            .iter()
            .filter(|&&h| removed.contains(&s.right_face(h)))
            .map(|&h| 2.0 * p.theta_star(s.edge(h)))
            .sum();
        let value = 2.0 * PI - lost;
        debug_assert_eq!(lost > 0.0, sub.face(FaceId(i)).is_boundary_face());
        if value <= 0.0 {
            return Ok(Err(SphereVerdict::BoundaryAngle { face: f, phi: value }));
        }
        phi.push(value);
    }
    let theta_star: Vec<f64> = map.edge.iter().map(|&e| p.theta_star(e)).collect();
    let spec = PatternSpec::new(Arc::new(sub), Geometry::Euclidean, theta_star, phi)?;
    Ok(Ok(Reduction::Planar { spec, map }))
}

fn lift_violation(v: SubsetViolation, map: &SubsurfaceMap) -> SubsetViolation {
    SubsetViolation {
        faces: v.faces.iter().map(|f| map.face[f.0]).collect(),
        edges: v.edges.iter().map(|e| map.edge[e.0]).collect(),
        ..v
    }
}

/// Verifies the existence conditions for a spherical pattern with the given
/// projection center.
pub fn check_sphere_conditions(p: &SphericalProblem) -> Result<SphereVerdict, SphereError> {
    p.check_vertex_sums()?;
    let s = &p.surface;
    let removed = p.faces_at_infinity();
    let faces_term = 2.0 * PI * (s.num_faces() - removed.len()) as f64;
    let edges_term: f64 = s
        .edge_ids()
        .filter(|&e| {
            let h = s.canonical(e);
            s.origin(h) != p.v_infinity && s.terminus(h) != p.v_infinity
        })
        .map(|e| 2.0 * p.theta_star(e))
        .sum();
    let reduction = match reduce_to_plane(p)? {
        Ok(r) => r,
        Err(v) => return Ok(v),
    };
    if (faces_term - edges_term).abs() > 1e-9 * (1.0 + faces_term) {
        return Ok(SphereVerdict::Balance { faces_term, edges_term });
    }
    let Reduction::Planar { spec, map } = reduction else {
        return Ok(SphereVerdict::Satisfied);
    };
    let cert = if spec.num_faces() <= SPHERE_BRUTEFORCE_FACES {
        check_conditions_bruteforce(&spec)?
    } else {
        find_coherent_angle_system(&spec)?
    };
    Ok(match cert {
        FeasibilityCertificate::Violation(v) => SphereVerdict::Subset(lift_violation(v, &map)),
        _ => SphereVerdict::Satisfied,
    })
}

/// Subset-condition certificate for the planar problem with projection
/// center `v`; used for large instances of the cocycle condition.
pub fn sphere_subset_certificate(
    s: &CellularSurface,
    theta: &[f64],
    v: VertexId,
) -> Result<FeasibilityCertificate, FeasibilityError> {
    let p = SphericalProblem {
        surface: Arc::new(s.clone()),
        theta: theta.to_vec(),
        v_infinity: v,
    };
    let lift = |e: SphereError| match e {
        SphereError::Feasibility(f) => f,
        SphereError::Surface(s) => FeasibilityError::Surface(s),
        SphereError::Spec(s) => FeasibilityError::Spec(s),
        other => FeasibilityError::Surface(SurfaceError::Degenerate(other.to_string())),
    };
    match reduce_to_plane(&p).map_err(lift)? {
        Err(SphereVerdict::Disconnected) => Err(FeasibilityError::Surface(SurfaceError::Disconnected)),
        Err(SphereVerdict::BoundaryAngle { face, phi }) => {
            Ok(FeasibilityCertificate::Violation(SubsetViolation {
                faces: s.face_ids().filter(|&f| f != face).collect(),
                edges: vec![],
                phi_sum: phi,
                theta_sum: 0.0,
                kind: crate::feasibility::ViolationKind::Inequality,
            }))
        }
        Err(_) => unreachable!("reduction reports only connectivity and boundary angles"),
        Ok(Reduction::Elementary { .. }) => Ok(FeasibilityCertificate::ConditionsHold),
        Ok(Reduction::Planar { spec, map }) => Ok(match find_coherent_angle_system(&spec)? {
            FeasibilityCertificate::Violation(v) => FeasibilityCertificate::Violation(lift_violation(v, &map)),
            other => other,
        }),
    }
}

/// Circle on the unit sphere bounding the cap `{x : x . axis >= cos radius}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SphericalCap {
    pub axis: [f64; 3],
    /// Angular radius in `(0, pi)`.
    pub radius: f64,
}

impl SphericalCap {
    pub fn axis_vector(&self) -> Vector3<f64> {
        Vector3::from(self.axis)
    }

    /// Signed distance of a point on the sphere from the boundary plane.
    pub fn plane_offset(&self, x: &Vector3<f64>) -> f64 {
        self.axis_vector().dot(x) - self.radius.cos()
    }
}

/// Unit sphere, projection from the north pole onto the plane `z = 0`.
pub fn stereographic(x: &Vector3<f64>) -> Point {
    Complex::new(x.x, x.y).unscale(1.0 - x.z)
}

pub fn stereographic_inverse_point(z: Point) -> Vector3<f64> {
    let n = z.norm_sqr();
    Vector3::new(2.0 * z.re, 2.0 * z.im, n - 1.0) / (n + 1.0)
}

pub const NORTH: Vector3<f64> = Vector3::new(0.0, 0.0, 1.0);

/// Cap bounded by the circle through `a, b, c` that contains `inside`.
fn cap_through(a: &Vector3<f64>, b: &Vector3<f64>, c: &Vector3<f64>, inside: &Vector3<f64>) -> SphericalCap {
    let mut n = (b - a).cross(&(c - a)).normalize();
    let mut d = n.dot(a);
    if n.dot(inside) < d {
        n = -n;
        d = -d;
    }
    SphericalCap { axis: [n.x, n.y, n.z], radius: d.clamp(-1.0, 1.0).acos() }
}

/// Image on the sphere of a planar circle with its disk, or of a line with
/// the half-plane on its left.
pub fn stereographic_inverse(g: &PlanarCircle) -> SphericalCap {
    match *g {
        PlanarCircle::Disk { center, radius } => {
            let pts: Vec<Vector3<f64>> = (0..3)
                .map(|k| {
                    stereographic_inverse_point(center + Complex::from_polar(radius, 2.0 * PI * k as f64 / 3.0))
                })
                .collect();
            cap_through(&pts[0], &pts[1], &pts[2], &stereographic_inverse_point(center))
        }
        PlanarCircle::Line { point, direction } => {
            let u = direction.unscale(direction.norm());
            let a = stereographic_inverse_point(point);
            let b = stereographic_inverse_point(point + u);
            let left = stereographic_inverse_point(point + u * Complex::new(0.0, 1.0));
            cap_through(&a, &b, &NORTH, &left)
        }
    }
}

/// Interior intersection angle of two caps whose circles meet.
pub fn cap_angle(a: &SphericalCap, b: &SphericalCap) -> f64 {
    let (ca, cb) = (a.radius.cos(), b.radius.cos());
    let cos_theta =
        (a.axis_vector().dot(&b.axis_vector()) - ca * cb) / (a.radius.sin() * b.radius.sin());
    PI - cos_theta.clamp(-1.0, 1.0).acos()
}

#[derive(Clone, Debug, PartialEq)]
pub struct SphericalLayout {
    /// One cap per face of the original surface.
    pub caps: Vec<SphericalCap>,
    pub vertices: Vec<Vector3<f64>>,
    /// Planar pattern before projection, with original face and vertex ids.
    pub planar: LayoutResult,
    /// Largest distance of a vertex from a line it should lie on.
    pub line_residual: f64,
}

/// Homogeneous coordinates of a sphere point for the projection from the
/// north pole, finite at the pole itself.
fn homogeneous(x: &Vector3<f64>) -> (Complex<f64>, Complex<f64>) {
    if x.z < 0.0 {
        (Complex::new(x.x, x.y), Complex::new(1.0 - x.z, 0.0))
    } else {
        (Complex::new(1.0 + x.z, 0.0), Complex::new(x.x, -x.y))
    }
}

fn from_homogeneous((u, v): (Complex<f64>, Complex<f64>)) -> Vector3<f64> {
    if v.norm() >= u.norm() {
        stereographic_inverse_point(u / v)
    } else {
        let w = v / u;
        let n = w.norm_sqr();
        Vector3::new(2.0 * w.re, -2.0 * w.im, 1.0 - n) / (1.0 + n)
    }
}

fn det(a: (Complex<f64>, Complex<f64>), b: (Complex<f64>, Complex<f64>)) -> Complex<f64> {
    a.0 * b.1 - a.1 * b.0
}

/// Cross-ratio `(a, b; c, d)` of four points on the sphere.
pub fn cross_ratio(a: &Vector3<f64>, b: &Vector3<f64>, c: &Vector3<f64>, d: &Vector3<f64>) -> Complex<f64> {
    let (a, b, c, d) = (homogeneous(a), homogeneous(b), homogeneous(c), homogeneous(d));
    det(a, c) * det(b, d) / (det(a, d) * det(b, c))
}

impl SphericalLayout {
    /// Interior intersection angle at every edge of `s`.
    pub fn edge_angles(&self, s: &CellularSurface) -> Vec<f64> {
        s.edge_ids()
            .map(|e| {
                let h = s.canonical(e);
                cap_angle(&self.caps[s.left_face(h).0], &self.caps[s.right_face(h).0])
            })
            .collect()
    }

    /// Largest distance of a vertex from the circles of its faces.
    pub fn incidence_residual(&self, s: &CellularSurface) -> f64 {
        let mut worst = 0.0f64;
        for v in s.vertex_ids() {
            for f in s.faces_around(v) {
                worst = worst.max(self.caps[f.0].plane_offset(&self.vertices[v.0]).abs());
            }
        }
        worst
    }

    /// For each edge, the cross-ratio of its two endpoints and the next
    /// vertices along its left and right faces. These are Moebius invariants.
    pub fn cross_ratios(&self, s: &CellularSurface) -> Vec<Complex<f64>> {
        s.edge_ids()
            .map(|e| {
                let h = s.canonical(e);
                let t = s.twin(h);
                let a = s.origin(h);
                let b = s.terminus(h);
                let c = s.terminus(s.next(h).expect("closed surface"));
                let d = s.terminus(s.next(t).expect("closed surface"));
                let p = |v: VertexId| &self.vertices[v.0];
                cross_ratio(p(a), p(b), p(c), p(d))
            })
            .collect()
    }

    /// Applies the Moebius transformation sending the given vertices to the
    /// images of 0, 1 and infinity.
    pub fn normalize(&self, fix: [VertexId; 3]) -> SphericalLayout {
        let [z1, z2, z3] = fix.map(|v| homogeneous(&self.vertices[v.0]));
        let (alpha, beta) = (det(z2, z3), det(z2, z1));
        let mobius = |x: &Vector3<f64>| {
            let w = homogeneous(x);
            from_homogeneous((alpha * det(w, z1), beta * det(w, z3)))
        };
        let caps = self
            .caps
            .iter()
            .map(|cap| {
                let n = cap.axis_vector();
                let helper = if n.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() };
                let e1 = n.cross(&helper).normalize();
                let e2 = n.cross(&e1);
                let pts: Vec<Vector3<f64>> = (0..3)
                    .map(|k| {
                        let t = 2.0 * PI * k as f64 / 3.0;
                        let x = n * cap.radius.cos() + (e1 * t.cos() + e2 * t.sin()) * cap.radius.sin();
                        mobius(&x)
                    })
                    .collect();
                cap_through(&pts[0], &pts[1], &pts[2], &mobius(&n))
            })
            .collect();
        SphericalLayout {
            caps,
            vertices: self.vertices.iter().map(mobius).collect(),
            planar: self.planar.clone(),
            line_residual: self.line_residual,
        }
    }
}

fn elementary_layout(p: &SphericalProblem, face: FaceId) -> LayoutResult {
    let s = &p.surface;
    let mut vertices = vec![None; s.num_vertices()];
    let mut angle = 0.0;
    for &h in &s.face(face).boundary {
        vertices[s.origin(h).0] = Some(Complex::from_polar(1.0, angle));
        angle += 2.0 * p.theta_star(s.edge(h));
    }
    let circles = s
        .face_ids()
        .map(|f| FaceCircle {
            face: f,
            shape: PlanarCircle::Disk { center: Complex::new(0.0, 0.0), radius: 1.0 },
        })
        .collect();
    LayoutResult {
        model: LayoutModel::Euclidean,
        circles,
        vertices,
        kites: vec![],
        closure_residual: (angle - 2.0 * PI).abs(),
        side_residual: 0.0,
        vertex_angle_defect: 0.0,
        face_angle_defect: 0.0,
        periods: None,
        diameter: 2.0,
        closed_up: (angle - 2.0 * PI).abs() <= 1e-9,
    }
}

/// Lifts a layout of the reduced surface to the ids of the original one.
fn lift_layout(p: &SphericalProblem, sub: LayoutResult, map: &SubsurfaceMap) -> LayoutResult {
    let s = &p.surface;
    let mut circles: Vec<FaceCircle> = s
        .face_ids()
        .map(|f| FaceCircle {
            face: f,
            shape: PlanarCircle::Disk { center: Complex::new(0.0, 0.0), radius: 0.0 },
        })
        .collect();
    for c in sub.circles {
        let f = map.face[c.face.0];
        circles[f.0] = FaceCircle { face: f, shape: c.shape };
    }
    let mut vertices = vec![None; s.num_vertices()];
    for (i, v) in sub.vertices.into_iter().enumerate() {
        vertices[map.vertex[i].0] = v;
    }
    let kites = sub
        .kites
        .into_iter()
        .map(|mut k| {
            k.edge = map.edge[k.edge.0];
            k
        })
        .collect();
    LayoutResult { circles, vertices, kites, ..sub }
}

/// Solves for a spherical pattern with interior angles `pi - theta`.
pub fn solve_sphere(p: &SphericalProblem) -> Result<SphericalLayout, SphereError> {
    match check_sphere_conditions(p)? {
        SphereVerdict::Satisfied => {}
        other => return Err(SphereError::Conditions(other)),
    }
    let s = &p.surface;
    let mut planar = match reduce_to_plane(p)? {
        Err(v) => return Err(SphereError::Conditions(v)),
        Ok(Reduction::Elementary { face }) => elementary_layout(p, face),
        Ok(Reduction::Planar { spec, map }) => {
            let res = minimize(&spec, &SolveOptions::default())?;
            debug!("reduced planar problem solved in {} iterations", res.iterations);
            let sub = layout(&spec, &res, &LayoutOptions::default())?;
            lift_layout(p, sub, &map)
        }
    };
    // Vertices whose edges were all removed sit on the circles of the
    // remaining faces: a removed edge of such a face subtends the central
    // angle 2 theta*.
    let removed = p.faces_at_infinity();
    let mut line_residual = 0.0f64;
    for _ in 0..s.num_faces() {
        let mut progress = false;
        for f in s.face_ids().filter(|f| !removed.contains(f)) {
            let PlanarCircle::Disk { center, .. } = planar.circles[f.0].shape else { continue };
            for &h in &s.face(f).boundary {
                if !removed.contains(&s.right_face(h)) {
                    continue;
                }
                let (a, b) = (s.origin(h), s.terminus(h));
                let turn = Complex::from_polar(1.0, 2.0 * p.theta_star(s.edge(h)));
                match (planar.vertices[a.0], planar.vertices[b.0]) {
                    (Some(x), None) => {
                        planar.vertices[b.0] = Some(center + turn * (x - center));
                        progress = true;
                    }
                    (None, Some(y)) => {
                        planar.vertices[a.0] = Some(center + (y - center) / turn);
                        progress = true;
                    }
                    (Some(x), Some(y)) => {
                        line_residual = line_residual.max((center + turn * (x - center) - y).norm());
                    }
                    (None, None) => {}
                }
            }
        }
        if !progress {
            break;
        }
    }
    // Lines for the faces at infinity, through consecutive finite vertices.
    for f in p.faces_at_infinity() {
        let boundary = &s.face(f).boundary;
        let chord = boundary.iter().find(|&&h| s.origin(h) != p.v_infinity && s.terminus(h) != p.v_infinity);
        let Some(&h) = chord else {
            return Err(SphereError::Unsupported(format!("face {f} has no edge away from the projection center")));
        };
        let pos = |v: VertexId| {
            planar.vertices[v.0].ok_or_else(|| SphereError::Unsupported(format!("vertex {v} was not placed")))
        };
        let (a, b) = (pos(s.origin(h))?, pos(s.terminus(h))?);
        let dir = (b - a).unscale((b - a).norm());
        for &k in boundary {
            let v = s.origin(k);
            if v != p.v_infinity {
                line_residual = line_residual.max(((pos(v)? - a) / dir).im.abs());
            }
        }
        planar.circles[f.0].shape = PlanarCircle::Line { point: a, direction: dir };
    }
    let caps = planar.circles.iter().map(|c| stereographic_inverse(&c.shape)).collect();
    let vertices = s
        .vertex_ids()
        .map(|v| if v == p.v_infinity { NORTH } else { stereographic_inverse_point(planar.vertices[v.0].expect("placed")) })
        .collect();
    Ok(SphericalLayout { caps, vertices, planar, line_residual })
}
