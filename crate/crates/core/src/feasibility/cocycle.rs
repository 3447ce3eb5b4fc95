//! Combinatorial angle conditions: Rivin's cocycle condition on the sphere
//! and the cut-and-count condition for higher genus.

use std::collections::HashSet;
use std::f64::consts::PI;

use serde::Serialize;

use super::{FeasibilityCertificate, FeasibilityError, SubsetViolation};
use crate::surface::{CellularSurface, EdgeId, FaceId, VertexId};

/// Largest edge count for cocycle enumeration on the sphere.
pub const RIVIN_MAX_EDGES: usize = 24;
/// Largest edge count for cut enumeration in higher genus.
pub const CUT_MAX_EDGES: usize = 20;
const ANGLE_TOL: f64 = 1e-9;

/// All simple cycles of an undirected multigraph, as edge bitmasks.
/// Loops are cycles of length one, parallel edges give cycles of length two.
pub fn simple_cycles(num_nodes: usize, edges: &[(usize, usize)]) -> Vec<u64> {
    assert!(edges.len() <= 64);
    let mut incident: Vec<Vec<(usize, usize)>> = vec![Vec::new(); num_nodes];
    for (i, &(a, b)) in edges.iter().enumerate() {
        incident[a].push((i, b));
        if a != b {
            incident[b].push((i, a));
        }
    }
    let mut found = HashSet::new();
    let mut visited = vec![false; num_nodes];
    fn dfs(
        start: usize,
        u: usize,
        mask: u64,
        incident: &[Vec<(usize, usize)>],
        visited: &mut [bool],
        found: &mut HashSet<u64>,
    ) {
        for &(e, w) in &incident[u] {
            if mask >> e & 1 == 1 {
                continue;
            }
            let m = mask | 1 << e;
            if w == start {
                found.insert(m);
            } else if w > start && !visited[w] {
                visited[w] = true;
                dfs(start, w, m, incident, visited, found);
                visited[w] = false;
            }
        }
    }
    for s in 0..num_nodes {
        visited[s] = true;
        dfs(s, s, 0, &incident, &mut visited, &mut found);
        visited[s] = false;
    }
    let mut out: Vec<u64> = found.into_iter().collect();
    out.sort_unstable();
    out
}

fn check_vertex_sums(s: &CellularSurface, theta: &[f64]) -> Result<(), FeasibilityError> {
    for (v, sum) in s.vertex_angle_sums(theta).into_iter().enumerate() {
        if (sum - 2.0 * PI).abs() > ANGLE_TOL {
            return Err(FeasibilityError::VertexSum { vertex: v, sum });
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CocycleViolation {
    pub edges: Vec<EdgeId>,
    pub theta_sum: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum RivinVerdict {
    /// Every simple cocycle other than a vertex coboundary sums to more than 2pi.
    Satisfied { cocycles_checked: usize },
    Violated(CocycleViolation),
    /// Too many edges to enumerate; decided by the equivalent subset
    /// conditions after sending vertex 0 to infinity.
    SatisfiedBySubsetConditions,
    ViolatedSubsetConditions(SubsetViolation),
}

impl RivinVerdict {
    pub fn is_satisfied(&self) -> bool {
        matches!(self, RivinVerdict::Satisfied { .. } | RivinVerdict::SatisfiedBySubsetConditions)
    }
}

/// Rivin's condition for exterior angles `theta` on a closed genus-0 surface:
/// every simple closed path in the dual graph crosses edges with total angle
/// above 2pi, except the paths around a single vertex, which give exactly 2pi.
pub fn check_rivin_condition(
    s: &CellularSurface,
    theta: &[f64],
) -> Result<RivinVerdict, FeasibilityError> {
    if !s.is_closed() || s.genus() != 0 {
        return Err(FeasibilityError::WrongTopology { expected: "0", found: s.genus() });
    }
    check_vertex_sums(s, theta)?;
    if s.num_edges() > RIVIN_MAX_EDGES {
        let cert = crate::spherical::sphere_subset_certificate(s, theta, VertexId(0))?;
        return Ok(match cert {
            FeasibilityCertificate::Violation(v) => RivinVerdict::ViolatedSubsetConditions(v),
            _ => RivinVerdict::SatisfiedBySubsetConditions,
        });
    }
    let dual_edges: Vec<(usize, usize)> = s
        .edge_ids()
        .map(|e| {
            let h = s.canonical(e);
            (s.left_face(h).0, s.right_face(h).0)
        })
        .collect();
    let coboundaries: HashSet<u64> = s
        .vertex_ids()
        .map(|v| s.vertex(v).fan.iter().fold(0u64, |m, &h| m ^ (1 << s.edge(h).0)))
        .collect();
    let cycles = simple_cycles(s.num_faces(), &dual_edges);
    for &m in &cycles {
        let edges: Vec<EdgeId> = (0..s.num_edges()).filter(|i| m >> i & 1 == 1).map(EdgeId).collect();
        let sum: f64 = edges.iter().map(|e| theta[e.0]).sum();
        let ok = if coboundaries.contains(&m) {
            (sum - 2.0 * PI).abs() <= ANGLE_TOL
        } else {
            sum > 2.0 * PI + ANGLE_TOL
        };
        if !ok {
            return Ok(RivinVerdict::Violated(CocycleViolation { edges, theta_sum: sum }));
        }
    }
    Ok(RivinVerdict::Satisfied { cocycles_checked: cycles.len() })
}

/// Which vertices belong to the graph formed by a cut.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GraphVertices {
    /// Only endpoints of cut edges.
    CutEndpoints,
    /// Every vertex; those away from the cut become punctures.
    All,
}

/// A connected piece of the surface cut open along some edges.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Piece {
    pub faces: Vec<FaceId>,
    pub euler_characteristic: i64,
    pub is_disc: bool,
    /// Angles along the cut boundary; an edge cut with this piece on both
    /// sides counts twice.
    pub boundary_theta_sum: f64,
    pub face_count: usize,
    /// First Betti number of the open region (piece minus graph).
    pub h1: i64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegionDecomposition {
    pub pieces: Vec<Piece>,
    pub graph_vertices: usize,
    pub graph_edges: usize,
    /// `r - |E| + |V|`.
    pub lhs: i64,
    /// `2 - 2g + sum h_j`.
    pub rhs: i64,
    pub identity_holds: bool,
}

struct RawPiece {
    faces: Vec<usize>,
    chi: i64,
    theta_sum: f64,
    interior_vertices: usize,
    has_boundary: bool,
}

/// Cuts a closed surface along the edges in `cut` and returns its pieces.
fn decompose(s: &CellularSurface, cut: &[bool], theta: &[f64]) -> Vec<RawPiece> {
    let nf = s.num_faces();
    let mut parent: Vec<usize> = (0..nf).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for e in s.edge_ids() {
        if !cut[e.0] {
            let h = s.canonical(e);
            let (a, b) = (find(&mut parent, s.left_face(h).0), find(&mut parent, s.right_face(h).0));
            if a != b {
                parent[a] = b;
            }
        }
    }
    let mut index = vec![usize::MAX; nf];
    let mut pieces: Vec<RawPiece> = Vec::new();
    let mut piece_of = vec![0usize; nf];
    for f in 0..nf {
        let r = find(&mut parent, f);
        if index[r] == usize::MAX {
            index[r] = pieces.len();
            pieces.push(RawPiece {
                faces: Vec::new(),
                chi: 0,
                theta_sum: 0.0,
                interior_vertices: 0,
                has_boundary: false,
            });
        }
        piece_of[f] = index[r];
        pieces[index[r]].faces.push(f);
        pieces[index[r]].chi += 1;
    }
    for e in s.edge_ids() {
        let [a, b] = s.edge_half_edges(e);
        if cut[e.0] {
            for h in [a, b] {
                let p = &mut pieces[piece_of[s.left_face(h).0]];
                p.chi -= 1;
                p.theta_sum += theta[e.0];
                p.has_boundary = true;
            }
        } else {
            pieces[piece_of[s.left_face(a).0]].chi -= 1;
        }
    }
    for v in s.vertex_ids() {
        let fan = &s.vertex(v).fan;
        let cuts: Vec<usize> = (0..fan.len()).filter(|&i| cut[s.edge(fan[i]).0]).collect();
        if cuts.is_empty() {
            let p = &mut pieces[piece_of[s.left_face(fan[0]).0]];
            p.chi += 1;
            p.interior_vertices += 1;
        } else {
            // One vertex copy per sector between consecutive cut edges.
            for &i in &cuts {
                pieces[piece_of[s.left_face(fan[i]).0]].chi += 1;
            }
        }
    }
    pieces
}

/// Pieces of the closed surface `dual` cut along `cut`, with the Betti
/// numbers of the regions left by the graph (cut edges plus the chosen
/// vertices), and the check `r - |E| + |V| = 2 - 2g + sum h_j`.
pub fn region_decomposition(
    dual: &CellularSurface,
    cut: &[EdgeId],
    theta: &[f64],
    vertices: GraphVertices,
) -> RegionDecomposition {
    let mut cut_mask = vec![false; dual.num_edges()];
    cut.iter().for_each(|e| cut_mask[e.0] = true);
    let raw = decompose(dual, &cut_mask, theta);
    let mut endpoint = vec![false; dual.num_vertices()];
    for e in dual.edge_ids().filter(|e| cut_mask[e.0]) {
        let h = dual.canonical(e);
        endpoint[dual.origin(h).0] = true;
        endpoint[dual.terminus(h).0] = true;
    }
    let graph_vertices = match vertices {
        GraphVertices::CutEndpoints => endpoint.iter().filter(|&&x| x).count(),
        GraphVertices::All => dual.num_vertices(),
    };
    let pieces: Vec<Piece> = raw
        .into_iter()
        .map(|p| {
            let punctures = match vertices {
                GraphVertices::CutEndpoints => 0,
                GraphVertices::All => p.interior_vertices as i64,
            };
            let h1 = if !p.has_boundary && punctures == 0 {
                2 - p.chi
            } else {
                1 - (p.chi - punctures)
            };
            Piece {
                face_count: p.faces.len(),
                faces: p.faces.into_iter().map(FaceId).collect(),
                euler_characteristic: p.chi,
                is_disc: p.chi == 1,
                boundary_theta_sum: p.theta_sum,
                h1,
            }
        })
        .collect();
    let lhs = pieces.len() as i64 - cut.len() as i64 + graph_vertices as i64;
    let rhs = 2 - 2 * dual.genus() + pieces.iter().map(|p| p.h1).sum::<i64>();
    RegionDecomposition {
        pieces,
        graph_vertices,
        graph_edges: cut.len(),
        lhs,
        rhs,
        identity_holds: lhs == rhs,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "lowercase")]
pub enum HigherGenusVerdict {
    Satisfied {
        cuts_checked: u64,
    },
    Violated {
        /// Cut edges (edge ids are shared between the surface and its dual).
        cut: Vec<EdgeId>,
        /// Faces of the dual in the offending disc, i.e. vertices of the surface.
        piece: Vec<FaceId>,
        theta_sum: f64,
        face_count: usize,
    },
}

impl HigherGenusVerdict {
    pub fn is_satisfied(&self) -> bool {
        matches!(self, HigherGenusVerdict::Satisfied { .. })
    }
}

/// For a closed surface of genus at least one with `Theta_v = 2pi`: cut the
/// dual along every subset of edges; each piece that is a disc must have
/// boundary angle sum at least 2pi, with equality only for single faces.
pub fn check_higher_genus_condition(
    s: &CellularSurface,
    theta: &[f64],
) -> Result<HigherGenusVerdict, FeasibilityError> {
    if !s.is_closed() || s.genus() < 1 {
        return Err(FeasibilityError::WrongTopology { expected: ">= 1", found: s.genus() });
    }
    if s.num_edges() > CUT_MAX_EDGES {
        return Err(FeasibilityError::TooManyEdges { edges: s.num_edges(), limit: CUT_MAX_EDGES });
    }
    check_vertex_sums(s, theta)?;
    let dual = s.dual()?;
    let ne = s.num_edges();
    let mut cut = vec![false; ne];
    let total = 1u64 << ne;
    for m in 0..total {
        for (i, c) in cut.iter_mut().enumerate() {
            *c = m >> i & 1 == 1;
        }
        for p in decompose(&dual, &cut, theta) {
            if p.chi != 1 {
                continue;
            }
            let bad = p.theta_sum < 2.0 * PI - ANGLE_TOL
                || (p.theta_sum <= 2.0 * PI + ANGLE_TOL && p.faces.len() > 1);
            if bad {
                return Ok(HigherGenusVerdict::Violated {
                    cut: (0..ne).filter(|&i| cut[i]).map(EdgeId).collect(),
                    face_count: p.faces.len(),
                    piece: p.faces.into_iter().map(FaceId).collect(),
                    theta_sum: p.theta_sum,
                });
            }
        }
    }
    Ok(HigherGenusVerdict::Satisfied { cuts_checked: total })
}
