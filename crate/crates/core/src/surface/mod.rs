//! Oriented cellular surfaces stored as a half-edge table.
//!
//! Every unoriented edge is a pair of half-edges (twins). A half-edge knows its
//! origin vertex, the face on its left and the next half-edge around that face.
//! Faces that meet the surface boundary are *boundary faces*: their boundary is
//! one or more open walks instead of a single closed cycle, and `next` of the
//! last half-edge in a walk is `None`. The boundary of the surface itself is
//! therefore never stored as edges; it only touches the graph at vertices.

mod build;
pub mod catalog;
mod derived;
mod iso;

pub use build::{FaceListInput, HalfEdgeRecord, MeshInput};
pub use derived::{QuadGraph, SubsurfaceMap, VertexColor};
pub use iso::is_isomorphic;

use serde::{Deserialize, Serialize};
use thiserror::Error;

macro_rules! id_type {
    ($(#[$m:meta])* $name:ident) => {
        $(#[$m])*
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub usize);

        impl $name {
            #[inline]
            pub fn idx(self) -> usize {
                self.0
            }
        }

        impl std::fmt::Display for $name {
            fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
                write!(f, "{}", self.0)
            }
        }
    };
}

id_type!(
    /// Index of a half-edge (oriented edge).
    HalfEdgeId
);
id_type!(
    /// Index of an unoriented edge.
    EdgeId
);
id_type!(
    /// Index of a face.
    FaceId
);
id_type!(
    /// Index of a vertex.
    VertexId
);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SurfaceError {
    #[error("surface has no edges")]
    Empty,
    #[error("half-edge {0}: twin index out of range")]
    TwinOutOfRange(usize),
    #[error("half-edge {0}: next index out of range")]
    NextOutOfRange(usize),
    #[error("half-edge {0} is its own twin")]
    TwinFixedPoint(usize),
    #[error("twin map is not an involution at half-edge {0}")]
    TwinNotInvolution(usize),
    #[error("half-edge {0}: next lies in a different face")]
    NextFaceMismatch(usize),
    #[error("half-edge {0}: next does not start where this half-edge ends")]
    NextOriginMismatch(usize),
    #[error("half-edge {0} is the next of two different half-edges")]
    NextNotInjective(usize),
    #[error("face {0} has no half-edges")]
    EmptyFace(usize),
    #[error("vertex {0} is not used by any half-edge")]
    UnusedVertex(usize),
    #[error("face {0} mixes a closed cycle with other boundary pieces")]
    BadFaceBoundary(usize),
    #[error("vertex {0} is not a manifold point (its edge fan is not a single chain or cycle)")]
    NonManifoldVertex(usize),
    #[error("surface is not connected")]
    Disconnected,
    #[error("face lists glue the edge {0}->{1} twice in the same direction (non-orientable or non-manifold)")]
    NonOrientable(usize, usize),
    #[error("double edge between vertices {0} and {1}")]
    DoubleEdge(usize, usize),
    #[error("loop at vertex {0}")]
    Loop(usize),
    #[error("edge {0}->{1} has a face on one side only")]
    DanglingEdge(usize, usize),
    #[error("face {0} is too short")]
    ShortFace(usize),
    #[error("genus hint {hint} does not match computed genus {computed}")]
    GenusMismatch { hint: i64, computed: i64 },
    #[error("derived surface is degenerate: {0}")]
    Degenerate(String),
    #[error("no edges remain after removing faces")]
    NoEdgesRemain,
    #[error("{0} requires a closed surface")]
    Unsupported(&'static str),
    #[error("invalid JSON surface: {0}")]
    Json(String),
}

/// One half-edge row of the table.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HalfEdge {
    pub origin: VertexId,
    pub left_face: FaceId,
    pub twin: HalfEdgeId,
    pub next: Option<HalfEdgeId>,
}

/// A face with its boundary. For a boundary face, `boundary` is the
/// concatenation of its open walks and `walks` records their half-open ranges.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Face {
    pub boundary: Vec<HalfEdgeId>,
    pub walks: Vec<(usize, usize)>,
}

impl Face {
    pub fn is_boundary_face(&self) -> bool {
        !self.walks.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.boundary.len()
    }
}

/// A vertex with its outgoing half-edges in counterclockwise order.
/// For a boundary vertex the fan is a chain starting at the half-edge whose
/// incoming twin ends an open walk.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vertex {
    pub fan: Vec<HalfEdgeId>,
    pub on_boundary: bool,
}

impl Vertex {
    pub fn degree(&self) -> usize {
        self.fan.len()
    }
}

/// Validated oriented cellular surface.
#[derive(Clone, Debug, PartialEq)]
pub struct CellularSurface {
    half_edges: Vec<HalfEdge>,
    prev: Vec<Option<HalfEdgeId>>,
    edge_of: Vec<EdgeId>,
    edges: Vec<[HalfEdgeId; 2]>,
    faces: Vec<Face>,
    vertices: Vec<Vertex>,
}

impl CellularSurface {
    pub fn num_half_edges(&self) -> usize {
        self.half_edges.len()
    }
    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }
    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }
    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn half_edge(&self, h: HalfEdgeId) -> &HalfEdge {
        &self.half_edges[h.0]
    }
    pub fn half_edges(&self) -> impl Iterator<Item = HalfEdgeId> {
        (0..self.half_edges.len()).map(HalfEdgeId)
    }
    pub fn edge_ids(&self) -> impl Iterator<Item = EdgeId> {
        (0..self.edges.len()).map(EdgeId)
    }
    pub fn face_ids(&self) -> impl Iterator<Item = FaceId> {
        (0..self.faces.len()).map(FaceId)
    }
    pub fn vertex_ids(&self) -> impl Iterator<Item = VertexId> {
        (0..self.vertices.len()).map(VertexId)
    }

    #[inline]
    pub fn origin(&self, h: HalfEdgeId) -> VertexId {
        self.half_edges[h.0].origin
    }
    #[inline]
    pub fn terminus(&self, h: HalfEdgeId) -> VertexId {
        self.origin(self.twin(h))
    }
    #[inline]
    pub fn twin(&self, h: HalfEdgeId) -> HalfEdgeId {
        self.half_edges[h.0].twin
    }
    #[inline]
    pub fn left_face(&self, h: HalfEdgeId) -> FaceId {
        self.half_edges[h.0].left_face
    }
    #[inline]
    pub fn right_face(&self, h: HalfEdgeId) -> FaceId {
        self.left_face(self.twin(h))
    }
    #[inline]
    pub fn next(&self, h: HalfEdgeId) -> Option<HalfEdgeId> {
        self.half_edges[h.0].next
    }
    #[inline]
    pub fn prev(&self, h: HalfEdgeId) -> Option<HalfEdgeId> {
        self.prev[h.0]
    }
    /// Unoriented edge carrying `h`.
    #[inline]
    pub fn edge(&self, h: HalfEdgeId) -> EdgeId {
        self.edge_of[h.0]
    }
    /// Both half-edges of `e`; the first is the canonical representative.
    #[inline]
    pub fn edge_half_edges(&self, e: EdgeId) -> [HalfEdgeId; 2] {
        self.edges[e.0]
    }
    #[inline]
    pub fn canonical(&self, e: EdgeId) -> HalfEdgeId {
        self.edges[e.0][0]
    }

    pub fn face(&self, f: FaceId) -> &Face {
        &self.faces[f.0]
    }
    pub fn vertex(&self, v: VertexId) -> &Vertex {
        &self.vertices[v.0]
    }

    /// Counterclockwise rotation around the origin: `twin(prev(h))`.
    pub fn rotate(&self, h: HalfEdgeId) -> Option<HalfEdgeId> {
        self.prev(h).map(|p| self.twin(p))
    }

    pub fn is_closed(&self) -> bool {
        self.faces.iter().all(|f| !f.is_boundary_face())
    }

    /// Number of open walks over all boundary faces.
    pub fn num_open_walks(&self) -> usize {
        self.faces.iter().map(|f| f.walks.len()).sum()
    }

    /// Euler characteristic. Each open walk contributes one boundary arc that
    /// closes the face, so it counts as an extra edge.
    pub fn euler_characteristic(&self) -> i64 {
        self.num_faces() as i64 - (self.num_edges() + self.num_open_walks()) as i64
            + self.num_vertices() as i64
    }

    /// Number of boundary circles of the surface.
    pub fn boundary_components(&self) -> usize {
        // Boundary arcs run from the end of a walk to its start; at the start
        // vertex the boundary continues with the walk that ends there.
        let mut walk_of_end: std::collections::HashMap<VertexId, (usize, usize)> =
            std::collections::HashMap::new();
        let mut walks = Vec::new();
        for (fi, f) in self.faces.iter().enumerate() {
            for (wi, &(a, b)) in f.walks.iter().enumerate() {
                let start = self.origin(f.boundary[a]);
                let end = self.terminus(f.boundary[b - 1]);
                walk_of_end.insert(end, (fi, wi));
                walks.push(((fi, wi), start));
            }
        }
        let index: std::collections::HashMap<(usize, usize), usize> =
            walks.iter().enumerate().map(|(i, (k, _))| (*k, i)).collect();
        let mut seen = vec![false; walks.len()];
        let mut count = 0;
        for i in 0..walks.len() {
            if seen[i] {
                continue;
            }
            count += 1;
            let mut j = i;
            while !seen[j] {
                seen[j] = true;
                let start = walks[j].1;
                j = index[&walk_of_end[&start]];
            }
        }
        count
    }

    /// Genus, from `chi = 2 - 2g - b`.
    pub fn genus(&self) -> i64 {
        (2 - self.euler_characteristic() - self.boundary_components() as i64) / 2
    }

    /// Sum of per-edge values over the edges at each vertex (loops count twice).
    pub fn vertex_angle_sums(&self, theta: &[f64]) -> Vec<f64> {
        self.vertices
            .iter()
            .map(|v| v.fan.iter().map(|&h| theta[self.edge(h).0]).sum())
            .collect()
    }

    /// Faces adjacent to a vertex, one per outgoing half-edge.
    pub fn faces_around(&self, v: VertexId) -> Vec<FaceId> {
        self.vertices[v.0].fan.iter().map(|&h| self.left_face(h)).collect()
    }
}
