//! Surfaces derived from a given one: dual, medial, quad graph, subsurfaces.

use super::{
    build::HalfEdgeRecord, CellularSurface, EdgeId, FaceId, HalfEdgeId, SurfaceError, VertexId,
};

/// Color of a quad-graph vertex.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VertexColor {
    /// Stands for a face of the original surface.
    White(FaceId),
    /// Stands for a vertex of the original surface.
    Black(VertexId),
}

/// Quad graph: one quadrilateral per edge of the original surface.
#[derive(Clone, Debug)]
pub struct QuadGraph {
    pub surface: CellularSurface,
    pub colors: Vec<VertexColor>,
    /// Original edge for each quad face.
    pub edge_of_face: Vec<EdgeId>,
}

/// Index maps from a subsurface back to its parent (new id -> old id).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SubsurfaceMap {
    pub face: Vec<FaceId>,
    pub half_edge: Vec<HalfEdgeId>,
    pub edge: Vec<EdgeId>,
    pub vertex: Vec<VertexId>,
}

impl CellularSurface {
    /// Poincare dual. Half-edge `e` of the dual crosses half-edge `e` of
    /// `self` from right to left, so edge ids carry over unchanged.
    pub fn dual(&self) -> Result<CellularSurface, SurfaceError> {
        if !self.is_closed() {
            return Err(SurfaceError::Unsupported("dual"));
        }
        let records: Vec<HalfEdgeRecord> = self
            .half_edges()
            .map(|e| HalfEdgeRecord {
                origin: self.right_face(e).0,
                left_face: self.origin(e).0,
                twin: self.twin(e).0,
                next: Some(self.rotate(e).expect("closed").0),
            })
            .collect();
        CellularSurface::from_half_edges(&records)
    }

    /// Medial decomposition. Its vertices are the edges of `self`; faces
    /// `0..|F|` are the faces of `self` and `|F| + v` the vertices. Medial edge
    /// `k` is the corner at the origin of half-edge `k`.
    pub fn medial(&self) -> Result<CellularSurface, SurfaceError> {
        if !self.is_closed() {
            return Err(SurfaceError::Unsupported("medial"));
        }
        let nf = self.num_faces();
        let mut records = Vec::with_capacity(2 * self.num_half_edges());
        for e in self.half_edges() {
            let p = self.prev(e).expect("closed");
            let nx = self.next(e).expect("closed");
            records.push(HalfEdgeRecord {
                origin: self.edge(p).0,
                left_face: self.left_face(e).0,
                twin: 2 * e.0 + 1,
                next: Some(2 * nx.0),
            });
            records.push(HalfEdgeRecord {
                origin: self.edge(e).0,
                left_face: nf + self.origin(e).0,
                twin: 2 * e.0,
                next: Some(2 * self.twin(p).0 + 1),
            });
        }
        CellularSurface::from_half_edges(&records)
    }

    /// Quad graph built directly from corners. Corners at the start of an open
    /// walk are dropped, which leaves the quads along the boundary open.
    pub fn quad_graph(&self) -> Result<QuadGraph, SurfaceError> {
        let nf = self.num_faces();
        let mut slot = vec![usize::MAX; self.num_half_edges()];
        let kept: Vec<HalfEdgeId> = self.half_edges().filter(|&e| self.prev(e).is_some()).collect();
        for (k, &e) in kept.iter().enumerate() {
            slot[e.0] = k;
        }
        let mut records = Vec::with_capacity(2 * kept.len());
        for &e in &kept {
            let p = self.prev(e).unwrap();
            let k = slot[e.0];
            let tw = self.twin(e);
            records.push(HalfEdgeRecord {
                origin: self.left_face(e).0,
                left_face: self.edge(e).0,
                twin: 2 * k + 1,
                next: self.next(tw).map(|y| 2 * slot[y.0] + 1),
            });
            records.push(HalfEdgeRecord {
                origin: nf + self.origin(e).0,
                left_face: self.edge(p).0,
                twin: 2 * k,
                next: self.prev(p).map(|_| 2 * slot[p.0]),
            });
        }
        let mut used_face = vec![false; self.num_edges()];
        let mut used_vertex = vec![false; nf + self.num_vertices()];
        for r in &records {
            used_face[r.left_face] = true;
            used_vertex[r.origin] = true;
        }
        if let Some(e) = used_face.iter().position(|u| !u) {
            return Err(SurfaceError::Degenerate(format!("edge {e} has no quad corners")));
        }
        // Boundary vertices whose corners were all dropped do not appear.
        let all_colors: Vec<VertexColor> = (0..nf)
            .map(|f| VertexColor::White(FaceId(f)))
            .chain(self.vertex_ids().map(VertexColor::Black))
            .collect();
        let mut renumber = vec![usize::MAX; used_vertex.len()];
        let mut colors = Vec::new();
        for (i, &u) in used_vertex.iter().enumerate() {
            if u {
                renumber[i] = colors.len();
                colors.push(all_colors[i]);
            }
        }
        for r in &mut records {
            r.origin = renumber[r.origin];
        }
        let surface = CellularSurface::from_half_edges(&records)?;
        Ok(QuadGraph { surface, colors, edge_of_face: self.edge_ids().collect() })
    }

    /// Subsurface obtained by deleting the given faces and every edge incident
    /// to them. Faces that lose edges become boundary faces.
    pub fn remove_faces(
        &self,
        removed: &[FaceId],
    ) -> Result<(CellularSurface, SubsurfaceMap), SurfaceError> {
        let mut gone = vec![false; self.num_faces()];
        for f in removed {
            gone[f.0] = true;
        }
        let keep_he: Vec<bool> = self
            .half_edges()
            .map(|h| !gone[self.left_face(h).0] && !gone[self.right_face(h).0])
            .collect();
        let mut map = SubsurfaceMap::default();
        let mut new_he = vec![usize::MAX; self.num_half_edges()];
        for h in self.half_edges() {
            if keep_he[h.0] {
                new_he[h.0] = map.half_edge.len();
                map.half_edge.push(h);
            }
        }
        if map.half_edge.is_empty() {
            return Err(SurfaceError::NoEdgesRemain);
        }
        let mut new_face = vec![usize::MAX; self.num_faces()];
        for f in self.face_ids() {
            if !gone[f.0] {
                new_face[f.0] = map.face.len();
                map.face.push(f);
            }
        }
        let mut new_vertex = vec![usize::MAX; self.num_vertices()];
        for v in self.vertex_ids() {
            if self.vertex(v).fan.iter().any(|h| keep_he[h.0]) {
                new_vertex[v.0] = map.vertex.len();
                map.vertex.push(v);
            }
        }
        let records: Vec<HalfEdgeRecord> = map
            .half_edge
            .iter()
            .map(|&h| HalfEdgeRecord {
                origin: new_vertex[self.origin(h).0],
                left_face: new_face[self.left_face(h).0],
                twin: new_he[self.twin(h).0],
                next: self.next(h).filter(|n| keep_he[n.0]).map(|n| new_he[n.0]),
            })
            .collect();
        let sub = CellularSurface::from_half_edges(&records)?;
        map.edge = sub.edge_ids().map(|e| self.edge(map.half_edge[sub.canonical(e).0])).collect();
        Ok((sub, map))
    }

    /// Splits edge `e` by a new vertex; the new half-edges are appended.
    pub fn subdivide_edge(&self, e: EdgeId) -> CellularSurface {
        let mut r = self.to_records();
        let [h, t] = self.edge_half_edges(e);
        let n = r.len();
        let m = self.num_vertices();
        r.push(HalfEdgeRecord {
            origin: m,
            left_face: r[h.0].left_face,
            twin: t.0,
            next: r[h.0].next,
        });
        r.push(HalfEdgeRecord {
            origin: m,
            left_face: r[t.0].left_face,
            twin: h.0,
            next: r[t.0].next,
        });
        r[h.0].twin = n + 1;
        r[h.0].next = Some(n);
        r[t.0].twin = n;
        r[t.0].next = Some(n + 1);
        CellularSurface::from_half_edges(&r).expect("subdivision keeps validity")
    }
}
