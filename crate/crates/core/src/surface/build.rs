//! Construction and validation of half-edge tables.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{
    CellularSurface, EdgeId, Face, FaceId, HalfEdge, HalfEdgeId, SurfaceError, Vertex, VertexId,
};

/// Raw half-edge row as it appears in input files.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HalfEdgeRecord {
    pub origin: usize,
    pub left_face: usize,
    pub twin: usize,
    #[serde(default)]
    pub next: Option<usize>,
}

/// Faces given as vertex lists, counterclockwise. Closed faces list a cycle
/// `[v0, .., vk-1]`; faces named in `open_faces` list an open walk
/// `[v0, .., vk]` whose last vertex does not connect back to the first.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaceListInput {
    pub faces: Vec<Vec<usize>>,
    #[serde(default)]
    pub open_faces: Vec<usize>,
    #[serde(default)]
    pub genus: Option<i64>,
}

/// Either mesh schema accepted in input files.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MeshInput {
    Table {
        oriented_edges: Vec<HalfEdgeRecord>,
        #[serde(default)]
        genus: Option<i64>,
    },
    Faces(FaceListInput),
}

impl MeshInput {
    pub fn build(&self) -> Result<CellularSurface, SurfaceError> {
        match self {
            MeshInput::Table { oriented_edges, genus } => {
                let s = CellularSurface::from_half_edges(oriented_edges)?;
                if let Some(g) = genus {
                    s.check_genus(*g)?;
                }
                Ok(s)
            }
            MeshInput::Faces(f) => CellularSurface::from_face_lists(f),
        }
    }

    pub fn from_json(text: &str) -> Result<CellularSurface, SurfaceError> {
        let m: MeshInput = serde_json::from_str(text).map_err(|e| SurfaceError::Json(e.to_string()))?;
        m.build()
    }
}

struct Dsu(Vec<usize>);

impl Dsu {
    fn new(n: usize) -> Self {
        Dsu((0..n).collect())
    }
    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }
    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a != b {
            self.0[a] = b;
        }
    }
}

impl CellularSurface {
    /// Builds and validates a surface from half-edge rows.
    pub fn from_half_edges(records: &[HalfEdgeRecord]) -> Result<Self, SurfaceError> {
        let n = records.len();
        if n == 0 {
            return Err(SurfaceError::Empty);
        }
        for (i, r) in records.iter().enumerate() {
            if r.twin >= n {
                return Err(SurfaceError::TwinOutOfRange(i));
            }
            if r.twin == i {
                return Err(SurfaceError::TwinFixedPoint(i));
            }
            if records[r.twin].twin != i {
                return Err(SurfaceError::TwinNotInvolution(i));
            }
            if let Some(nx) = r.next {
                if nx >= n {
                    return Err(SurfaceError::NextOutOfRange(i));
                }
            }
        }
        let mut prev: Vec<Option<HalfEdgeId>> = vec![None; n];
        for (i, r) in records.iter().enumerate() {
            if let Some(nx) = r.next {
                if records[nx].left_face != r.left_face {
                    return Err(SurfaceError::NextFaceMismatch(i));
                }
                if records[nx].origin != records[r.twin].origin {
                    return Err(SurfaceError::NextOriginMismatch(i));
                }
                if prev[nx].is_some() {
                    return Err(SurfaceError::NextNotInjective(nx));
                }
                prev[nx] = Some(HalfEdgeId(i));
            }
        }

        let num_faces = records.iter().map(|r| r.left_face).max().unwrap() + 1;
        let num_vertices = records.iter().map(|r| r.origin).max().unwrap() + 1;
        let mut by_face: Vec<Vec<usize>> = vec![Vec::new(); num_faces];
        let mut by_vertex: Vec<Vec<usize>> = vec![Vec::new(); num_vertices];
        for (i, r) in records.iter().enumerate() {
            by_face[r.left_face].push(i);
            by_vertex[r.origin].push(i);
        }
        if let Some(f) = by_face.iter().position(|l| l.is_empty()) {
            return Err(SurfaceError::EmptyFace(f));
        }
        if let Some(v) = by_vertex.iter().position(|l| l.is_empty()) {
            return Err(SurfaceError::UnusedVertex(v));
        }

        let half_edges: Vec<HalfEdge> = records
            .iter()
            .map(|r| HalfEdge {
                origin: VertexId(r.origin),
                left_face: FaceId(r.left_face),
                twin: HalfEdgeId(r.twin),
                next: r.next.map(HalfEdgeId),
            })
            .collect();

        // Faces: open walks first (ordered by their first half-edge), or one cycle.
        let mut faces = Vec::with_capacity(num_faces);
        for (fi, list) in by_face.iter().enumerate() {
            let mut boundary = Vec::new();
            let mut walks = Vec::new();
            let mut seen = 0usize;
            for &h in list {
                if prev[h].is_none() {
                    let a = boundary.len();
                    let mut cur = Some(HalfEdgeId(h));
                    while let Some(c) = cur {
                        boundary.push(c);
                        cur = half_edges[c.0].next;
                    }
                    seen += boundary.len() - a;
                    walks.push((a, boundary.len()));
                }
            }
            if walks.is_empty() {
                let start = HalfEdgeId(list[0]);
                let mut c = start;
                loop {
                    boundary.push(c);
                    c = half_edges[c.0].next.expect("closed face");
                    if c == start {
                        break;
                    }
                }
                seen = boundary.len();
            }
            if seen != list.len() {
                return Err(SurfaceError::BadFaceBoundary(fi));
            }
            faces.push(Face { boundary, walks });
        }

        // Vertices: one fan per vertex, a chain or a cycle.
        let mut vertices = Vec::with_capacity(num_vertices);
        for (vi, list) in by_vertex.iter().enumerate() {
            let starts: Vec<usize> = list
                .iter()
                .copied()
                .filter(|&h| half_edges[half_edges[h].twin.0].next.is_none())
                .collect();
            let mut fan = Vec::new();
            match starts.len() {
                0 => {
                    let start = HalfEdgeId(list[0]);
                    let mut c = start;
                    loop {
                        fan.push(c);
                        match prev[c.0] {
                            Some(p) => c = half_edges[p.0].twin,
                            None => return Err(SurfaceError::NonManifoldVertex(vi)),
                        }
                        if c == start {
                            break;
                        }
                        if fan.len() > list.len() {
                            return Err(SurfaceError::NonManifoldVertex(vi));
                        }
                    }
                }
                1 => {
                    let mut cur = Some(HalfEdgeId(starts[0]));
                    while let Some(c) = cur {
                        fan.push(c);
                        if fan.len() > list.len() {
                            return Err(SurfaceError::NonManifoldVertex(vi));
                        }
                        cur = prev[c.0].map(|p| half_edges[p.0].twin);
                    }
                }
                _ => return Err(SurfaceError::NonManifoldVertex(vi)),
            }
            if fan.len() != list.len() {
                return Err(SurfaceError::NonManifoldVertex(vi));
            }
            vertices.push(Vertex { on_boundary: starts.len() == 1, fan });
        }

        let mut edge_of = vec![EdgeId(usize::MAX); n];
        let mut edges = Vec::with_capacity(n / 2);
        for i in 0..n {
            if edge_of[i].0 == usize::MAX {
                let t = records[i].twin;
                let e = EdgeId(edges.len());
                edge_of[i] = e;
                edge_of[t] = e;
                edges.push([HalfEdgeId(i), HalfEdgeId(t)]);
            }
        }

        let mut dsu = Dsu::new(n);
        for (i, r) in records.iter().enumerate() {
            dsu.union(i, r.twin);
            if let Some(nx) = r.next {
                dsu.union(i, nx);
            }
        }
        for list in &by_face {
            for w in list.windows(2) {
                dsu.union(w[0], w[1]);
            }
        }
        let root = dsu.find(0);
        if (1..n).any(|i| dsu.find(i) != root) {
            return Err(SurfaceError::Disconnected);
        }

        Ok(CellularSurface { half_edges, prev, edge_of, edges, faces, vertices })
    }

    /// Builds a surface from counterclockwise face lists.
    pub fn from_face_lists(input: &FaceListInput) -> Result<Self, SurfaceError> {
        let mut open = vec![false; input.faces.len()];
        for &f in &input.open_faces {
            if f >= input.faces.len() {
                return Err(SurfaceError::EmptyFace(f));
            }
            open[f] = true;
        }
        // (origin, terminus, face, position, is_last_of_open_walk)
        let mut darts: Vec<(usize, usize, usize)> = Vec::new();
        let mut next: Vec<Option<usize>> = Vec::new();
        for (fi, verts) in input.faces.iter().enumerate() {
            let k = verts.len();
            let base = darts.len();
            if open[fi] {
                if k < 2 {
                    return Err(SurfaceError::ShortFace(fi));
                }
                for i in 0..k - 1 {
                    darts.push((verts[i], verts[i + 1], fi));
                    next.push(if i + 2 < k { Some(base + i + 1) } else { None });
                }
            } else {
                if k < 1 {
                    return Err(SurfaceError::ShortFace(fi));
                }
                for i in 0..k {
                    darts.push((verts[i], verts[(i + 1) % k], fi));
                    next.push(Some(base + (i + 1) % k));
                }
            }
        }
        let mut by_pair: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
        for (i, &(u, v, _)) in darts.iter().enumerate() {
            if u == v {
                return Err(SurfaceError::Loop(u));
            }
            by_pair.entry((u, v)).or_default().push(i);
        }
        let mut records = Vec::with_capacity(darts.len());
        for (i, &(u, v, f)) in darts.iter().enumerate() {
            let fwd = by_pair[&(u, v)].len();
            let back = by_pair.get(&(v, u)).map_or(0, |l| l.len());
            if back == 0 {
                if fwd > 1 {
                    return Err(SurfaceError::NonOrientable(u, v));
                }
                return Err(SurfaceError::DanglingEdge(u, v));
            }
            if fwd != back {
                return Err(SurfaceError::NonOrientable(u, v));
            }
            if fwd > 1 {
                return Err(SurfaceError::DoubleEdge(u.min(v), u.max(v)));
            }
            records.push(HalfEdgeRecord {
                origin: u,
                left_face: f,
                twin: by_pair[&(v, u)][0],
                next: next[i],
            });
        }
        let s = Self::from_half_edges(&records)?;
        if let Some(g) = input.genus {
            s.check_genus(g)?;
        }
        Ok(s)
    }

    /// Fails unless the computed genus equals `hint`.
    pub fn check_genus(&self, hint: i64) -> Result<(), SurfaceError> {
        let computed = self.genus();
        if computed != hint {
            return Err(SurfaceError::GenusMismatch { hint, computed });
        }
        Ok(())
    }

    /// Half-edge rows of this surface (inverse of [`CellularSurface::from_half_edges`]).
    pub fn to_records(&self) -> Vec<HalfEdgeRecord> {
        self.half_edges
            .iter()
            .map(|h| HalfEdgeRecord {
                origin: h.origin.0,
                left_face: h.left_face.0,
                twin: h.twin.0,
                next: h.next.map(|x| x.0),
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_json_schemas() {
        let a = MeshInput::from_json(r#"{"faces": [[0, 1, 2], [0, 2, 3], [0, 3, 1], [1, 3, 2]]}"#).unwrap();
        let recs = serde_json::to_string(&a.to_records()).unwrap();
        let b = MeshInput::from_json(&format!(r#"{{"oriented_edges": {recs}}}"#)).unwrap();
        assert_eq!(a, b);
        assert!(matches!(MeshInput::from_json("{\"faces\": 3}"), Err(SurfaceError::Json(_))));
    }

    fn fl(faces: Vec<Vec<usize>>) -> FaceListInput {
        FaceListInput { faces, open_faces: vec![], genus: None }
    }

    #[test]
    fn rejects_non_orientable_gluing() {
        let r = CellularSurface::from_face_lists(&fl(vec![vec![0, 1, 2], vec![0, 1, 3]]));
        assert!(matches!(r, Err(SurfaceError::NonOrientable(0, 1))));
    }

    #[test]
    fn rejects_dangling_edge() {
        let r = CellularSurface::from_face_lists(&fl(vec![vec![0, 1, 2]]));
        assert!(matches!(r, Err(SurfaceError::DanglingEdge(..))));
    }

    #[test]
    fn rejects_loops_and_double_edges() {
        let r = CellularSurface::from_face_lists(&fl(vec![vec![0, 0, 1]]));
        assert!(matches!(r, Err(SurfaceError::Loop(0))));
        let r = CellularSurface::from_face_lists(&fl(vec![
            vec![0, 1, 2, 1],
            vec![1, 0, 1, 2],
        ]));
        assert!(r.is_err());
    }

    #[test]
    fn rejects_disconnected() {
        let mut faces = super::super::catalog::tetrahedron_faces();
        let shifted: Vec<Vec<usize>> =
            faces.iter().map(|f| f.iter().map(|v| v + 4).collect()).collect();
        faces.extend(shifted);
        let r = CellularSurface::from_face_lists(&fl(faces));
        assert_eq!(r, Err(SurfaceError::Disconnected));
    }

    #[test]
    fn rejects_bad_twin_tables() {
        let recs = vec![
            HalfEdgeRecord { origin: 0, left_face: 0, twin: 1, next: Some(1) },
            HalfEdgeRecord { origin: 1, left_face: 0, twin: 2, next: Some(0) },
            HalfEdgeRecord { origin: 0, left_face: 0, twin: 0, next: None },
        ];
        assert!(matches!(
            CellularSurface::from_half_edges(&recs),
            Err(SurfaceError::TwinNotInvolution(_))
        ));
        let recs = vec![HalfEdgeRecord { origin: 0, left_face: 0, twin: 0, next: None }];
        assert_eq!(CellularSurface::from_half_edges(&recs), Err(SurfaceError::TwinFixedPoint(0)));
        assert_eq!(CellularSurface::from_half_edges(&[]), Err(SurfaceError::Empty));
    }

    #[test]
    fn rejects_pinched_vertex() {
        // Two chord discs sharing vertex 0 only.
        let input = FaceListInput {
            faces: vec![vec![0, 1], vec![1, 0], vec![0, 2], vec![2, 0]],
            open_faces: vec![0, 1, 2, 3],
            genus: None,
        };
        assert_eq!(
            CellularSurface::from_face_lists(&input),
            Err(SurfaceError::NonManifoldVertex(0))
        );
    }

    #[test]
    fn genus_hint_checked() {
        let mut input = fl(super::super::catalog::tetrahedron_faces());
        input.genus = Some(0);
        assert!(CellularSurface::from_face_lists(&input).is_ok());
        input.genus = Some(1);
        assert_eq!(
            CellularSurface::from_face_lists(&input),
            Err(SurfaceError::GenusMismatch { hint: 1, computed: 0 })
        );
    }

    #[test]
    fn single_chord_disc() {
        // A disc cut by one chord: two boundary faces, each one open walk.
        let input = FaceListInput {
            faces: vec![vec![0, 1], vec![1, 0]],
            open_faces: vec![0, 1],
            genus: None,
        };
        let s = CellularSurface::from_face_lists(&input).unwrap();
        assert_eq!(s.euler_characteristic(), 1);
        assert_eq!(s.boundary_components(), 1);
        assert!(s.vertex_ids().all(|v| s.vertex(v).on_boundary));
    }

    #[test]
    fn records_round_trip() {
        let s = super::super::catalog::cube();
        let t = CellularSurface::from_half_edges(&s.to_records()).unwrap();
        assert_eq!(s, t);
    }
}
