//! Standard surfaces used by examples, tests and the CLI demos.

use super::{CellularSurface, FaceListInput, HalfEdgeId, HalfEdgeRecord};

fn from_faces(faces: Vec<Vec<usize>>) -> CellularSurface {
    CellularSurface::from_face_lists(&FaceListInput { faces, open_faces: vec![], genus: None })
        .expect("catalog surface is valid")
}

/// Reverses faces whose normal points towards the origin (convex solids only).
fn orient_outward(points: &[[f64; 3]], faces: &mut [Vec<usize>]) {
    for f in faces.iter_mut() {
        let (a, b, c) = (points[f[0]], points[f[1]], points[f[2]]);
        let u = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
        let v = [c[0] - b[0], c[1] - b[1], c[2] - b[2]];
        let n = [u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]];
        if n[0] * a[0] + n[1] * a[1] + n[2] * a[2] < 0.0 {
            f.reverse();
        }
    }
}

pub fn tetrahedron_faces() -> Vec<Vec<usize>> {
    vec![vec![0, 1, 2], vec![0, 2, 3], vec![0, 3, 1], vec![1, 3, 2]]
}

pub fn tetrahedron() -> CellularSurface {
    from_faces(tetrahedron_faces())
}

/// Cube; vertex `x + 2y + 4z` sits at the corner `(x, y, z)`.
pub fn cube() -> CellularSurface {
    let pts: Vec<[f64; 3]> = (0..8)
        .map(|i| [(i & 1) as f64 - 0.5, ((i >> 1) & 1) as f64 - 0.5, ((i >> 2) & 1) as f64 - 0.5])
        .collect();
    let mut faces = vec![
        vec![0, 2, 3, 1],
        vec![4, 5, 7, 6],
        vec![0, 1, 5, 4],
        vec![2, 6, 7, 3],
        vec![0, 4, 6, 2],
        vec![1, 3, 7, 5],
    ];
    orient_outward(&pts, &mut faces);
    from_faces(faces)
}

/// Octahedron with vertices `+x, -x, +y, -y, +z, -z`.
pub fn octahedron() -> CellularSurface {
    let pts = [
        [1.0, 0.0, 0.0],
        [-1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, -1.0, 0.0],
        [0.0, 0.0, 1.0],
        [0.0, 0.0, -1.0],
    ];
    let mut faces = Vec::new();
    for x in [0, 1] {
        for y in [2, 3] {
            for z in [4, 5] {
                faces.push(vec![x, y, z]);
            }
        }
    }
    orient_outward(&pts, &mut faces);
    from_faces(faces)
}

/// Prism over an n-gon: faces 0 and 1 are the caps, then n side quads.
pub fn prism(n: usize) -> CellularSurface {
    assert!(n >= 3);
    let mut pts = Vec::new();
    for z in [-1.0, 1.0] {
        for i in 0..n {
            let t = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
            pts.push([t.cos(), t.sin(), z]);
        }
    }
    let mut faces = vec![(0..n).collect::<Vec<_>>(), (n..2 * n).collect()];
    for i in 0..n {
        let j = (i + 1) % n;
        faces.push(vec![i, j, n + j, n + i]);
    }
    orient_outward(&pts, &mut faces);
    from_faces(faces)
}

/// Square grid on a torus with `m` columns and `n` rows. Face `i + m*j` is the
/// square with lower-left vertex `i + m*j`. Built in table form, so `m` or `n`
/// may be 1 or 2 (loops and multiple edges appear then).
pub fn torus_grid(m: usize, n: usize) -> CellularSurface {
    assert!(m >= 1 && n >= 1);
    let idx = |i: usize, j: usize| (i % m) + m * (j % n);
    // Four half-edges per cell: horizontal forward/back, vertical forward/back.
    let hf = |i: usize, j: usize| 4 * idx(i, j);
    let hb = |i: usize, j: usize| 4 * idx(i, j) + 1;
    let uf = |i: usize, j: usize| 4 * idx(i, j) + 2;
    let ub = |i: usize, j: usize| 4 * idx(i, j) + 3;
    let mut recs = vec![HalfEdgeRecord { origin: 0, left_face: 0, twin: 0, next: None }; 4 * m * n];
    for j in 0..n {
        for i in 0..m {
            let (ip, jp) = (i + 1, j + 1);
            let (im, jm) = (i + m - 1, j + n - 1);
            recs[hf(i, j)] = HalfEdgeRecord {
                origin: idx(i, j),
                left_face: idx(i, j),
                twin: hb(i, j),
                next: Some(uf(ip, j)),
            };
            recs[hb(i, j)] = HalfEdgeRecord {
                origin: idx(ip, j),
                left_face: idx(i, jm),
                twin: hf(i, j),
                next: Some(ub(i, jm)),
            };
            recs[uf(i, j)] = HalfEdgeRecord {
                origin: idx(i, j),
                left_face: idx(im, j),
                twin: ub(i, j),
                next: Some(hb(im, jp)),
            };
            recs[ub(i, j)] = HalfEdgeRecord {
                origin: idx(i, jp),
                left_face: idx(i, j),
                twin: uf(i, j),
                next: Some(hf(i, j)),
            };
        }
    }
    CellularSurface::from_half_edges(&recs).expect("torus grid is valid")
}

/// Torus grid with every square cut by its diagonal (needs `m, n >= 3`).
pub fn torus_triangulated(m: usize, n: usize) -> CellularSurface {
    assert!(m >= 3 && n >= 3);
    let v = |i: usize, j: usize| (i % m) + m * (j % n);
    let mut faces = Vec::new();
    for j in 0..n {
        for i in 0..m {
            faces.push(vec![v(i, j), v(i + 1, j), v(i + 1, j + 1)]);
            faces.push(vec![v(i, j), v(i + 1, j + 1), v(i, j + 1)]);
        }
    }
    from_faces(faces)
}

/// One-vertex, one-face surface of genus `g >= 1` with boundary word
/// `a1 b1 a1^-1 b1^-1 ... ag bg ag^-1 bg^-1`.
pub fn one_face_surface(g: usize) -> CellularSurface {
    assert!(g >= 1);
    let k = 4 * g;
    let recs: Vec<HalfEdgeRecord> = (0..k)
        .map(|i| HalfEdgeRecord {
            origin: 0,
            left_face: 0,
            twin: if i % 4 < 2 { i + 2 } else { i - 2 },
            next: Some((i + 1) % k),
        })
        .collect();
    CellularSurface::from_half_edges(&recs).expect("polygon gluing is valid")
}

/// Square-grid disc: the unit squares of `[0, k]^2`, with grid lines stopping
/// at the boundary of the square. Boundary squares are boundary faces; the four
/// corners of the big square are not vertices. Needs `k >= 2`.
pub fn grid_disc(k: usize) -> CellularSurface {
    assert!(k >= 2);
    let mut ids = std::collections::HashMap::new();
    let mut vid = |p: (usize, usize)| {
        let next = ids.len();
        *ids.entry(p).or_insert(next)
    };
    let mut faces = Vec::new();
    let mut open = Vec::new();
    for j in 0..k {
        for i in 0..k {
            let corners = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)];
            // Side s runs from corners[s] to corners[s+1]: bottom, right, top, left.
            let real = [j > 0, i + 1 < k, j + 1 < k, i > 0];
            if real.iter().all(|&r| r) {
                faces.push(corners.iter().map(|&p| vid(p)).collect());
                continue;
            }
            let start = (0..4).find(|&s| real[s] && !real[(s + 3) % 4]).unwrap();
            let mut walk = vec![vid(corners[start])];
            let mut s = start;
            while real[s] {
                walk.push(vid(corners[(s + 1) % 4]));
                s = (s + 1) % 4;
            }
            open.push(faces.len());
            faces.push(walk);
        }
    }
    CellularSurface::from_face_lists(&FaceListInput { faces, open_faces: open, genus: None })
        .expect("grid disc is valid")
}

impl CellularSurface {
    /// Splits a closed face by a new edge from `origin(b)` to `origin(a)`;
    /// `a` and `b` must be distinct half-edges of the same closed face. The
    /// part containing `a` keeps the old face id.
    pub fn split_face(&self, a: HalfEdgeId, b: HalfEdgeId) -> CellularSurface {
        let f = self.left_face(a);
        assert!(a != b && self.left_face(b) == f && !self.face(f).is_boundary_face());
        let mut r = self.to_records();
        let n = r.len();
        let nf = self.num_faces();
        let (x, y) = (n, n + 1);
        let pa = self.prev(a).unwrap();
        let pb = self.prev(b).unwrap();
        let mut c = b;
        while c != a {
            r[c.0].left_face = nf;
            c = self.next(c).unwrap();
        }
        r.push(HalfEdgeRecord { origin: self.origin(a).0, left_face: nf, twin: y, next: Some(b.0) });
        r.push(HalfEdgeRecord { origin: self.origin(b).0, left_face: f.0, twin: x, next: Some(a.0) });
        r[pa.0].next = Some(x);
        r[pb.0].next = Some(y);
        CellularSurface::from_half_edges(&r).expect("face split keeps validity")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_counts() {
        let c = |s: &CellularSurface| (s.num_faces(), s.num_edges(), s.num_vertices());
        assert_eq!(c(&cube()), (6, 12, 8));
        assert_eq!(c(&octahedron()), (8, 12, 6));
        assert_eq!(c(&prism(5)), (7, 15, 10));
        assert_eq!(c(&torus_triangulated(3, 3)), (18, 27, 9));
        assert_eq!(torus_triangulated(3, 4).genus(), 1);
        let g2 = one_face_surface(2);
        assert_eq!(c(&g2), (1, 4, 1));
        assert_eq!(g2.genus(), 2);
        assert_eq!(one_face_surface(3).genus(), 3);
    }

    #[test]
    fn split_face_adds_face_and_edge() {
        let s = one_face_surface(2);
        let t = s.split_face(HalfEdgeId(0), HalfEdgeId(3));
        assert_eq!((t.num_faces(), t.num_edges()), (2, 5));
        assert_eq!(t.genus(), 2);
        let c = cube().split_face(HalfEdgeId(0), HalfEdgeId(2));
        assert_eq!((c.num_faces(), c.num_edges()), (7, 13));
    }
}
