//! Brute-force isomorphism test for oriented cellular surfaces.

use super::{CellularSurface, HalfEdgeId};

/// Whether an orientation-preserving combinatorial isomorphism exists.
/// Tries every image of half-edge 0 and propagates along twin/next/prev.
pub fn is_isomorphic(a: &CellularSurface, b: &CellularSurface) -> bool {
    if a.num_half_edges() != b.num_half_edges()
        || a.num_faces() != b.num_faces()
        || a.num_vertices() != b.num_vertices()
    {
        return false;
    }
    b.half_edges().any(|root| try_root(a, b, root))
}

fn try_root(a: &CellularSurface, b: &CellularSurface, root: HalfEdgeId) -> bool {
    let n = a.num_half_edges();
    let mut map: Vec<Option<HalfEdgeId>> = vec![None; n];
    let mut inv: Vec<Option<HalfEdgeId>> = vec![None; n];
    let mut stack = vec![(HalfEdgeId(0), root)];
    let mut bind = |x: HalfEdgeId,
                    y: HalfEdgeId,
                    map: &mut Vec<Option<HalfEdgeId>>,
                    stack: &mut Vec<(HalfEdgeId, HalfEdgeId)>|
     -> bool {
        match (map[x.0], inv[y.0]) {
            (Some(m), _) => m == y,
            (None, Some(_)) => false,
            (None, None) => {
                map[x.0] = Some(y);
                inv[y.0] = Some(x);
                stack.push((x, y));
                true
            }
        }
    };
    let (x0, y0) = stack.pop().unwrap();
    if !bind(x0, y0, &mut map, &mut stack) {
        return false;
    }
    while let Some((x, y)) = stack.pop() {
        if !bind(a.twin(x), b.twin(y), &mut map, &mut stack) {
            return false;
        }
        for (nx, ny) in [(a.next(x), b.next(y)), (a.prev(x), b.prev(y))] {
            match (nx, ny) {
                (Some(p), Some(q)) => {
                    if !bind(p, q, &mut map, &mut stack) {
                        return false;
                    }
                }
                (None, None) => {}
                _ => return false,
            }
        }
    }
    if map.iter().any(|m| m.is_none()) {
        return false;
    }
    // Faces may consist of several walks, so check the induced maps explicitly.
    let mut face = vec![usize::MAX; a.num_faces()];
    let mut face_inv = vec![usize::MAX; b.num_faces()];
    let mut vert = vec![usize::MAX; a.num_vertices()];
    let mut vert_inv = vec![usize::MAX; b.num_vertices()];
    for x in a.half_edges() {
        let y = map[x.0].unwrap();
        if !consistent(&mut face, &mut face_inv, a.left_face(x).0, b.left_face(y).0)
            || !consistent(&mut vert, &mut vert_inv, a.origin(x).0, b.origin(y).0)
        {
            return false;
        }
    }
    true
}

fn consistent(fwd: &mut [usize], back: &mut [usize], i: usize, j: usize) -> bool {
    if fwd[i] == usize::MAX && back[j] == usize::MAX {
        fwd[i] = j;
        back[j] = i;
        true
    } else {
        fwd[i] == j && back[j] == i
    }
}
