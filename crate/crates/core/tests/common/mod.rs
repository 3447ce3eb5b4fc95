//! Random pattern specs shared by the integration tests.

#![allow(dead_code)]

use std::f64::consts::PI;
use std::sync::Arc;

use circlepat::functional::{Geometry, PatternSpec};
use circlepat::surface::{catalog, CellularSurface};
use rand::Rng;

/// Catalog surfaces with at most ten faces.
pub fn small_surfaces() -> Vec<(&'static str, Arc<CellularSurface>)> {
    let mut v = vec![
        ("tetrahedron", catalog::tetrahedron()),
        ("cube", catalog::cube()),
        ("octahedron", catalog::octahedron()),
        ("torus 2x2", catalog::torus_grid(2, 2)),
        ("torus 2x3", catalog::torus_grid(2, 3)),
        ("torus 2x4", catalog::torus_grid(2, 4)),
        ("genus 2 one face", catalog::one_face_surface(2)),
        ("grid disc 2", catalog::grid_disc(2)),
        ("grid disc 3", catalog::grid_disc(3)),
    ];
    for n in 3..=8 {
        v.push(("prism", catalog::prism(n)));
    }
    v.into_iter().map(|(n, s)| (n, Arc::new(s))).collect()
}

/// Random angles on `s`. Euclidean cone angles are scaled to the balance
/// `sum Phi = sum 2 theta*`; hyperbolic ones to a random fraction of it.
pub fn random_spec(rng: &mut impl Rng, s: &Arc<CellularSurface>, geometry: Geometry) -> PatternSpec {
    let theta_star: Vec<f64> = (0..s.num_edges()).map(|_| rng.random_range(0.1..PI - 0.1)).collect();
    let weights: Vec<f64> = (0..s.num_faces()).map(|_| rng.random_range(0.5..1.5)).collect();
    let total: f64 = 2.0 * theta_star.iter().sum::<f64>();
    let scale = match geometry {
        Geometry::Euclidean => 1.0,
        Geometry::Hyperbolic => rng.random_range(0.7..1.05),
    };
    let wsum: f64 = weights.iter().sum();
    let phi = weights.iter().map(|w| scale * total * w / wsum).collect();
    PatternSpec::new(s.clone(), geometry, theta_star, phi).unwrap()
}

/// Random spec on a random catalog surface with at most `max_faces` faces.
pub fn random_small_spec(rng: &mut impl Rng, max_faces: usize, geometry: Geometry) -> PatternSpec {
    random_spec_between(rng, 1, max_faces, geometry)
}

pub fn random_spec_between(rng: &mut impl Rng, min_faces: usize, max_faces: usize, geometry: Geometry) -> PatternSpec {
    let pool: Vec<_> = small_surfaces()
        .into_iter()
        .filter(|(_, s)| (min_faces..=max_faces).contains(&s.num_faces()))
        .collect();
    let (_, s) = &pool[rng.random_range(0..pool.len())];
    random_spec(rng, s, geometry)
}

pub fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn centered(v: &[f64]) -> Vec<f64> {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    v.iter().map(|x| x - m).collect()
}
