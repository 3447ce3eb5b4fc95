//! Property tests for invariants that hold for all inputs.

mod common;

use std::f64::consts::PI;

use circlepat::functional::{self, Geometry};
use circlepat::spherical::{cross_ratio, stereographic, stereographic_inverse_point};
use circlepat::surface::{catalog, is_isomorphic, CellularSurface};
use circlepat::specfun;
use nalgebra::Complex;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn spec_from_seed(seed: u64, geometry: Geometry) -> functional::PatternSpec {
    common::random_spec_between(&mut ChaCha8Rng::seed_from_u64(seed), 2, 10, geometry)
}

proptest! {
    #[test]
    fn clausen_is_odd_and_periodic(x in -20.0f64..20.0) {
        let c = specfun::cl(x);
        prop_assert!((c + specfun::cl(-x)).abs() < 1e-13);
        prop_assert!((c - specfun::cl(x + 2.0 * PI)).abs() < 1e-12);
        prop_assert!(c.abs() <= 1.0150);
    }

    #[test]
    fn im_li2_symmetric_sum(x in -30.0f64..30.0, theta in 0.01f64..PI - 0.01) {
        let a = specfun::im_li2(x, theta).unwrap() + specfun::im_li2(-x, theta).unwrap();
        prop_assert!((a - specfun::im_li2_symmetric(x, theta).unwrap()).abs() < 1e-10 * (1.0 + x.abs()));
    }

    #[test]
    fn im_li2_slope_is_derivative(x in -8.0f64..8.0, theta in 0.05f64..2.0 * PI - 0.05) {
        let h = 1e-5;
        let fd = (specfun::im_li2_unchecked(x + h, theta) - specfun::im_li2_unchecked(x - h, theta)) / (2.0 * h);
        prop_assert!((fd - specfun::im_li2_slope(x, theta)).abs() < 1e-7);
    }

    #[test]
    fn euclidean_gradient_sums_to_balance(seed in any::<u64>(), c in -2.0f64..2.0) {
        let spec = spec_from_seed(seed, Geometry::Euclidean);
        let rho: Vec<f64> = (0..spec.num_faces()).map(|k| ((k as f64) * 0.7 + c).sin()).collect();
        let g = functional::gradient(&spec, &rho);
        prop_assert!((g.iter().sum::<f64>() - spec.angle_balance()).abs() < 1e-9);
        // Balanced data makes the functional invariant under shifts.
        let shifted: Vec<f64> = rho.iter().map(|r| r + c).collect();
        let (a, b) = (functional::value(&spec, &rho), functional::value(&spec, &shifted));
        prop_assert!((a - b).abs() < 1e-9 * (1.0 + a.abs()));
    }

    #[test]
    fn closed_form_matches_dilogarithm_form(seed in any::<u64>(), hyperbolic in any::<bool>()) {
        let geometry = if hyperbolic { Geometry::Hyperbolic } else { Geometry::Euclidean };
        let spec = spec_from_seed(seed, geometry);
        let rho: Vec<f64> = (0..spec.num_faces())
            .map(|k| if hyperbolic { -0.3 - ((k as f64) * 1.3).sin().abs() } else { ((k as f64) * 1.3).sin() })
            .collect();
        let (a, b) = (functional::value(&spec, &rho), functional::value_dilog(&spec, &rho));
        prop_assert!((a - b).abs() < 1e-9 * (1.0 + a.abs()));
    }

    #[test]
    fn hessian_is_positive(seed in any::<u64>(), hyperbolic in any::<bool>()) {
        let geometry = if hyperbolic { Geometry::Hyperbolic } else { Geometry::Euclidean };
        let spec = spec_from_seed(seed, geometry);
        let n = spec.num_faces();
        let rho: Vec<f64> = (0..n).map(|k| if hyperbolic { -1.0 - 0.1 * k as f64 } else { 0.2 * k as f64 }).collect();
        let h = functional::hessian(&spec, &rho);
        let dense = h.to_dense();
        prop_assert!((&dense - dense.transpose()).amax() < 1e-14);
        let v: Vec<f64> = (0..n).map(|k| ((k + 1) as f64 * seed as f64 * 1e-9).sin() + if k == 0 { 1.0 } else { 0.0 }).collect();
        prop_assert!(h.quadratic_form(&v) >= -1e-14);
    }

    #[test]
    fn stereographic_round_trip(re in -50.0f64..50.0, im in -50.0f64..50.0) {
        let z = Complex::new(re, im);
        let x = stereographic_inverse_point(z);
        prop_assert!((x.norm() - 1.0).abs() < 1e-12);
        prop_assert!((stereographic(&x) - z).norm() < 1e-9 * (1.0 + z.norm()));
    }

    #[test]
    fn cross_ratio_is_moebius_invariant(
        pts in proptest::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 4),
        a in (-2.0f64..2.0, -2.0f64..2.0),
        b in (-2.0f64..2.0, -2.0f64..2.0),
    ) {
        let z: Vec<Complex<f64>> = pts.iter().map(|&(x, y)| Complex::new(x, y)).collect();
        prop_assume!((0..4).all(|i| (0..i).all(|j| (z[i] - z[j]).norm() > 0.1)));
        let (a, b) = (Complex::new(a.0, a.1), Complex::new(b.0, b.1));
        prop_assume!(a.norm() > 0.1);
        // z -> 1 / (a z + b), avoiding the pole.
        prop_assume!(z.iter().all(|w| (a * w + b).norm() > 0.1));
        let m = |w: Complex<f64>| stereographic_inverse_point(Complex::new(1.0, 0.0) / (a * w + b));
        let p = |w: Complex<f64>| stereographic_inverse_point(w);
        let before = cross_ratio(&p(z[0]), &p(z[1]), &p(z[2]), &p(z[3]));
        let after = cross_ratio(&m(z[0]), &m(z[1]), &m(z[2]), &m(z[3]));
        prop_assert!((before - after).norm() < 1e-8 * (1.0 + before.norm()));
    }

    #[test]
    fn json_floats_round_trip(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
        let text = circlepat::json::to_string(&vec![x]).unwrap();
        let back: Vec<f64> = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back[0], x);
    }
}

fn surfaces() -> Vec<CellularSurface> {
    vec![
        catalog::cube(),
        catalog::prism(5),
        catalog::torus_grid(3, 2),
        catalog::torus_triangulated(3, 3),
        catalog::one_face_surface(2),
        catalog::grid_disc(3),
    ]
}

#[test]
fn records_round_trip() {
    for s in surfaces() {
        let t = CellularSurface::from_half_edges(&s.to_records()).unwrap();
        assert!(is_isomorphic(&s, &t));
        assert_eq!(s.genus(), t.genus());
    }
}

#[test]
fn double_dual_is_isomorphic() {
    for s in surfaces().into_iter().filter(|s| s.is_closed()) {
        let dd = s.dual().unwrap().dual().unwrap();
        assert!(is_isomorphic(&s, &dd));
        assert_eq!(s.dual().unwrap().genus(), s.genus());
    }
}
