//! Planar models: the Euclidean plane and the Poincare disk, both with points
//! stored as complex numbers.

use nalgebra::Complex;

pub type Point = Complex<f64>;

pub(crate) trait Model {
    /// Rotates `p` about `c` by `angle` (counterclockwise).
    fn rotate_about(&self, c: Point, p: Point, angle: f64) -> Point;
    /// The point at distance `dist` from `p` along the geodesic leaving `p`
    /// at `angle` counterclockwise from the direction toward `toward`.
    fn offset(&self, p: Point, toward: Point, angle: f64, dist: f64) -> Point;
    fn dist(&self, a: Point, b: Point) -> f64;
    /// Counterclockwise angle at `p` from the direction of `a` to that of `b`,
    /// in `(-pi, pi]`.
    fn angle_at(&self, p: Point, a: Point, b: Point) -> f64;
}

pub(crate) struct Plane;

impl Model for Plane {
    fn rotate_about(&self, c: Point, p: Point, angle: f64) -> Point {
        c + Complex::from_polar(1.0, angle) * (p - c)
    }

    fn offset(&self, p: Point, toward: Point, angle: f64, dist: f64) -> Point {
        let u = (toward - p).unscale((toward - p).norm());
        p + Complex::from_polar(dist, angle) * u
    }

    fn dist(&self, a: Point, b: Point) -> f64 {
        (a - b).norm()
    }

    fn angle_at(&self, p: Point, a: Point, b: Point) -> f64 {
        ((b - p) / (a - p)).arg()
    }
}

pub(crate) struct Disk;

/// Isometry of the disk sending `p` to the origin.
pub fn to_origin(p: Point, z: Point) -> Point {
    (z - p) / (Complex::new(1.0, 0.0) - p.conj() * z)
}

/// Inverse of [`to_origin`].
pub fn from_origin(p: Point, w: Point) -> Point {
    (w + p) / (Complex::new(1.0, 0.0) + p.conj() * w)
}

impl Model for Disk {
    fn rotate_about(&self, c: Point, p: Point, angle: f64) -> Point {
        from_origin(c, Complex::from_polar(1.0, angle) * to_origin(c, p))
    }

    fn offset(&self, p: Point, toward: Point, angle: f64, dist: f64) -> Point {
        let w = to_origin(p, toward);
        let u = w.unscale(w.norm());
        from_origin(p, Complex::from_polar((0.5 * dist).tanh(), angle) * u)
    }

    fn dist(&self, a: Point, b: Point) -> f64 {
        2.0 * to_origin(a, b).norm().atanh()
    }

    fn angle_at(&self, p: Point, a: Point, b: Point) -> f64 {
        (to_origin(p, b) / to_origin(p, a)).arg()
    }
}

/// Euclidean center and radius of the disk-model circle with hyperbolic
/// center `c` and radius `r`.
pub fn hyperbolic_circle_image(c: Point, r: f64) -> (Point, f64) {
    let t = (0.5 * r).tanh();
    // Image of the circle |w| = t under w -> from_origin(c, w); the diameter
    // through the origin direction of c maps to a diameter of the image.
    let dir = if c.norm() > 0.0 { c.unscale(c.norm()) } else { Complex::new(1.0, 0.0) };
    let a = from_origin(c, dir * t);
    let b = from_origin(c, -dir * t);
    ((a + b).unscale(2.0), 0.5 * (a - b).norm())
}
