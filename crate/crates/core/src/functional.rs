//! Euclidean and hyperbolic circle-pattern functionals.
//!
//! Variables are `rho_f`, one per face: `rho = log r` for Euclidean circles and
//! `rho = log tanh(r/2)` for hyperbolic ones. For a half-edge `e` with face
//! `j` on its left and `k` on its right, the kite half-angle at the center of
//! circle `j` is `phi_e`. The gradient of either functional is
//! `Phi_f - 2 sum phi_e` over the half-edges with `f` on their left, so
//! critical points are exactly the coherent angle systems of a pattern.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::specfun::{cl, half_tangent_angle, im_li2_slope, im_li2_unchecked};
use crate::surface::{CellularSurface, EdgeId, FaceId, HalfEdgeId};

/// Default tolerance for the coherent-angle-system invariants.
pub const CAS_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Geometry {
    Euclidean,
    Hyperbolic,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecError {
    #[error("expected {expected} {what}, got {got}")]
    Length { what: &'static str, expected: usize, got: usize },
    #[error("edge {edge}: intersection angle {value} not in (0, pi)")]
    ThetaStar { edge: usize, value: f64 },
    #[error("face {face}: cone angle {value} not positive and finite")]
    Phi { face: usize, value: f64 },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FunctionalError {
    #[error("not a coherent angle system: {0}")]
    InvalidCas(String),
    #[error("hyperbolic radius requires rho < 0 (face {face}, rho {rho})")]
    HyperbolicRho { face: usize, rho: f64 },
}

/// Combinatorics plus prescribed angles: interior intersection angles
/// `theta*` per edge and cone/boundary angles `Phi` per face.
#[derive(Clone, Debug, PartialEq)]
pub struct PatternSpec {
    surface: Arc<CellularSurface>,
    geometry: Geometry,
    theta_star: Vec<f64>,
    phi_target: Vec<f64>,
}

impl PatternSpec {
    pub fn new(
        surface: Arc<CellularSurface>,
        geometry: Geometry,
        theta_star: Vec<f64>,
        phi_target: Vec<f64>,
    ) -> Result<Self, SpecError> {
        if theta_star.len() != surface.num_edges() {
            return Err(SpecError::Length {
                what: "edge angles",
                expected: surface.num_edges(),
                got: theta_star.len(),
            });
        }
        if phi_target.len() != surface.num_faces() {
            return Err(SpecError::Length {
                what: "face angles",
                expected: surface.num_faces(),
                got: phi_target.len(),
            });
        }
        for (edge, &value) in theta_star.iter().enumerate() {
            if !(value > 0.0 && value < PI) {
                return Err(SpecError::ThetaStar { edge, value });
            }
        }
        for (face, &value) in phi_target.iter().enumerate() {
            if !(value > 0.0 && value.is_finite()) {
                return Err(SpecError::Phi { face, value });
            }
        }
        Ok(PatternSpec { surface, geometry, theta_star, phi_target })
    }

    pub fn surface(&self) -> &CellularSurface {
        &self.surface
    }
    pub fn surface_arc(&self) -> &Arc<CellularSurface> {
        &self.surface
    }
    pub fn geometry(&self) -> Geometry {
        self.geometry
    }
    pub fn num_faces(&self) -> usize {
        self.phi_target.len()
    }
    pub fn theta_star(&self, e: EdgeId) -> f64 {
        self.theta_star[e.0]
    }
    /// Exterior intersection angle `pi - theta*`.
    pub fn theta(&self, e: EdgeId) -> f64 {
        PI - self.theta_star[e.0]
    }
    pub fn phi_target(&self, f: FaceId) -> f64 {
        self.phi_target[f.0]
    }
    pub fn theta_stars(&self) -> &[f64] {
        &self.theta_star
    }
    pub fn phi_targets(&self) -> &[f64] {
        &self.phi_target
    }
    pub fn thetas(&self) -> Vec<f64> {
        self.theta_star.iter().map(|t| PI - t).collect()
    }
    pub fn with_geometry(&self, geometry: Geometry) -> PatternSpec {
        PatternSpec { geometry, ..self.clone() }
    }

    /// `sum Phi_f - 2 sum theta*_e`; zero is necessary for a Euclidean pattern.
    pub fn angle_balance(&self) -> f64 {
        self.phi_target.iter().sum::<f64>() - 2.0 * self.theta_star.iter().sum::<f64>()
    }

    /// Cone angles `Theta_v` at the vertices (sums of exterior angles).
    pub fn vertex_angle_sums(&self) -> Vec<f64> {
        self.surface.vertex_angle_sums(&self.thetas())
    }

    /// Curvatures at faces and vertices: `2pi - angle` inside, `pi - angle`
    /// on the boundary. They add up to `2 pi chi` whenever the angle balance
    /// holds and each boundary face meets the boundary once.
    pub fn curvatures(&self) -> (Vec<f64>, Vec<f64>) {
        let s = &self.surface;
        let kf = s
            .face_ids()
            .map(|f| {
                let full = if s.face(f).is_boundary_face() { PI } else { 2.0 * PI };
                full - self.phi_target[f.0]
            })
            .collect();
        let kv = self
            .vertex_angle_sums()
            .iter()
            .zip(s.vertex_ids())
            .map(|(t, v)| if s.vertex(v).on_boundary { PI - t } else { 2.0 * PI - t })
            .collect();
        (kf, kv)
    }
}

/// Radius variables, one per face.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadiiAssignment {
    pub rho: Vec<f64>,
}

impl RadiiAssignment {
    pub fn radii(&self, geometry: Geometry) -> Result<Vec<f64>, FunctionalError> {
        self.rho
            .iter()
            .enumerate()
            .map(|(face, &rho)| match geometry {
                Geometry::Euclidean => Ok(rho.exp()),
                Geometry::Hyperbolic if rho < 0.0 => Ok(2.0 * rho.exp().atanh()),
                Geometry::Hyperbolic => Err(FunctionalError::HyperbolicRho { face, rho }),
            })
            .collect()
    }

    pub fn from_radii(radii: &[f64], geometry: Geometry) -> Self {
        let rho = radii
            .iter()
            .map(|&r| match geometry {
                Geometry::Euclidean => r.ln(),
                Geometry::Hyperbolic => (0.5 * r).tanh().ln(),
            })
            .collect();
        RadiiAssignment { rho }
    }
}

/// Kite half-angles, one per half-edge.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoherentAngleSystem {
    pub phi: Vec<f64>,
}

/// How far a half-edge angle vector is from being a coherent angle system.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CasReport {
    pub min_phi: f64,
    /// Euclidean: `max |phi_e + phi_-e - theta*|`. Hyperbolic:
    /// `max (phi_e + phi_-e - theta*)`, which must be negative.
    pub pair_defect: f64,
    /// `max |Phi_f - 2 sum phi|`.
    pub face_defect: f64,
    pub valid: bool,
}

/// The auxiliary angles `p` (per half-edge) and `s` (per edge).
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeAuxiliaries {
    pub p: Vec<f64>,
    pub s: Vec<f64>,
}

#[inline]
fn sides(spec: &PatternSpec, rho: &[f64], h: HalfEdgeId) -> (f64, f64) {
    let s = spec.surface();
    (rho[s.left_face(h).0], rho[s.right_face(h).0])
}

/// Kite half-angle `phi_e` at the center of the circle left of `h`.
pub fn phi_of_rho(spec: &PatternSpec, rho: &[f64], h: HalfEdgeId) -> f64 {
    let theta = spec.theta(spec.surface().edge(h));
    let (rj, rk) = sides(spec, rho, h);
    match spec.geometry {
        Geometry::Euclidean => im_li2_slope(rk - rj, theta),
        Geometry::Hyperbolic => im_li2_slope(rk - rj, theta) - im_li2_slope(rk + rj, theta),
    }
}

pub fn edge_auxiliaries(spec: &PatternSpec, rho: &[f64]) -> EdgeAuxiliaries {
    let s = spec.surface();
    let p = s
        .half_edges()
        .map(|h| {
            let (rj, rk) = sides(spec, rho, h);
            half_tangent_angle(rk - rj, spec.theta_star(s.edge(h)))
        })
        .collect();
    let sv = s
        .edge_ids()
        .map(|e| {
            let (rj, rk) = sides(spec, rho, s.canonical(e));
            half_tangent_angle(rk + rj, spec.theta_star(e))
        })
        .collect();
    EdgeAuxiliaries { p, s: sv }
}

fn linear_part(spec: &PatternSpec, rho: &[f64]) -> f64 {
    spec.phi_target.iter().zip(rho).map(|(a, b)| a * b).sum()
}

/// Functional value in closed Clausen form.
pub fn value(spec: &PatternSpec, rho: &[f64]) -> f64 {
    let s = spec.surface();
    let mut total = linear_part(spec, rho);
    for e in s.edge_ids() {
        let ts = spec.theta_star(e);
        let (rj, rk) = sides(spec, rho, s.canonical(e));
        let x = rk - rj;
        let p = half_tangent_angle(x, ts);
        total += p * x + cl(ts + p) + cl(ts - p) - cl(2.0 * ts);
        match spec.geometry {
            Geometry::Euclidean => total -= ts * (rj + rk),
            Geometry::Hyperbolic => {
                let y = rk + rj;
                let q = half_tangent_angle(y, ts);
                total += q * y + cl(ts + q) + cl(ts - q) - cl(2.0 * ts);
            }
        }
    }
    total
}

/// Functional value in dilogarithm form (cross-check of [`value`]).
pub fn value_dilog(spec: &PatternSpec, rho: &[f64]) -> f64 {
    let s = spec.surface();
    let mut total = linear_part(spec, rho);
    for e in s.edge_ids() {
        let (theta, ts) = (spec.theta(e), spec.theta_star(e));
        let (rj, rk) = sides(spec, rho, s.canonical(e));
        let x = rk - rj;
        total += im_li2_unchecked(x, theta) + im_li2_unchecked(-x, theta);
        match spec.geometry {
            Geometry::Euclidean => total -= ts * (rj + rk),
            Geometry::Hyperbolic => {
                let y = rk + rj;
                total += im_li2_unchecked(y, theta) + im_li2_unchecked(-y, theta);
            }
        }
    }
    total
}

/// All kite half-angles for the given radii.
pub fn phis(spec: &PatternSpec, rho: &[f64]) -> Vec<f64> {
    spec.surface().half_edges().map(|h| phi_of_rho(spec, rho, h)).collect()
}

/// Gradient `Phi_f - 2 sum phi_e`.
pub fn gradient(spec: &PatternSpec, rho: &[f64]) -> Vec<f64> {
    let s = spec.surface();
    let mut g = spec.phi_target.clone();
    for h in s.half_edges() {
        g[s.left_face(h).0] -= 2.0 * phi_of_rho(spec, rho, h);
    }
    g
}

/// `sin(theta) / (cosh x - cos(theta))`, the derivative of `2 phi` in `x`.
#[inline]
fn kite_weight(x: f64, theta: f64) -> f64 {
    let ax = x.abs();
    if ax > 700.0 {
        return 0.0;
    }
    theta.sin() / (ax.cosh() - theta.cos())
}

/// One edge's contribution `w_diff (v_j - v_k)^2 + w_sum (v_j + v_k)^2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HessianTerm {
    pub j: usize,
    pub k: usize,
    pub w_diff: f64,
    pub w_sum: f64,
}

/// Hessian kept as a sum of edge terms; loops (`j == k`) are handled by the
/// same formulas.
#[derive(Clone, Debug, PartialEq)]
pub struct Hessian {
    pub n: usize,
    pub terms: Vec<HessianTerm>,
}

impl Hessian {
    pub fn quadratic_form(&self, v: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                let d = v[t.j] - v[t.k];
                let s = v[t.j] + v[t.k];
                t.w_diff * d * d + t.w_sum * s * s
            })
            .sum()
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for t in &self.terms {
            let d = t.w_diff * (v[t.j] - v[t.k]);
            let s = t.w_sum * (v[t.j] + v[t.k]);
            out[t.j] += d + s;
            out[t.k] += -d + s;
        }
        out
    }

    pub fn diagonal(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for t in &self.terms {
            if t.j == t.k {
                out[t.j] += 4.0 * t.w_sum;
            } else {
                out[t.j] += t.w_diff + t.w_sum;
                out[t.k] += t.w_diff + t.w_sum;
            }
        }
        out
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for t in &self.terms {
            // a a^T with a = e_j - e_k and b b^T with b = e_j + e_k.
            let (j, k) = (t.j, t.k);
            m[(j, j)] += t.w_diff + t.w_sum;
            m[(k, k)] += t.w_diff + t.w_sum;
            m[(j, k)] += t.w_sum - t.w_diff;
            m[(k, j)] += t.w_sum - t.w_diff;
        }
        m
    }
}

/// Hessian of the functional.
pub fn hessian(spec: &PatternSpec, rho: &[f64]) -> Hessian {
    let s = spec.surface();
    let terms = s
        .edge_ids()
        .map(|e| {
            let theta = spec.theta(e);
            let h = s.canonical(e);
            let (j, k) = (s.left_face(h).0, s.right_face(h).0);
            let w_diff = kite_weight(rho[k] - rho[j], theta);
            let w_sum = match spec.geometry {
                Geometry::Euclidean => 0.0,
                Geometry::Hyperbolic => kite_weight(rho[k] + rho[j], theta),
            };
            HessianTerm { j, k, w_diff, w_sum }
        })
        .collect();
    Hessian { n: spec.num_faces(), terms }
}

/// Checks the coherent-angle-system invariants.
pub fn validate_cas(spec: &PatternSpec, cas: &CoherentAngleSystem, tol: f64) -> CasReport {
    let s = spec.surface();
    let min_phi = cas.phi.iter().copied().fold(f64::INFINITY, f64::min);
    let mut pair_defect = f64::NEG_INFINITY;
    for e in s.edge_ids() {
        let [a, b] = s.edge_half_edges(e);
        let d = cas.phi[a.0] + cas.phi[b.0] - spec.theta_star(e);
        pair_defect = pair_defect.max(match spec.geometry {
            Geometry::Euclidean => d.abs(),
            Geometry::Hyperbolic => d,
        });
    }
    let mut sums = spec.phi_target.clone();
    for h in s.half_edges() {
        sums[s.left_face(h).0] -= 2.0 * cas.phi[h.0];
    }
    let face_defect = sums.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let pair_ok = match spec.geometry {
        Geometry::Euclidean => pair_defect <= tol,
        Geometry::Hyperbolic => pair_defect < 0.0,
    };
    CasReport {
        min_phi,
        pair_defect,
        face_defect,
        valid: min_phi > 0.0 && pair_ok && face_defect <= tol,
    }
}

/// Kite angles of `rho` together with their validity report. The invariants
/// hold at critical points only.
pub fn cas_from_rho(spec: &PatternSpec, rho: &[f64]) -> (CoherentAngleSystem, CasReport) {
    let cas = CoherentAngleSystem { phi: phis(spec, rho) };
    let report = validate_cas(spec, &cas, CAS_TOL);
    (cas, report)
}

/// The Legendre-transformed functional, which depends on the angles only.
/// Euclidean: `sum over half-edges of Cl(2 phi) + Cl(2 theta)/2`.
pub fn hamiltonian_reduced(
    spec: &PatternSpec,
    cas: &CoherentAngleSystem,
) -> Result<f64, FunctionalError> {
    let report = validate_cas(spec, cas, CAS_TOL);
    if !report.valid {
        return Err(FunctionalError::InvalidCas(format!("{report:?}")));
    }
    let s = spec.surface();
    Ok(match spec.geometry {
        Geometry::Euclidean => s
            .half_edges()
            .map(|h| cl(2.0 * cas.phi[h.0]) + 0.5 * cl(2.0 * spec.theta(s.edge(h))))
            .sum(),
        Geometry::Hyperbolic => s
            .edge_ids()
            .map(|e| {
                let ts = spec.theta_star(e);
                let [a, b] = s.edge_half_edges(e);
                let d = cas.phi[a.0] - cas.phi[b.0];
                let m = cas.phi[a.0] + cas.phi[b.0];
                cl(ts + d) + cl(ts - d) + cl(ts + m) + cl(ts - m) - 2.0 * cl(2.0 * ts)
            })
            .sum(),
    })
}

/// The Legendre-transformed functional before reduction, `sum rho_f (Phi_f -
/// 2 sum phi) + (angle terms)`. Independent of `rho` exactly when the face
/// sums hold.
pub fn hamiltonian(spec: &PatternSpec, cas: &CoherentAngleSystem, rho: &[f64]) -> f64 {
    let s = spec.surface();
    let mut total = 0.0;
    for h in s.half_edges() {
        total -= 2.0 * cas.phi[h.0] * rho[s.left_face(h).0];
    }
    total += linear_part(spec, rho);
    total
        + match spec.geometry {
            Geometry::Euclidean => s
                .edge_ids()
                .map(|e| {
                    let [a, b] = s.edge_half_edges(e);
                    cl(2.0 * cas.phi[a.0]) + cl(2.0 * cas.phi[b.0]) - cl(2.0 * spec.theta_star(e))
                })
                .sum::<f64>(),
            Geometry::Hyperbolic => s
                .edge_ids()
                .map(|e| {
                    let ts = spec.theta_star(e);
                    let [a, b] = s.edge_half_edges(e);
                    let d = cas.phi[a.0] - cas.phi[b.0];
                    let m = cas.phi[a.0] + cas.phi[b.0];
                    cl(ts + d) + cl(ts - d) + cl(ts + m) + cl(ts - m) - 2.0 * cl(2.0 * ts)
                })
                .sum::<f64>(),
        }
}

/// Radii recovered from angles and the largest inconsistency seen.
#[derive(Clone, Debug, PartialEq)]
pub struct RhoRecovery {
    pub rho: RadiiAssignment,
    pub residual: f64,
    /// False when the angles do not come from a single `rho` (not critical).
    pub consistent: bool,
}

/// Inverts [`phi_of_rho`].
pub fn rho_from_cas(
    spec: &PatternSpec,
    cas: &CoherentAngleSystem,
) -> Result<RhoRecovery, FunctionalError> {
    let report = validate_cas(spec, cas, CAS_TOL);
    if report.min_phi <= 0.0 || (spec.geometry == Geometry::Hyperbolic && report.pair_defect >= 0.0)
    {
        return Err(FunctionalError::InvalidCas(format!("{report:?}")));
    }
    let s = spec.surface();
    let n = spec.num_faces();
    let (rho, residual) = match spec.geometry {
        Geometry::Euclidean => {
            let jump = |h: HalfEdgeId| {
                let phi = cas.phi[h.0];
                (phi.sin() / (phi + spec.theta(s.edge(h))).sin()).ln()
            };
            let mut rho = vec![f64::NAN; n];
            rho[0] = 0.0;
            let mut queue = std::collections::VecDeque::from([FaceId(0)]);
            while let Some(f) = queue.pop_front() {
                for &h in &s.face(f).boundary {
                    let g = s.right_face(h);
                    if rho[g.0].is_nan() {
                        rho[g.0] = rho[f.0] + jump(h);
                        queue.push_back(g);
                    }
                }
            }
            let residual = s
                .half_edges()
                .map(|h| (rho[s.right_face(h).0] - rho[s.left_face(h).0] - jump(h)).abs())
                .fold(0.0, f64::max);
            let mean = rho.iter().sum::<f64>() / n as f64;
            (rho.iter().map(|r| r - mean).collect(), residual)
        }
        Geometry::Hyperbolic => {
            let mut lo = vec![f64::INFINITY; n];
            let mut hi = vec![f64::NEG_INFINITY; n];
            let mut sum = vec![0.0; n];
            let mut cnt = vec![0usize; n];
            for h in s.half_edges() {
                let ts = spec.theta_star(s.edge(h));
                let (a, b) = (cas.phi[h.0], cas.phi[s.twin(h).0]);
                let num = (0.5 * (ts - a - b)).sin() * (0.5 * (ts - a + b)).sin();
                let den = (0.5 * (ts + a + b)).sin() * (0.5 * (ts + a - b)).sin();
                let r = 0.5 * (num / den).ln();
                let f = s.left_face(h).0;
                lo[f] = lo[f].min(r);
                hi[f] = hi[f].max(r);
                sum[f] += r;
                cnt[f] += 1;
            }
            let residual = (0..n).map(|f| hi[f] - lo[f]).fold(0.0, f64::max);
            ((0..n).map(|f| sum[f] / cnt[f] as f64).collect(), residual)
        }
    };
    let consistent = residual <= CAS_TOL && residual.is_finite();
    Ok(RhoRecovery { rho: RadiiAssignment { rho }, residual, consistent })
}
