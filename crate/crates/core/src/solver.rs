//! Minimization of the circle-pattern functionals.
//!
//! Newton's method with backtracking is the default. The Euclidean functional
//! is invariant under adding a constant to all `rho`, so its Newton system is
//! solved on the zero-sum subspace via `(H + 11^T/n) d = -P g`, which is exact
//! there because the kernel of `H` is spanned by `1`. Coordinate descent
//! (adjusting one radius at a time until its face angle sum is right) is kept
//! as an independent second method.

use log::{debug, info};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::functional::{
    cas_from_rho, gradient, hessian, phi_of_rho, value, CasReport, CoherentAngleSystem, Geometry,
    Hessian, PatternSpec, RadiiAssignment,
};
use crate::surface::FaceId;

/// Above this many faces the Newton system is solved by conjugate gradients.
pub const DENSE_LIMIT: usize = 2000;
/// Iterates with `|rho|` beyond this are treated as diverging.
const RHO_BOUND: f64 = 500.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Newton,
    Thurston,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveOptions {
    pub method: Method,
    pub grad_tol: f64,
    /// Defaults to 200 Newton steps or 100000 coordinate sweeps.
    pub max_iter: Option<usize>,
    pub initial_rho: Option<RadiiAssignment>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { method: Method::Newton, grad_tol: 1e-10, max_iter: None, initial_rho: None }
    }
}

impl SolveOptions {
    pub fn thurston() -> Self {
        SolveOptions { method: Method::Thurston, ..Default::default() }
    }
    fn iteration_limit(&self) -> usize {
        self.max_iter.unwrap_or(match self.method {
            Method::Newton => 200,
            Method::Thurston => 100_000,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveResult {
    pub rho_star: RadiiAssignment,
    pub cas_star: CoherentAngleSystem,
    pub cas_report: CasReport,
    /// `max_f |Phi_f - 2 sum phi|`.
    pub grad_norm: f64,
    pub iterations: usize,
    pub functional_value: f64,
    pub converged: bool,
    /// Functional value after each accepted step or sweep.
    pub history: Vec<f64>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("grad_tol must be positive, got {0}")]
    BadTolerance(f64),
    #[error("initial rho has {got} entries, expected {expected}")]
    InitialLength { expected: usize, got: usize },
    #[error("no convergence after {iterations} iterations (gradient norm {grad_norm:.3e})")]
    NotConverged { iterations: usize, grad_norm: f64, last: Box<SolveResult> },
    #[error("radii drift without bound after {iterations} iterations (max |rho| {max_abs_rho:.3e}, gradient norm {grad_norm:.3e}); the prescribed angles are probably infeasible")]
    Diverged { iterations: usize, max_abs_rho: f64, grad_norm: f64 },
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn center(v: &mut [f64]) {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    for x in v.iter_mut() {
        *x -= mean;
    }
}

/// Minimizes the functional of `spec`.
pub fn minimize(spec: &PatternSpec, opts: &SolveOptions) -> Result<SolveResult, SolveError> {
    if !(opts.grad_tol > 0.0) {
        return Err(SolveError::BadTolerance(opts.grad_tol));
    }
    let n = spec.num_faces();
    let rho = match &opts.initial_rho {
        Some(r) if r.rho.len() != n => {
            return Err(SolveError::InitialLength { expected: n, got: r.rho.len() })
        }
        Some(r) => r.rho.clone(),
        None => match spec.geometry() {
            Geometry::Euclidean => vec![0.0; n],
            Geometry::Hyperbolic => vec![-1.0; n],
        },
    };
    match opts.method {
        Method::Newton => newton(spec, rho, opts),
        Method::Thurston => coordinate_descent(spec, rho, opts),
    }
}

fn finish(
    spec: &PatternSpec,
    mut rho: Vec<f64>,
    iterations: usize,
    tol: f64,
    history: Vec<f64>,
) -> Result<SolveResult, SolveError> {
    if spec.geometry() == Geometry::Euclidean {
        center(&mut rho);
    }
    let grad_norm = inf_norm(&gradient(spec, &rho));
    let (cas_star, cas_report) = cas_from_rho(spec, &rho);
    let result = SolveResult {
        functional_value: value(spec, &rho),
        rho_star: RadiiAssignment { rho },
        cas_star,
        cas_report,
        grad_norm,
        iterations,
        converged: grad_norm <= tol,
        history,
    };
    if result.converged {
        Ok(result)
    } else {
        Err(SolveError::NotConverged { iterations, grad_norm, last: Box::new(result) })
    }
}

fn check_drift(rho: &[f64], iterations: usize, grad_norm: f64) -> Result<(), SolveError> {
    let max_abs_rho = inf_norm(rho);
    if max_abs_rho > RHO_BOUND || !max_abs_rho.is_finite() {
        return Err(SolveError::Diverged { iterations, max_abs_rho, grad_norm });
    }
    Ok(())
}

fn newton(spec: &PatternSpec, mut rho: Vec<f64>, opts: &SolveOptions) -> Result<SolveResult, SolveError> {
    let euclid = spec.geometry() == Geometry::Euclidean;
    let limit = opts.iteration_limit();
    let mut s_val = value(spec, &rho);
    let mut history = vec![s_val];
    let mut iterations = 0;
    while iterations < limit {
        let g = gradient(spec, &rho);
        let gn = inf_norm(&g);
        debug!("newton iter {iterations}: S = {s_val:.17e}, |g| = {gn:.3e}");
        if gn <= opts.grad_tol {
            break;
        }
        check_drift(&rho, iterations, gn)?;
        let mut rhs: Vec<f64> = g.iter().map(|x| -x).collect();
        if euclid {
            center(&mut rhs);
        }
        let h = hessian(spec, &rho);
        let mut d = solve_newton_system(&h, &rhs, euclid);
        if euclid {
            center(&mut d);
        }
        let slope: f64 = g.iter().zip(&d).map(|(a, b)| a * b).sum();
        if !(slope < 0.0) {
            // Not a descent direction (numerically singular system); use -g.
            d = rhs;
        }
        let slope: f64 = g.iter().zip(&d).map(|(a, b)| a * b).sum();
        let noise = 1e-14 * (1.0 + s_val.abs());
        let mut t = 1.0;
        let accepted = loop {
            let trial: Vec<f64> = rho.iter().zip(&d).map(|(r, x)| r + t * x).collect();
            let s_trial = value(spec, &trial);
            if s_trial <= s_val + 1e-4 * t * slope || (t == 1.0 && -slope < noise) {
                break Some((trial, s_trial));
            }
            t *= 0.5;
            if t < 1e-20 {
                break None;
            }
        };
        iterations += 1;
        match accepted {
            Some((trial, s_trial)) => {
                rho = trial;
                s_val = s_trial;
                history.push(s_val);
            }
            None => {
                debug!("line search stalled at |g| = {gn:.3e}");
                break;
            }
        }
    }
    info!("newton finished after {iterations} iterations");
    finish(spec, rho, iterations, opts.grad_tol, history)
}

/// Solves `H d = rhs`; in the Euclidean case `rhs` must sum to zero and the
/// solution is the one with zero sum.
pub fn solve_newton_system(h: &Hessian, rhs: &[f64], euclid: bool) -> Vec<f64> {
    let n = h.n;
    let shift = if euclid { 1.0 / n as f64 } else { 0.0 };
    if n <= DENSE_LIMIT {
        let mut m: DMatrix<f64> = h.to_dense();
        if euclid {
            m.add_scalar_mut(shift);
        }
        let b = DVector::from_row_slice(rhs);
        if let Some(ch) = m.clone().cholesky() {
            return ch.solve(&b).iter().copied().collect();
        }
        if let Some(x) = m.lu().solve(&b) {
            return x.iter().copied().collect();
        }
    }
    conjugate_gradient(h, rhs, shift)
}

/// Jacobi-preconditioned CG on `(H + shift 11^T) x = b`.
fn conjugate_gradient(h: &Hessian, b: &[f64], shift: f64) -> Vec<f64> {
    let n = h.n;
    let apply = |v: &[f64]| {
        let mut out = h.mul_vec(v);
        if shift != 0.0 {
            let s: f64 = v.iter().sum::<f64>() * shift;
            out.iter_mut().for_each(|o| *o += s);
        }
        out
    };
    let diag: Vec<f64> = h.diagonal().iter().map(|d| (d + shift).max(1e-300)).collect();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&diag).map(|(a, d)| a / d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let bnorm = dot(b, b).sqrt();
    for _ in 0..10 * n + 100 {
        if dot(&r, &r).sqrt() <= 1e-14 * bnorm {
            break;
        }
        let ap = apply(&p);
        let alpha = rz / dot(&p, &ap);
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        z = r.iter().zip(&diag).map(|(a, d)| a / d).collect();
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    x
}

/// Derivative of face `f`'s gradient entry, `Phi_f - 2 sum phi`, in `rho_f`,
/// together with the entry itself.
fn face_residual(spec: &PatternSpec, rho: &mut [f64], f: FaceId, at: f64) -> (f64, f64) {
    let s = spec.surface();
    rho[f.0] = at;
    let mut g = spec.phi_target(f);
    let mut dg = 0.0;
    for &h in &s.face(f).boundary {
        g -= 2.0 * phi_of_rho(spec, rho, h);
        let theta = spec.theta(s.edge(h));
        let k = s.right_face(h);
        if k != f {
            let x = rho[k.0] - at;
            dg += theta.sin() / (x.cosh() - theta.cos());
            if spec.geometry() == Geometry::Hyperbolic {
                let y = rho[k.0] + at;
                dg += theta.sin() / (y.cosh() - theta.cos());
            }
        } else if spec.geometry() == Geometry::Hyperbolic {
            // A loop: phi depends on rho_f only through the sum term.
            let y = 2.0 * at;
            dg += 2.0 * theta.sin() / (y.cosh() - theta.cos());
        }
    }
    (g, dg)
}

/// Minimizes the functional in the single coordinate `rho_f`, i.e. solves
/// `Phi_f = 2 sum phi` for `rho_f` with the other radii fixed. The left side
/// minus the right is increasing in `rho_f`; safeguarded Newton with
/// bisection. If there is no root the coordinate moves a bounded distance
/// downhill.
pub fn thurston_step(spec: &PatternSpec, rho: &[f64], f: FaceId) -> f64 {
    let mut work = rho.to_vec();
    let x0 = rho[f.0];
    let (g0, _) = face_residual(spec, &mut work, f, x0);
    if g0.abs() <= 1e-14 * (1.0 + spec.phi_target(f)) {
        return x0;
    }
    // Bracket the root by stepping against the sign of the residual.
    let dir = if g0 > 0.0 { -1.0 } else { 1.0 };
    let mut step = 1.0;
    let mut far = x0;
    let mut found = false;
    while step <= 64.0 {
        far = x0 + dir * step;
        if face_residual(spec, &mut work, f, far).0 * g0 <= 0.0 {
            found = true;
            break;
        }
        step *= 2.0;
    }
    if !found {
        return far;
    }
    let (mut lo, mut hi) = if dir > 0.0 { (x0, far) } else { (far, x0) };
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let (g, dg) = face_residual(spec, &mut work, f, x);
        if g == 0.0 {
            return x;
        }
        if g < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let newton = x - g / dg;
        let next = if dg > 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if (next - x).abs() <= 1e-15 * (1.0 + x.abs()) || hi - lo <= 1e-15 * (1.0 + x.abs()) {
            return next;
        }
        x = next;
    }
    x
}

fn coordinate_descent(
    spec: &PatternSpec,
    mut rho: Vec<f64>,
    opts: &SolveOptions,
) -> Result<SolveResult, SolveError> {
    let limit = opts.iteration_limit();
    let s = spec.surface();
    let mut history = vec![value(spec, &rho)];
    let mut sweeps = 0;
    loop {
        let gn = inf_norm(&gradient(spec, &rho));
        if gn <= opts.grad_tol || sweeps >= limit {
            break;
        }
        check_drift(&rho, sweeps, gn)?;
        for f in s.face_ids() {
            rho[f.0] = thurston_step(spec, &rho, f);
        }
        if spec.geometry() == Geometry::Euclidean {
            center(&mut rho);
        }
        sweeps += 1;
        history.push(value(spec, &rho));
    }
    info!("coordinate descent finished after {sweeps} sweeps");
    finish(spec, rho, sweeps, opts.grad_tol, history)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::catalog;
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn torus(geometry: Geometry, phi: f64) -> PatternSpec {
        let s = Arc::new(catalog::torus_grid(4, 4));
        PatternSpec::new(s, geometry, vec![PI / 2.0; 32], vec![phi; 16]).unwrap()
    }

    #[test]
    fn euclidean_torus_is_trivial() {
        let spec = torus(Geometry::Euclidean, 2.0 * PI);
        let init = RadiiAssignment { rho: (0..16).map(|i| (i as f64 * 0.37).sin()).collect() };
        let r = minimize(&spec, &SolveOptions { initial_rho: Some(init), ..Default::default() })
            .unwrap();
        assert!(r.converged && r.grad_norm <= 1e-10);
        assert!(r.rho_star.rho.iter().all(|x| x.abs() < 1e-9));
        assert!(r.history.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    }

    #[test]
    fn hyperbolic_torus() {
        let spec = torus(Geometry::Hyperbolic, 2.0 * PI - 0.1);
        let r = minimize(&spec, &SolveOptions::default()).unwrap();
        assert!(r.rho_star.rho.iter().all(|&x| x < 0.0));
        assert!(r.cas_report.face_defect <= 1e-8);
        assert!(r.cas_report.pair_defect < 0.0);
    }

    #[test]
    fn thurston_step_restores_symmetric_face() {
        let spec = torus(Geometry::Euclidean, 2.0 * PI);
        let mut rho = vec![0.0; 16];
        assert_eq!(thurston_step(&spec, &rho, FaceId(3)), 0.0);
        rho[5] = 0.3;
        assert!(thurston_step(&spec, &rho, FaceId(5)).abs() < 1e-14);
    }

    #[test]
    fn methods_agree_on_hyperbolic_torus() {
        let spec = torus(Geometry::Hyperbolic, 2.0 * PI - 0.3);
        let a = minimize(&spec, &SolveOptions::default()).unwrap();
        let b = minimize(&spec, &SolveOptions::thurston()).unwrap();
        for (x, y) in a.rho_star.rho.iter().zip(&b.rho_star.rho) {
            assert!((x - y).abs() < 1e-7);
        }
        assert!(b.history.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    }

    #[test]
    fn unbalanced_euclidean_diverges_or_fails() {
        let spec = torus(Geometry::Euclidean, 2.0 * PI + 0.1);
        let r = minimize(&spec, &SolveOptions { max_iter: Some(50), ..Default::default() });
        assert!(matches!(r, Err(SolveError::Diverged { .. }) | Err(SolveError::NotConverged { .. })));
    }

    #[test]
    fn cg_matches_dense() {
        let spec = torus(Geometry::Euclidean, 2.0 * PI);
        let rho: Vec<f64> = (0..16).map(|i| (i as f64).cos()).collect();
        let h = hessian(&spec, &rho);
        let mut b: Vec<f64> = (0..16).map(|i| (i as f64 * 1.3).sin()).collect();
        center(&mut b);
        let x = solve_newton_system(&h, &b, true);
        let y = conjugate_gradient(&h, &b, 1.0 / 16.0);
        for i in 0..16 {
            assert!((x[i] - y[i]).abs() < 1e-9);
        }
        let hx = h.mul_vec(&x);
        for i in 0..16 {
            assert!((hx[i] - b[i]).abs() < 1e-10);
        }
    }
}
