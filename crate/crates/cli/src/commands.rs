//! Subcommand implementations.

use std::f64::consts::PI;
use std::path::Path;
use std::sync::Arc;

use circlepat::feasibility::{check_conditions_bruteforce, find_coherent_angle_system, FeasibilityCertificate};
use circlepat::functional::{self, cas_from_rho, Geometry, PatternSpec, RadiiAssignment};
use circlepat::layout::{self as lay, LayoutError, LayoutOptions, SvgOptions};
use circlepat::solver::{minimize, Method, SolveError, SolveResult};
use circlepat::spherical::{solve_sphere, SphereError, SphericalLayout, SphericalProblem};
use circlepat::surface::{EdgeId, VertexId};
use log::{info, warn};
use serde_json::{json, Value};

use crate::problem::{read_text, write_text, CliError, ProblemFile};

/// Face count up to which `check` cross-verifies with subset enumeration.
const CROSS_CHECK_FACES: usize = 8;

fn emit(value: &Value, output: Option<&Path>) -> Result<(), CliError> {
    let text = circlepat::json::to_string(value).expect("JSON values serialize");
    match output {
        Some(p) => write_text(p, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn certificate_json(cert: &FeasibilityCertificate) -> Value {
    match cert {
        FeasibilityCertificate::Cas(cas) => json!({"type": "cas", "phi": cas.phi}),
        FeasibilityCertificate::ConditionsHold => json!({"type": "conditions_hold"}),
        FeasibilityCertificate::Violation(v) => {
            let mut j = serde_json::to_value(v).expect("violation serializes");
            j["type"] = json!("violation");
            j
        }
    }
}

fn geometry_name(g: Geometry) -> &'static str {
    match g {
        Geometry::Euclidean => "euclidean",
        Geometry::Hyperbolic => "hyperbolic",
    }
}

/// Runs the flow-based check; returns the certificate and its JSON.
fn feasibility(spec: &PatternSpec) -> Result<(FeasibilityCertificate, Value), CliError> {
    let cert = find_coherent_angle_system(spec).map_err(|e| CliError::Input(e.to_string()))?;
    let brute = if spec.num_faces() <= CROSS_CHECK_FACES {
        let b = check_conditions_bruteforce(spec).map_err(|e| CliError::Input(e.to_string()))?;
        if b.is_feasible() != cert.is_feasible() {
            warn!("flow and subset enumeration disagree");
        }
        Some(b.is_feasible())
    } else {
        None
    };
    let j = json!({
        "geometry": geometry_name(spec.geometry()),
        "feasible": cert.is_feasible(),
        "certificate": certificate_json(&cert),
        "bruteforce_feasible": brute,
    });
    Ok((cert, j))
}

fn infeasible_message(j: &Value) -> String {
    let c = &j["certificate"];
    format!(
        "angle sums fail on faces {} (sum of Phi {}, sum of 2 theta* {})",
        c["faces"], c["phi_sum"], c["theta_sum"]
    )
}

pub fn check(file: &Path, geometry: Option<Geometry>) -> Result<(), CliError> {
    let spec = ProblemFile::load(file)?.spec(geometry)?;
    let (cert, j) = feasibility(&spec)?;
    emit(&j, None)?;
    if cert.is_feasible() {
        Ok(())
    } else {
        Err(CliError::Infeasible(infeasible_message(&j)))
    }
}

fn face_residuals(spec: &PatternSpec, phi: &[f64]) -> Vec<f64> {
    let s = spec.surface();
    let mut r = spec.phi_targets().to_vec();
    for h in s.half_edges() {
        r[s.left_face(h).0] -= 2.0 * phi[h.0];
    }
    r
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn solve_report(spec: &PatternSpec, res: &SolveResult, method: Method) -> Value {
    let residuals = face_residuals(spec, &res.cas_star.phi);
    let radii = res.rho_star.radii(spec.geometry()).unwrap_or_default();
    json!({
        "geometry": geometry_name(spec.geometry()),
        "method": method,
        "converged": res.converged,
        "iterations": res.iterations,
        "grad_norm": res.grad_norm,
        "functional_value": res.functional_value,
        "rho": res.rho_star.rho,
        "radii": radii,
        "phi": res.cas_star.phi,
        "face_residuals": residuals,
        "max_residual": max_abs(&residuals),
    })
}

fn solve_error(e: SolveError, spec: &PatternSpec, method: Method) -> CliError {
    match e {
        SolveError::NotConverged { ref last, .. } => {
            eprintln!("{}", circlepat::json::to_string(&solve_report(spec, last, method)).unwrap_or_default());
            CliError::NotConverged(e.to_string())
        }
        SolveError::Diverged { .. } => CliError::NotConverged(e.to_string()),
        other => CliError::Input(other.to_string()),
    }
}

fn run_solver(spec: &PatternSpec, file: &ProblemFile, method: Option<Method>) -> Result<(SolveResult, Method), CliError> {
    let (cert, j) = feasibility(spec)?;
    if !cert.is_feasible() {
        emit(&j, None)?;
        return Err(CliError::Infeasible(infeasible_message(&j)));
    }
    let opts = file.options.solve_options(method);
    let res = minimize(spec, &opts).map_err(|e| solve_error(e, spec, opts.method))?;
    info!("solved in {} iterations, gradient norm {:e}", res.iterations, res.grad_norm);
    Ok((res, opts.method))
}

pub fn solve(
    file: &Path,
    geometry: Option<Geometry>,
    method: Option<Method>,
    output: Option<&Path>,
) -> Result<(), CliError> {
    let pf = ProblemFile::load(file)?;
    let spec = pf.spec(geometry)?;
    let (res, method) = run_solver(&spec, &pf, method)?;
    emit(&solve_report(&spec, &res, method), output)
}

pub struct LayoutArgs<'a> {
    pub report: Option<&'a Path>,
    pub geometry: Option<Geometry>,
    pub svg: Option<&'a Path>,
    pub json: Option<&'a Path>,
    pub kites: bool,
    pub root: Option<usize>,
}

/// Rebuilds a solve result from the radii in a saved report.
fn result_from_report(spec: &PatternSpec, path: &Path) -> Result<(SolveResult, Option<f64>), CliError> {
    let v: Value = serde_json::from_str(&read_text(path)?)
        .map_err(|e| CliError::Parse { path: path.into(), message: e.to_string() })?;
    let rho: Vec<f64> = serde_json::from_value(v["rho"].clone())
        .map_err(|e| CliError::Parse { path: path.into(), message: format!("rho: {e}") })?;
    if rho.len() != spec.num_faces() {
        return Err(CliError::Input(format!(
            "report has {} radii, problem has {} faces",
            rho.len(),
            spec.num_faces()
        )));
    }
    let (cas, report) = cas_from_rho(spec, &rho);
    let grad = functional::gradient(spec, &rho);
    let res = SolveResult {
        functional_value: functional::value(spec, &rho),
        rho_star: RadiiAssignment { rho },
        cas_star: cas,
        cas_report: report,
        grad_norm: max_abs(&grad),
        iterations: 0,
        converged: true,
        history: vec![],
    };
    Ok((res, v["max_residual"].as_f64()))
}

fn layout_error(e: LayoutError) -> CliError {
    match e {
        LayoutError::NotDevelopable(m) => CliError::NotDevelopable(format!(
            "not developable: {m}; the radii are still valid as metric data"
        )),
        LayoutError::Io { path, source } => CliError::Io { path: path.into(), source },
        other => CliError::Input(other.to_string()),
    }
}

pub fn layout(file: &Path, args: LayoutArgs) -> Result<(), CliError> {
    let pf = ProblemFile::load(file)?;
    let spec = pf.spec(args.geometry)?;
    let res = match args.report {
        Some(path) => {
            let (res, reported) = result_from_report(&spec, path)?;
            let now = max_abs(&face_residuals(&spec, &res.cas_star.phi));
            if let Some(r) = reported {
                if (r - now).abs() > 1e-9 {
                    warn!("face residual {now:e} differs from the reported {r:e}");
                }
            }
            res
        }
        None => run_solver(&spec, &pf, None)?.0,
    };
    let opts = LayoutOptions { root: args.root.map(EdgeId) };
    let l = lay::layout(&spec, &res, &opts).map_err(layout_error)?;
    if !l.closed_up {
        warn!("layout does not close up: residual {:e}", l.closure_residual);
    }
    let mut j = lay::layout_json(&l);
    j["max_face_residual"] = json!(max_abs(&face_residuals(&spec, &res.cas_star.phi)));
    if let Some(p) = args.svg {
        lay::export_svg(&l, p, &SvgOptions { kites: args.kites }).map_err(layout_error)?;
    }
    match args.json {
        Some(p) => emit(&j, Some(p)),
        None if args.svg.is_none() => emit(&j, None),
        None => Ok(()),
    }
}

pub struct SphereArgs<'a> {
    pub v_infinity: Option<usize>,
    pub output: Option<&'a Path>,
    pub scene: Option<&'a Path>,
    pub planar_svg: Option<&'a Path>,
    pub planar_json: Option<&'a Path>,
    pub normalize: Option<Vec<usize>>,
}

fn sphere_error(e: SphereError) -> CliError {
    match e {
        SphereError::Conditions(v) => CliError::Infeasible(format!("{v:?}")),
        SphereError::Solve(s) => CliError::NotConverged(s.to_string()),
        SphereError::Layout(l) => layout_error(l),
        other => CliError::Input(other.to_string()),
    }
}

fn sphere_json(p: &SphericalProblem, sl: &SphericalLayout) -> Value {
    let s = &p.surface;
    let angles = sl.edge_angles(s);
    let err = s.edge_ids().map(|e| (angles[e.0] - p.theta_star(e)).abs()).fold(0.0, f64::max);
    json!({
        "v_infinity": p.v_infinity.0,
        "circles": sl.caps.iter().enumerate().map(|(f, c)| json!({"face": f, "axis": c.axis, "radius": c.radius})).collect::<Vec<_>>(),
        "vertices": sl.vertices.iter().map(|x| json!([x.x, x.y, x.z])).collect::<Vec<_>>(),
        "edge_angles": angles,
        "max_angle_error": err,
        "incidence_residual": sl.incidence_residual(s),
        "cross_ratios": sl.cross_ratios(s).iter().map(|z| json!([z.re, z.im])).collect::<Vec<_>>(),
    })
}

fn scene_json(sl: &SphericalLayout) -> Value {
    json!({
        "sphere": {"center": [0.0, 0.0, 0.0], "radius": 1.0},
        "circles": sl.caps.iter().map(|c| {
            let n = c.axis_vector();
            let o = n * c.radius.cos();
            json!({"center": [o.x, o.y, o.z], "normal": c.axis, "radius": c.radius.sin()})
        }).collect::<Vec<_>>(),
        "points": sl.vertices.iter().map(|x| json!([x.x, x.y, x.z])).collect::<Vec<_>>(),
    })
}

pub fn sphere(file: &Path, args: SphereArgs) -> Result<(), CliError> {
    let pf = ProblemFile::load(file)?;
    let s = pf.surface()?;
    let theta: Vec<f64> = pf.theta_star()?.iter().map(|t| PI - t).collect();
    let v = VertexId(args.v_infinity.or(pf.v_infinity).unwrap_or(0));
    let p = SphericalProblem::new(s, theta, v).map_err(sphere_error)?;
    let mut sl = solve_sphere(&p).map_err(sphere_error)?;
    if let Some(fix) = &args.normalize {
        let n = p.surface.num_vertices();
        if let Some(&bad) = fix.iter().find(|&&x| x >= n) {
            return Err(CliError::Input(format!("vertex {bad} out of range")));
        }
        sl = sl.normalize([VertexId(fix[0]), VertexId(fix[1]), VertexId(fix[2])]);
    }
    if let Some(path) = args.scene {
        emit(&scene_json(&sl), Some(path))?;
    }
    if let Some(path) = args.planar_svg {
        lay::export_svg(&sl.planar, path, &SvgOptions::default()).map_err(layout_error)?;
    }
    if let Some(path) = args.planar_json {
        emit(&lay::layout_json(&sl.planar), Some(path))?;
    }
    emit(&sphere_json(&p, &sl), args.output)
}

pub fn pack(file: &Path, output: Option<&Path>) -> Result<(), CliError> {
    let pf = ProblemFile::load(file)?;
    let s = pf.surface()?;
    if !s.is_closed() {
        return Err(CliError::Input("packing needs a closed triangulation".into()));
    }
    if let Some(f) = s.face_ids().find(|&f| s.face(f).degree() != 3) {
        return Err(CliError::Input(format!("face {f} is not a triangle")));
    }
    if let Some(v) = s.vertex_ids().find(|&v| s.vertex(v).degree() < 3) {
        return Err(CliError::Input(format!(
            "medial decomposition invalid: vertex {v} has degree {}, its medial face would be a {}-gon",
            s.vertex(v).degree(),
            s.vertex(v).degree()
        )));
    }
    let medial = Arc::new(s.medial()?);
    let nf = s.num_faces();
    let ne = medial.num_edges();
    let genus = s.genus();
    let report = if genus == 0 {
        let p = SphericalProblem::new(medial.clone(), vec![PI / 2.0; ne], VertexId(0)).map_err(sphere_error)?;
        let sl = solve_sphere(&p).map_err(sphere_error)?;
        let angles = sl.edge_angles(&medial);
        json!({
            "genus": genus,
            "geometry": "spherical",
            "vertex_radii": sl.caps[nf..].iter().map(|c| c.radius).collect::<Vec<_>>(),
            "face_radii": sl.caps[..nf].iter().map(|c| c.radius).collect::<Vec<_>>(),
            "vertex_circles": sl.caps[nf..].iter().map(|c| json!({"axis": c.axis, "radius": c.radius})).collect::<Vec<_>>(),
            "max_angle_error": angles.iter().map(|a| (a - PI / 2.0).abs()).fold(0.0, f64::max),
        })
    } else {
        let geometry = if genus == 1 { Geometry::Euclidean } else { Geometry::Hyperbolic };
        let spec = PatternSpec::new(medial.clone(), geometry, vec![PI / 2.0; ne], vec![2.0 * PI; medial.num_faces()])?;
        let (res, _) = run_solver(&spec, &pf, None)?;
        let radii = res.rho_star.radii(geometry).map_err(|e| CliError::Input(e.to_string()))?;
        json!({
            "genus": genus,
            "geometry": geometry_name(geometry),
            "vertex_radii": radii[nf..].to_vec(),
            "face_radii": radii[..nf].to_vec(),
            "iterations": res.iterations,
            "grad_norm": res.grad_norm,
        })
    };
    emit(&report, output)
}
