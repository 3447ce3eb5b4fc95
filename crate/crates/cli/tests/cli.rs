//! End-to-end runs of the `circlepat` binary.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

fn workdir(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("circlepat-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d
}

fn write(dir: &Path, name: &str, v: &Value) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, v.to_string()).unwrap();
    p
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_circlepat")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

/// `m x n` square grid on a torus as face lists.
fn torus_faces(m: usize, n: usize) -> Vec<Vec<usize>> {
    let v = |i: usize, j: usize| (i % m) + m * (j % n);
    let mut f = Vec::new();
    for j in 0..n {
        for i in 0..m {
            f.push(vec![v(i, j), v(i + 1, j), v(i + 1, j + 1), v(i, j + 1)]);
        }
    }
    f
}

fn torus_triangles(m: usize, n: usize) -> Vec<Vec<usize>> {
    torus_faces(m, n)
        .into_iter()
        .flat_map(|q| [vec![q[0], q[1], q[2]], vec![q[0], q[2], q[3]]])
        .collect()
}

fn square_torus() -> Value {
    json!({
        "mesh": {"faces": torus_faces(4, 4)},
        "geometry": "euclidean",
        "theta_star": vec![PI / 2.0; 32],
    })
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn check_reports_feasibility_and_exit_codes() {
    let d = workdir("check");
    let f = write(&d, "torus.json", &square_torus());
    let o = run(&["check", p(&f)]);
    assert_eq!(code(&o), 0);
    let j = stdout_json(&o);
    assert_eq!(j["feasible"], true);
    assert_eq!(j["certificate"]["type"], "cas");

    let o = run(&["check", p(&f), "--geometry", "hyperbolic"]);
    assert_eq!(code(&o), 2);
    assert_eq!(stdout_json(&o)["certificate"]["type"], "violation");
}

#[test]
fn input_errors_exit_with_one() {
    let d = workdir("input");
    let mut bad = square_torus();
    bad["theta_star"][0] = json!(PI);
    let f = write(&d, "bad.json", &bad);
    assert_eq!(code(&run(&["check", p(&f)])), 1);
    assert_eq!(code(&run(&["check", p(&d.join("missing.json"))])), 1);
    let junk = d.join("junk.json");
    std::fs::write(&junk, "{ not json").unwrap();
    assert_eq!(code(&run(&["solve", p(&junk)])), 1);
    assert_eq!(code(&run(&["frobnicate"])), 1);
    let mut unknown = square_torus();
    unknown["colour"] = json!("red");
    let f = write(&d, "unknown.json", &unknown);
    assert_eq!(code(&run(&["check", p(&f)])), 1);
}

#[test]
fn solve_is_deterministic() {
    let d = workdir("solve");
    let f = write(&d, "torus.json", &square_torus());
    let a = run(&["solve", p(&f)]);
    let b = run(&["solve", p(&f)]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let j = stdout_json(&a);
    assert_eq!(j["converged"], true);
    let rho: Vec<f64> = serde_json::from_value(j["rho"].clone()).unwrap();
    assert!(rho.iter().all(|r| (r - rho[0]).abs() < 1e-10));
    assert!(j["max_residual"].as_f64().unwrap() <= 1e-10);
}

#[test]
fn infeasible_solve_exits_with_two() {
    let d = workdir("infeasible");
    let mut t = square_torus();
    t["geometry"] = json!("hyperbolic");
    let f = write(&d, "torus.json", &t);
    assert_eq!(code(&run(&["solve", p(&f)])), 2);
}

#[test]
fn iteration_limit_exits_with_three() {
    let d = workdir("limit");
    let mut t = square_torus();
    let mut theta = vec![PI / 2.0; 32];
    theta[0] = 1.2;
    theta[5] = 1.9;
    t["theta_star"] = json!(theta);
    let total: f64 = theta.iter().map(|x| 2.0 * x).sum();
    t["phi"] = json!(vec![total / 16.0; 16]);
    t["options"] = json!({"method": "thurston", "max_iter": 1, "grad_tol": 1e-14});
    let f = write(&d, "torus.json", &t);
    let o = run(&["solve", p(&f)]);
    assert_eq!(code(&o), 3);
}

#[test]
fn layout_from_report_matches_direct_layout() {
    let d = workdir("layout");
    let f = write(&d, "torus.json", &square_torus());
    let report = d.join("report.json");
    assert_eq!(code(&run(&["solve", p(&f), "-o", p(&report)])), 0);
    let direct = run(&["layout", p(&f)]);
    let via = run(&["layout", p(&f), "--report", p(&report)]);
    assert_eq!(code(&direct), 0);
    assert_eq!(direct.stdout, via.stdout);
    let j = stdout_json(&direct);
    assert_eq!(j["closed_up"], true);
    assert_eq!(j["circles"].as_array().unwrap().len(), 16);
    let per = &j["periods"];
    let len = |k: usize| {
        let (x, y) = (per[k][0].as_f64().unwrap(), per[k][1].as_f64().unwrap());
        x.hypot(y)
    };
    assert!((len(0) - len(1)).abs() < 1e-9);
}

#[test]
fn svg_output_and_kites() {
    let d = workdir("svg");
    let f = write(&d, "torus.json", &square_torus());
    let (plain, kites) = (d.join("plain.svg"), d.join("kites.svg"));
    assert_eq!(code(&run(&["layout", p(&f), "--svg", p(&plain)])), 0);
    assert_eq!(code(&run(&["layout", p(&f), "--svg", p(&kites), "--kites"])), 0);
    let plain = std::fs::read_to_string(plain).unwrap();
    let kites = std::fs::read_to_string(kites).unwrap();
    assert!(plain.starts_with("<?xml") && plain.trim_end().ends_with("</svg>"));
    assert_eq!(plain.matches("<polygon").count(), 1);
    assert_eq!(kites.matches("<polygon").count(), 1 + 32);
}

#[test]
fn cone_angles_are_not_developable() {
    let d = workdir("cone");
    let mut t = square_torus();
    let mut phi = vec![2.0 * PI; 16];
    phi[0] += 0.3;
    phi[5] -= 0.3;
    t["phi"] = json!(phi);
    let f = write(&d, "cone.json", &t);
    assert_eq!(code(&run(&["solve", p(&f)])), 0);
    let o = run(&["layout", p(&f)]);
    assert_eq!(code(&o), 4);
    assert!(String::from_utf8_lossy(&o.stderr).contains("not developable"));
}

#[test]
fn sphere_cube() {
    let d = workdir("sphere");
    let cube = json!({
        "mesh": {"faces": [[0, 3, 2, 1], [4, 5, 6, 7], [0, 1, 5, 4], [1, 2, 6, 5], [2, 3, 7, 6], [3, 0, 4, 7]]},
        "theta": vec![2.0 * PI / 3.0; 12],
    });
    let f = write(&d, "cube.json", &cube);
    let o = run(&["sphere", p(&f)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let j = stdout_json(&o);
    assert!(j["max_angle_error"].as_f64().unwrap() < 1e-7);
    let other = stdout_json(&run(&["sphere", p(&f), "--v-infinity", "6"]));
    let cr = |v: &Value| -> Vec<[f64; 2]> { serde_json::from_value(v["cross_ratios"].clone()).unwrap() };
    for (a, b) in cr(&j).iter().zip(cr(&other)) {
        assert!((a[0] - b[0]).hypot(a[1] - b[1]) < 1e-6);
    }

    let mut shrunk = cube.clone();
    shrunk["theta"] = json!(vec![0.5; 12]);
    let f = write(&d, "shrunk.json", &shrunk);
    assert_eq!(code(&run(&["sphere", p(&f)])), 1);
}

#[test]
fn pack_regular_torus_has_equal_radii() {
    let d = workdir("pack");
    let f = write(&d, "tri.json", &json!({"mesh": {"faces": torus_triangles(3, 3)}}));
    let o = run(&["pack", p(&f)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let j = stdout_json(&o);
    let r: Vec<f64> = serde_json::from_value(j["vertex_radii"].clone()).unwrap();
    assert_eq!(r.len(), 9);
    assert!(r.iter().all(|x| (x - r[0]).abs() < 1e-9 * r[0]));
}

#[test]
fn pack_rejects_two_valent_vertices() {
    let d = workdir("pillow");
    let f = write(&d, "pillow.json", &json!({"mesh": {"faces": [[0, 1, 2], [0, 2, 1]]}}));
    let o = run(&["pack", p(&f)]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("medial decomposition invalid"));
}

#[test]
fn specfun_values() {
    let o = run(&["specfun", "clausen", "1"]);
    assert_eq!(String::from_utf8_lossy(&o.stdout).trim(), "1.01395913236077e0");
    let o = run(&["specfun", "lobachevsky", "0.5235987755982988"]);
    let v: f64 = String::from_utf8_lossy(&o.stdout).trim().parse().unwrap();
    // Lobachevsky(pi/6) = Cl(pi/3)/2, and Cl(pi/3) is the maximum of Cl.
    assert!((v - 0.5 * 1.0149416064096536).abs() < 1e-14);
    assert_eq!(code(&run(&["specfun", "imli2", "0", "7"])), 1);
}
