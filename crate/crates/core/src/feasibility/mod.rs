//! Existence of circle patterns with prescribed angles.
//!
//! A pattern exists exactly when a coherent angle system exists, which in turn
//! is decided by subset conditions on the faces: for every nonempty set `F'`
//! of faces with incident edges `E'`, `sum_{F'} Phi < sum_{E'} 2 theta*`
//! (strict for proper subsets in the Euclidean case, where the whole face set
//! must give equality; strict for all subsets in the hyperbolic case). The
//! conditions are checked by brute force on small inputs and, in general, by a
//! feasible-flow computation that also produces the angle system.

mod cocycle;
mod flow;

pub use cocycle::{
    check_higher_genus_condition, check_rivin_condition, region_decomposition, simple_cycles,
    CocycleViolation, GraphVertices, HigherGenusVerdict, Piece, RegionDecomposition, RivinVerdict,
};
pub use flow::{Branch, FlowNetwork, FlowOutcome};

use log::debug;
use serde::Serialize;
use thiserror::Error;

use crate::functional::{validate_cas, CoherentAngleSystem, Geometry, PatternSpec};
use crate::surface::{EdgeId, FaceId};

/// Largest face count accepted by [`check_conditions_bruteforce`].
pub const BRUTEFORCE_MAX_FACES: usize = 20;
/// Smallest flow lower bound tried before declaring infeasibility.
pub const EPSILON_FLOOR: f64 = 1e-12;
/// Absolute tolerance for the angle-sum comparisons, scaled by the data.
pub const SUM_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FeasibilityError {
    #[error("{faces} faces is too many for subset enumeration (limit {limit}); use the flow-based check")]
    TooLarge { faces: usize, limit: usize },
    #[error("{edges} edges is too many for cut enumeration (limit {limit})")]
    TooManyEdges { edges: usize, limit: usize },
    #[error("vertex {vertex}: exterior angles sum to {sum}, expected 2pi")]
    VertexSum { vertex: usize, sum: f64 },
    #[error("surface must be closed with genus {expected}, found genus {found}")]
    WrongTopology { expected: &'static str, found: i64 },
    #[error(transparent)]
    Surface(#[from] crate::surface::SurfaceError),
    #[error(transparent)]
    Spec(#[from] crate::functional::SpecError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ViolationKind {
    /// The total sums differ (Euclidean balance).
    Equality,
    /// A subset sum is not strictly smaller.
    Inequality,
}

/// Face subset whose angle sums break the existence conditions.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SubsetViolation {
    pub faces: Vec<FaceId>,
    pub edges: Vec<EdgeId>,
    /// `sum_{F'} Phi`.
    pub phi_sum: f64,
    /// `sum_{E'} 2 theta*`.
    pub theta_sum: f64,
    pub kind: ViolationKind,
}

#[derive(Clone, Debug, PartialEq)]
pub enum FeasibilityCertificate {
    /// An explicit coherent angle system.
    Cas(CoherentAngleSystem),
    /// All subset conditions verified (enumeration gives no angle system).
    ConditionsHold,
    Violation(SubsetViolation),
}

impl FeasibilityCertificate {
    pub fn is_feasible(&self) -> bool {
        !matches!(self, FeasibilityCertificate::Violation(_))
    }
}

fn scale(spec: &PatternSpec) -> f64 {
    1.0 + spec.phi_targets().iter().sum::<f64>()
}

/// Sums for the face subset `faces` and the edges incident to it.
pub fn subset_sums(spec: &PatternSpec, in_subset: &[bool]) -> (Vec<EdgeId>, f64, f64) {
    let s = spec.surface();
    let phi_sum = s.face_ids().filter(|f| in_subset[f.0]).map(|f| spec.phi_target(f)).sum();
    let edges: Vec<EdgeId> = s
        .edge_ids()
        .filter(|&e| {
            let h = s.canonical(e);
            in_subset[s.left_face(h).0] || in_subset[s.right_face(h).0]
        })
        .collect();
    let theta_sum = edges.iter().map(|&e| 2.0 * spec.theta_star(e)).sum();
    (edges, phi_sum, theta_sum)
}

/// Recomputes the sums for `faces` and reports whether they violate the
/// conditions for this geometry.
pub fn verify_violation(spec: &PatternSpec, faces: &[FaceId]) -> Option<SubsetViolation> {
    if faces.is_empty() {
        return None;
    }
    let mut mask = vec![false; spec.num_faces()];
    faces.iter().for_each(|f| mask[f.0] = true);
    let (edges, phi_sum, theta_sum) = subset_sums(spec, &mask);
    let tol = SUM_TOL * scale(spec);
    let whole = faces.len() == spec.num_faces();
    let kind = match (spec.geometry(), whole) {
        (Geometry::Euclidean, true) if (phi_sum - theta_sum).abs() > tol => ViolationKind::Equality,
        (Geometry::Euclidean, true) => return None,
        _ if phi_sum >= theta_sum - tol => ViolationKind::Inequality,
        _ => return None,
    };
    Some(SubsetViolation { faces: faces.to_vec(), edges, phi_sum, theta_sum, kind })
}

/// Exact verdict by enumerating all nonempty face subsets.
pub fn check_conditions_bruteforce(
    spec: &PatternSpec,
) -> Result<FeasibilityCertificate, FeasibilityError> {
    let s = spec.surface();
    let nf = s.num_faces();
    if nf > BRUTEFORCE_MAX_FACES {
        return Err(FeasibilityError::TooLarge { faces: nf, limit: BRUTEFORCE_MAX_FACES });
    }
    let tol = SUM_TOL * scale(spec);
    let edge_masks: Vec<(u32, f64)> = s
        .edge_ids()
        .map(|e| {
            let h = s.canonical(e);
            ((1u32 << s.left_face(h).0) | (1u32 << s.right_face(h).0), 2.0 * spec.theta_star(e))
        })
        .collect();
    let full = if nf == 32 { u32::MAX } else { (1u32 << nf) - 1 };
    let to_faces = |m: u32| (0..nf).filter(|i| m >> i & 1 == 1).map(FaceId).collect::<Vec<_>>();
    // The whole set first: it decides the Euclidean balance.
    let mut order: Vec<u32> = vec![full];
    order.extend(1..full);
    for m in order {
        let phi_sum: f64 = (0..nf).filter(|i| m >> i & 1 == 1).map(|i| spec.phi_targets()[i]).sum();
        let theta_sum: f64 = edge_masks.iter().filter(|(em, _)| em & m != 0).map(|(_, t)| t).sum();
        let violated = if m == full && spec.geometry() == Geometry::Euclidean {
            (phi_sum - theta_sum).abs() > tol
        } else {
            phi_sum >= theta_sum - tol
        };
        if violated {
            let faces = to_faces(m);
            let mut mask = vec![false; nf];
            faces.iter().for_each(|f| mask[f.0] = true);
            let (edges, _, _) = subset_sums(spec, &mask);
            let kind = if m == full && spec.geometry() == Geometry::Euclidean {
                ViolationKind::Equality
            } else {
                ViolationKind::Inequality
            };
            return Ok(FeasibilityCertificate::Violation(SubsetViolation {
                faces,
                edges,
                phi_sum,
                theta_sum,
                kind,
            }));
        }
    }
    Ok(FeasibilityCertificate::ConditionsHold)
}

/// Node layout of the angle network: the box node, then faces, then edges.
pub fn angle_network(spec: &PatternSpec, eps: f64) -> FlowNetwork {
    let s = spec.surface();
    let nf = s.num_faces();
    let face_node = |f: FaceId| 1 + f.0;
    let edge_node = |e: EdgeId| 1 + nf + e.0;
    let mut branches = Vec::new();
    for f in s.face_ids() {
        let half = 0.5 * spec.phi_target(f);
        let upper = match spec.geometry() {
            Geometry::Euclidean => f64::INFINITY,
            Geometry::Hyperbolic => half,
        };
        branches.push(Branch { from: 0, to: face_node(f), lower: half, upper });
    }
    for h in s.half_edges() {
        branches.push(Branch {
            from: face_node(s.left_face(h)),
            to: edge_node(s.edge(h)),
            lower: eps,
            upper: f64::INFINITY,
        });
    }
    for e in s.edge_ids() {
        let upper = match spec.geometry() {
            Geometry::Euclidean => spec.theta_star(e),
            Geometry::Hyperbolic => spec.theta_star(e) - eps,
        };
        branches.push(Branch { from: edge_node(e), to: 0, lower: f64::NEG_INFINITY, upper });
    }
    FlowNetwork { nodes: 1 + nf + s.num_edges(), branches }
}

/// Rescales the angles of each face so their doubled sum is `Phi` to working
/// precision. Only used where the edge pairs have slack (hyperbolic).
fn polish_face_sums(spec: &PatternSpec, phi: &mut [f64]) {
    let s = spec.surface();
    for f in s.face_ids() {
        let hes = &s.face(f).boundary;
        let sum: f64 = hes.iter().map(|h| phi[h.0]).sum();
        if sum > 0.0 {
            let k = 0.5 * spec.phi_target(f) / sum;
            hes.iter().for_each(|h| phi[h.0] *= k);
        }
    }
}

/// Looks for a coherent angle system with a feasible flow, shrinking the
/// positivity margin `eps` by halving until it works or drops below
/// [`EPSILON_FLOOR`]. An infeasible answer carries a violating face subset.
pub fn find_coherent_angle_system(
    spec: &PatternSpec,
) -> Result<FeasibilityCertificate, FeasibilityError> {
    let s = spec.surface();
    let nf = s.num_faces();
    if spec.geometry() == Geometry::Euclidean {
        let all: Vec<FaceId> = s.face_ids().collect();
        if let Some(v) = verify_violation(spec, &all) {
            return Ok(FeasibilityCertificate::Violation(v));
        }
    }
    let max_deg = s.face_ids().map(|f| s.face(f).degree()).max().unwrap_or(1).max(1);
    let min_phi = spec.phi_targets().iter().copied().fold(f64::INFINITY, f64::min);
    let mut eps = min_phi / (4.0 * max_deg as f64);
    let mut last_cut = None;
    while eps >= EPSILON_FLOOR {
        match angle_network(spec, eps).feasible_flow() {
            FlowOutcome::Feasible(values) => {
                let mut phi: Vec<f64> = values[nf..nf + s.num_half_edges()].to_vec();
                if spec.geometry() == Geometry::Hyperbolic {
                    polish_face_sums(spec, &mut phi);
                }
                let cas = CoherentAngleSystem { phi };
                let report = validate_cas(spec, &cas, SUM_TOL * scale(spec));
                debug!("flow feasible at eps = {eps:e}: {report:?}");
                // The flow tolerance can swallow a margin of order eps; insist
                // on the strict inequalities actually holding.
                let strict = match spec.geometry() {
                    Geometry::Euclidean => report.min_phi >= 0.5 * eps,
                    Geometry::Hyperbolic => {
                        report.min_phi >= 0.5 * eps
                            && report.pair_defect <= -0.5 * eps
                            && report.face_defect <= 0.25 * eps
                    }
                };
                if report.valid && strict {
                    return Ok(FeasibilityCertificate::Cas(cas));
                }
            }
            FlowOutcome::Infeasible(side) => last_cut = Some(side),
        }
        eps *= 0.5;
    }
    debug!("no feasible flow above the epsilon floor");
    if let Some(side) = last_cut {
        let inside: Vec<FaceId> = s.face_ids().filter(|f| side[1 + f.0]).collect();
        let outside: Vec<FaceId> = s.face_ids().filter(|f| !side[1 + f.0]).collect();
        for cand in [inside, outside] {
            if let Some(v) = verify_violation(spec, &cand) {
                return Ok(FeasibilityCertificate::Violation(v));
            }
        }
    }
    // The cut did not translate into a clean subset (borderline data).
    if nf <= BRUTEFORCE_MAX_FACES {
        if let FeasibilityCertificate::Violation(v) = check_conditions_bruteforce(spec)? {
            return Ok(FeasibilityCertificate::Violation(v));
        }
    }
    let all: Vec<FaceId> = s.face_ids().collect();
    let mask = vec![true; nf];
    let (edges, phi_sum, theta_sum) = subset_sums(spec, &mask);
    Ok(FeasibilityCertificate::Violation(SubsetViolation {
        faces: all,
        edges,
        phi_sum,
        theta_sum,
        kind: ViolationKind::Inequality,
    }))
}
