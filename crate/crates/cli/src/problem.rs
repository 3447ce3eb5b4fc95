//! Problem files and the error type that maps onto exit codes.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use circlepat::functional::{Geometry, PatternSpec, SpecError};
use circlepat::solver::{Method, SolveOptions};
use circlepat::surface::{CellularSurface, MeshInput, SurfaceError};
use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error(transparent)]
    Surface(#[from] SurfaceError),
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error("{0}")]
    Input(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("{0}")]
    NotConverged(String),
    #[error("{0}")]
    NotDevelopable(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Infeasible(_) => 2,
            CliError::NotConverged(_) => 3,
            CliError::NotDevelopable(_) => 4,
            _ => 1,
        }
    }
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileOptions {
    pub method: Option<Method>,
    pub grad_tol: Option<f64>,
    pub max_iter: Option<usize>,
}

impl FileOptions {
    pub fn solve_options(&self, method: Option<Method>) -> SolveOptions {
        let d = SolveOptions::default();
        SolveOptions {
            method: method.or(self.method).unwrap_or(d.method),
            grad_tol: self.grad_tol.unwrap_or(d.grad_tol),
            max_iter: self.max_iter,
            initial_rho: None,
        }
    }
}

/// Input file shared by all subcommands. `theta_star` is indexed by edge id;
/// sphere problems may give exterior angles `theta` instead.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub mesh: MeshInput,
    #[serde(default)]
    pub geometry: Option<Geometry>,
    #[serde(default)]
    pub theta_star: Option<Vec<f64>>,
    #[serde(default)]
    pub theta: Option<Vec<f64>>,
    #[serde(default)]
    pub phi: Option<Vec<f64>>,
    #[serde(default)]
    pub v_infinity: Option<usize>,
    #[serde(default)]
    pub options: FileOptions,
}

pub fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.into(), source })
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Io { path: path.into(), source })
}

impl ProblemFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        serde_json::from_str(&read_text(path)?)
            .map_err(|e| CliError::Parse { path: path.into(), message: e.to_string() })
    }

    pub fn surface(&self) -> Result<Arc<CellularSurface>, CliError> {
        Ok(Arc::new(self.mesh.build()?))
    }

    /// Interior angles: given directly, or as `pi - theta`.
    pub fn theta_star(&self) -> Result<Vec<f64>, CliError> {
        match (&self.theta_star, &self.theta) {
            (Some(t), None) => Ok(t.clone()),
            (None, Some(t)) => Ok(t.iter().map(|x| PI - x).collect()),
            (Some(_), Some(_)) => Err(CliError::Input("give either theta_star or theta, not both".into())),
            (None, None) => Err(CliError::Input("missing theta_star".into())),
        }
    }

    /// Pattern spec; `phi` defaults to 2pi on closed faces and must be given
    /// when the surface has boundary faces.
    pub fn spec(&self, geometry: Option<Geometry>) -> Result<PatternSpec, CliError> {
        let s = self.surface()?;
        let geometry = geometry
            .or(self.geometry)
            .ok_or_else(|| CliError::Input("missing geometry (euclidean or hyperbolic)".into()))?;
        let phi = match &self.phi {
            Some(p) => p.clone(),
            None => {
                if let Some(f) = s.face_ids().find(|&f| s.face(f).is_boundary_face()) {
                    return Err(CliError::Input(format!(
                        "face {f} is a boundary face; phi must be given explicitly"
                    )));
                }
                vec![2.0 * PI; s.num_faces()]
            }
        };
        Ok(PatternSpec::new(s, geometry, self.theta_star()?, phi)?)
    }
}
