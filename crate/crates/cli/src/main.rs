//! `circlepat` command-line tool.
//!
//! Exit codes: 0 success, 1 input error, 2 infeasible, 3 no convergence,
//! 4 not developable.

mod commands;
mod problem;

use std::path::PathBuf;
use std::process::ExitCode;

use circlepat::functional::Geometry;
use circlepat::solver::Method;
use clap::{Parser, Subcommand, ValueEnum};

use problem::CliError;

#[derive(Parser)]
#[command(name = "circlepat", version, about = "Circle patterns with prescribed intersection angles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum GeometryArg {
    Euclidean,
    Hyperbolic,
}

impl From<GeometryArg> for Geometry {
    fn from(g: GeometryArg) -> Self {
        match g {
            GeometryArg::Euclidean => Geometry::Euclidean,
            GeometryArg::Hyperbolic => Geometry::Hyperbolic,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
pub enum MethodArg {
    Newton,
    Thurston,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Newton => Method::Newton,
            MethodArg::Thurston => Method::Thurston,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether a pattern with the given angles exists.
    Check {
        file: PathBuf,
        /// Override the geometry in the file.
        #[arg(long, value_enum)]
        geometry: Option<GeometryArg>,
    },
    /// Solve for the radii and print a report.
    Solve {
        file: PathBuf,
        #[arg(long, value_enum)]
        geometry: Option<GeometryArg>,
        #[arg(long, value_enum)]
        method: Option<MethodArg>,
        /// Write the report here instead of stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Lay out a solved pattern in the plane or the Poincare disk.
    Layout {
        file: PathBuf,
        /// Report from `solve`; solved on the fly when omitted.
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long, value_enum)]
        geometry: Option<GeometryArg>,
        #[arg(long)]
        svg: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
        /// Draw kite polygons in the SVG.
        #[arg(long)]
        kites: bool,
        /// Edge whose kite is placed first.
        #[arg(long)]
        root: Option<usize>,
    },
    /// Spherical pattern from exterior angles summing to 2pi at every vertex.
    Sphere {
        file: PathBuf,
        #[arg(long)]
        v_infinity: Option<usize>,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// 3D scene with the circles as planar sections of the unit sphere.
        #[arg(long)]
        scene: Option<PathBuf>,
        #[arg(long)]
        planar_svg: Option<PathBuf>,
        #[arg(long)]
        planar_json: Option<PathBuf>,
        /// Send three vertices to 0, 1 and infinity (comma separated ids).
        #[arg(long, value_delimiter = ',', num_args = 3)]
        normalize: Option<Vec<usize>>,
    },
    /// Circle packing of a closed triangulation via orthogonal patterns on
    /// its medial decomposition.
    Pack {
        file: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Evaluate special functions (15 significant digits).
    Specfun {
        #[command(subcommand)]
        function: SpecfunCommand,
    },
}

#[derive(Subcommand)]
enum SpecfunCommand {
    /// Clausen's integral Cl(x).
    Clausen {
        #[arg(allow_negative_numbers = true)]
        x: f64,
    },
    /// Im Li2(e^x e^{i theta}).
    Imli2 {
        #[arg(allow_negative_numbers = true)]
        x: f64,
        #[arg(allow_negative_numbers = true)]
        theta: f64,
    },
    /// Lobachevsky's function.
    Lobachevsky {
        #[arg(allow_negative_numbers = true)]
        x: f64,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Check { file, geometry } => commands::check(&file, geometry.map(Into::into)),
        Command::Solve { file, geometry, method, output } => {
            commands::solve(&file, geometry.map(Into::into), method.map(Into::into), output.as_deref())
        }
        Command::Layout { file, report, geometry, svg, json, kites, root } => commands::layout(
            &file,
            commands::LayoutArgs {
                report: report.as_deref(),
                geometry: geometry.map(Into::into),
                svg: svg.as_deref(),
                json: json.as_deref(),
                kites,
                root,
            },
        ),
        Command::Sphere { file, v_infinity, output, scene, planar_svg, planar_json, normalize } => {
            commands::sphere(
                &file,
                commands::SphereArgs {
                    v_infinity,
                    output: output.as_deref(),
                    scene: scene.as_deref(),
                    planar_svg: planar_svg.as_deref(),
                    planar_json: planar_json.as_deref(),
                    normalize,
                },
            )
        }
        Command::Pack { file, output } => commands::pack(&file, output.as_deref()),
        Command::Specfun { function } => {
            let value = match function {
                SpecfunCommand::Clausen { x } => circlepat::specfun::clausen(x),
                SpecfunCommand::Imli2 { x, theta } => circlepat::specfun::im_li2(x, theta),
                SpecfunCommand::Lobachevsky { x } => circlepat::specfun::clausen(2.0 * x).map(|c| 0.5 * c),
            }
            .map_err(|e| CliError::Input(e.to_string()))?;
            println!("{value:.14e}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("CIRCLEPAT_LOG", "warn")).init();
    // Usage errors share exit code 1 with other input errors.
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
