//! Command-line front end: configuration, PQR input, reference files, result
//! tables and the commands behind the `pbe` binary.

mod config;
mod pqr;
mod table;

pub use config::{parse_config, serialize_config, ChargeSource, ConfigError, ConfigErrorKind, MeshSource, RunConfig};
pub use pqr::{parse_pqr, parse_pqr_atoms, PqrAtom, PqrError};
pub use table::{emit_table, format_component, format_sig3, parse_csv, TableFormat, TableParseError, TableRow, CSV_HEADER};

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::estimator::{estimate, EstimatorError, EstimatorMode};
use crate::fem::Degree;
use crate::mesh::{build_ball_mesh_with, read_mesh_file, refine_uniform, write_mesh, MeshError, SimplicialMesh};
use crate::model::{qoi, solve_in_degree, ChargeSystem, ModelError, PbeProblem};
use crate::oracle::{born_linear_closed_form, solve_radial, OracleError};
use crate::refine::{run_refinement_loop, IterationRecord, RefineError, StrategyKind};

/// Failure of a command, carrying its exit code.
#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Pqr(#[from] PqrError),
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Solver(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Mesh(MeshError),
}

impl AppError {
    /// 2 for configuration and input errors, 3 for solver failures, 4 for I/O and mesh errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Config(_) | AppError::Pqr(_) | AppError::Input(_) => 2,
            AppError::Solver(_) => 3,
            AppError::Io { .. } | AppError::Mesh(_) => 4,
        }
    }

    /// Short machine-readable category.
    pub fn kind(&self) -> &'static str {
        match self {
            AppError::Config(_) => "config",
            AppError::Pqr(_) => "pqr",
            AppError::Input(_) => "input",
            AppError::Solver(_) => "solver",
            AppError::Io { .. } => "io",
            AppError::Mesh(_) => "mesh",
        }
    }
}

impl From<MeshError> for AppError {
    fn from(e: MeshError) -> Self {
        match e {
            MeshError::InvalidParameters(_) => AppError::Input(e.to_string()),
            other => AppError::Mesh(other),
        }
    }
}

impl From<ModelError> for AppError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::Fem(_) | ModelError::Solver(_) => AppError::Solver(e.to_string()),
            other => AppError::Input(other.to_string()),
        }
    }
}

impl From<EstimatorError> for AppError {
    fn from(e: EstimatorError) -> Self {
        match e {
            EstimatorError::Model(m) => m.into(),
            EstimatorError::UnknownSource(_) => AppError::Input(e.to_string()),
            other => AppError::Solver(other.to_string()),
        }
    }
}

impl From<RefineError> for AppError {
    fn from(e: RefineError) -> Self {
        match e {
            RefineError::InvalidConfig(_) => AppError::Input(e.to_string()),
            RefineError::Mesh { .. } => AppError::Mesh(match e {
                RefineError::Mesh { source, .. } => source,
                _ => unreachable!(),
            }),
            RefineError::Level { level, source } => match AppError::from(source) {
                AppError::Solver(m) => AppError::Solver(format!("level {level}: {m}")),
                AppError::Input(m) => AppError::Input(format!("level {level}: {m}")),
                other => other,
            },
        }
    }
}

impl From<OracleError> for AppError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::NewtonFailure { .. } => AppError::Solver(e.to_string()),
            other => AppError::Input(other.to_string()),
        }
    }
}

fn read_file(path: &Path) -> Result<String, AppError> {
    std::fs::read_to_string(path).map_err(|source| AppError::Io { path: path.to_path_buf(), source })
}

pub fn write_file(path: &Path, text: &str) -> Result<(), AppError> {
    std::fs::write(path, text).map_err(|source| AppError::Io { path: path.to_path_buf(), source })
}

/// Reads a configuration file, or the defaults when no path is given.
/// Relative paths inside the file are taken relative to its directory.
pub fn load_config(path: Option<&Path>) -> Result<RunConfig, AppError> {
    let Some(path) = path else { return Ok(RunConfig::default()) };
    let mut cfg = parse_config(&read_file(path)?)?;
    cfg.resolve_paths(path.parent().unwrap_or(Path::new(".")));
    Ok(cfg)
}

pub fn load_charges(cfg: &RunConfig) -> Result<ChargeSystem, AppError> {
    match &cfg.charges {
        ChargeSource::Inline(q) => Ok(ChargeSystem::new(q.clone())),
        ChargeSource::Pqr(p) => Ok(parse_pqr(&read_file(p)?)?),
    }
}

/// Initial mesh refined uniformly `levels` times. Refinement keeps the initial
/// polyhedral geometry, matching the adaptive loop, so a fine solve is a valid
/// reference for effectivities.
pub fn build_mesh(cfg: &RunConfig, levels: usize) -> Result<SimplicialMesh, AppError> {
    let mut mesh = match &cfg.mesh {
        MeshSource::Generate(p) => build_ball_mesh_with(p)?,
        MeshSource::File(path) => read_mesh_file(path).map_err(|e| match e {
            MeshError::Io(source) => AppError::Io { path: path.clone(), source },
            other => AppError::Mesh(other),
        })?,
    };
    for _ in 0..levels {
        mesh = refine_uniform(&mesh);
    }
    Ok(mesh)
}

pub fn build_problem(cfg: &RunConfig, mesh: SimplicialMesh) -> Result<PbeProblem, AppError> {
    let charges = load_charges(cfg)?;
    let mut p = PbeProblem::with_eta(Arc::new(mesh), cfg.coefficients, charges, cfg.nonlinearity, cfg.qoi_eta)?;
    p.solver = cfg.solver;
    p.enriched_solver = cfg.enriched_solver;
    p.newton = cfg.newton;
    Ok(p)
}

/// A stored goal value used to compute effectivities.
#[derive(Clone, Debug, PartialEq)]
pub struct Reference {
    pub qoi: f64,
    pub degree: usize,
    pub vertices: usize,
}

const REFERENCE_MAGIC: &str = "pbe-reference 1";

pub fn write_reference(r: &Reference) -> String {
    format!("{REFERENCE_MAGIC}\nqoi = {:?}\ndegree = {}\nvertices = {}\n", r.qoi, r.degree, r.vertices)
}

pub fn parse_reference(text: &str) -> Result<Reference, AppError> {
    let bad = |m: String| AppError::Input(format!("reference file: {m}"));
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    if lines.next() != Some(REFERENCE_MAGIC) {
        return Err(bad(format!("missing `{REFERENCE_MAGIC}` header")));
    }
    let (mut qoi, mut degree, mut vertices) = (None, 0, 0);
    for l in lines {
        let (k, v) = l.split_once('=').ok_or_else(|| bad(format!("malformed line `{l}`")))?;
        let (k, v) = (k.trim(), v.trim());
        match k {
            "qoi" => qoi = Some(v.parse::<f64>().map_err(|_| bad(format!("qoi `{v}` is not a number")))?),
            "degree" => degree = v.parse().map_err(|_| bad(format!("degree `{v}` is not an integer")))?,
            "vertices" => vertices = v.parse().map_err(|_| bad(format!("vertices `{v}` is not an integer")))?,
            _ => return Err(bad(format!("unknown key `{k}`"))),
        }
    }
    let qoi = qoi.filter(|q| q.is_finite()).ok_or_else(|| bad("missing qoi".into()))?;
    Ok(Reference { qoi, degree, vertices })
}

pub fn load_reference(path: &Path) -> Result<Reference, AppError> {
    parse_reference(&read_file(path)?)
}

pub fn mesh_gen(cfg: &RunConfig, levels: usize) -> Result<String, AppError> {
    Ok(write_mesh(&build_mesh(cfg, levels)?))
}

/// Goal value of a primal solve, in the enriched spaces if requested.
pub fn solve_goal(cfg: &RunConfig, levels: usize, enriched: bool) -> Result<Reference, AppError> {
    let problem = build_problem(cfg, build_mesh(cfg, levels)?)?;
    let degree = if enriched { Degree::P2 } else { Degree::P1 };
    let sol = solve_in_degree(&problem, degree)?;
    Ok(Reference { qoi: qoi(&problem, &sol)?, degree: degree.order(), vertices: problem.mesh().num_vertices() })
}

/// Breakdown of the estimated goal error on one mesh, as `key = value` lines.
pub fn estimate_report(cfg: &RunConfig, levels: usize, reference: Option<f64>) -> Result<String, AppError> {
    let problem = build_problem(cfg, build_mesh(cfg, levels)?)?;
    let sol = solve_in_degree(&problem, Degree::P1)?;
    let q = qoi(&problem, &sol)?;
    let (_, b) = estimate(&problem, &sol, EstimatorMode::Standard)?;
    let mut s = String::new();
    let _ = writeln!(s, "vertices = {}", problem.mesh().num_vertices());
    let _ = writeln!(s, "qoi = {q:.10e}");
    let _ = writeln!(s, "estimate = {:.6e}", b.total);
    for (name, v) in [("E_r", b.e_r), ("E_m", b.e_m), ("E_Gamma", b.e_gamma), ("E_dOmega", b.e_domega), ("E_neg", b.e_neg)] {
        let _ = writeln!(s, "{name} = {v:.6e}");
    }
    if let Some(r) = reference {
        let eff = crate::estimator::effectivity(b.total, r - q)?;
        let _ = writeln!(s, "effectivity = {eff:.4}");
    }
    Ok(s)
}

/// Runs the refinement loop; `strategy` and `levels` override the configuration.
pub fn refine_records(
    cfg: &RunConfig,
    strategy: Option<StrategyKind>,
    levels: Option<usize>,
    reference: Option<f64>,
) -> Result<Vec<IterationRecord>, AppError> {
    let mut sc = cfg.strategy;
    if let Some(k) = strategy {
        sc.kind = k;
    }
    if let Some(l) = levels {
        sc.max_levels = l;
    }
    let problem = build_problem(cfg, build_mesh(cfg, 0)?)?;
    Ok(run_refinement_loop(problem, &sc, reference)?)
}

/// Radial reference for a single central charge on the generated ball.
pub fn oracle_report(cfg: &RunConfig, intervals: usize) -> Result<String, AppError> {
    let MeshSource::Generate(p) = &cfg.mesh else {
        return Err(AppError::Input("the oracle needs generator radii, not a mesh file".into()));
    };
    let charges = load_charges(cfg)?;
    if charges.len() != 1 || charges.charges()[0].position.norm() != 0.0 {
        log::warn!("oracle uses the total charge placed at the centre");
    }
    let q = charges.total_charge();
    let radial = solve_radial(p.molecular_radius, p.outer_radius, &cfg.coefficients, q, intervals, cfg.nonlinearity)?;
    let mut s = String::new();
    let _ = writeln!(s, "intervals = {intervals}");
    let _ = writeln!(s, "radial_qoi = {:.12e}", radial.qoi);
    if cfg.nonlinearity == crate::model::Nonlinearity::Linearized {
        let exact = born_linear_closed_form(p.molecular_radius, &cfg.coefficients, q, p.outer_radius);
        let _ = writeln!(s, "closed_form_qoi = {exact:.12e}");
        if exact != 0.0 {
            let _ = writeln!(s, "relative_difference = {:.3e}", (radial.qoi - exact).abs() / exact.abs());
        }
    }
    Ok(s)
}
