//! INI-style run configuration: `key = value` lines, `#` comments and the
//! sections `[coefficients]`, `[charges]`, `[mesh]`, `[strategy]`, `[solver]`.
//! Keys before the first section header are top-level.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::mesh::{BallMeshParams, MarkedMode, Point3};
use crate::model::{Coefficients, Nonlinearity, PointCharge};
use crate::refine::{StrategyConfig, StrategyKind};
use crate::solvers::{NewtonConfig, Preconditioner, SolverConfig};

#[derive(Debug, thiserror::Error)]
#[error("line {line}: {kind}")]
pub struct ConfigError {
    /// One-based line number; zero for whole-file problems.
    pub line: usize,
    pub kind: ConfigErrorKind,
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ConfigErrorKind {
    #[error("malformed line `{0}`")]
    Syntax(String),
    #[error("unknown section `[{0}]`")]
    UnknownSection(String),
    #[error("unknown key `{key}` in section `{section}`")]
    UnknownKey { section: String, key: String },
    #[error("key `{0}` given twice")]
    Duplicate(String),
    #[error("`{key}` expects {expected}, got `{value}`")]
    TypeMismatch { key: String, expected: &'static str, value: String },
    #[error("`{key}`: {message}")]
    Constraint { key: String, message: String },
}

/// Where the point charges come from.
#[derive(Clone, Debug, PartialEq)]
pub enum ChargeSource {
    Inline(Vec<PointCharge>),
    Pqr(PathBuf),
}

/// Where the initial mesh comes from.
#[derive(Clone, Debug, PartialEq)]
pub enum MeshSource {
    Generate(BallMeshParams),
    File(PathBuf),
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub coefficients: Coefficients,
    pub nonlinearity: Nonlinearity,
    pub qoi_eta: f64,
    pub charges: ChargeSource,
    pub mesh: MeshSource,
    pub strategy: StrategyConfig,
    pub solver: SolverConfig,
    pub enriched_solver: SolverConfig,
    pub newton: NewtonConfig,
    pub output: Option<PathBuf>,
}

impl Default for RunConfig {
    /// A unit charge at the centre of the default ball mesh.
    fn default() -> Self {
        RunConfig {
            coefficients: Coefficients::default(),
            nonlinearity: Nonlinearity::Linearized,
            qoi_eta: 0.005,
            charges: ChargeSource::Inline(vec![PointCharge { position: Point3::ORIGIN, charge: 1.0 }]),
            mesh: MeshSource::Generate(BallMeshParams::default()),
            strategy: StrategyConfig::default(),
            solver: SolverConfig::default(),
            enriched_solver: SolverConfig { preconditioner: Preconditioner::SymmetricGaussSeidel, ..Default::default() },
            newton: NewtonConfig::default(),
            output: None,
        }
    }
}

impl RunConfig {
    /// Makes relative file paths relative to `base`.
    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let ChargeSource::Pqr(p) = &mut self.charges {
            fix(p);
        }
        if let MeshSource::File(p) = &mut self.mesh {
            fix(p);
        }
        if let Some(p) = &mut self.output {
            fix(p);
        }
    }
}

struct Value<'a> {
    key: &'a str,
    text: &'a str,
    line: usize,
}

impl Value<'_> {
    fn err(&self, kind: ConfigErrorKind) -> ConfigError {
        ConfigError { line: self.line, kind }
    }

    fn mismatch(&self, expected: &'static str) -> ConfigError {
        self.err(ConfigErrorKind::TypeMismatch { key: self.key.into(), expected, value: self.text.into() })
    }

    fn constraint(&self, message: &str) -> ConfigError {
        self.err(ConfigErrorKind::Constraint { key: self.key.into(), message: message.into() })
    }

    fn real(&self) -> Result<f64, ConfigError> {
        match self.text.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(self.mismatch("a finite number")),
        }
    }

    fn positive(&self) -> Result<f64, ConfigError> {
        let v = self.real()?;
        if v > 0.0 {
            Ok(v)
        } else {
            Err(self.constraint("must be positive"))
        }
    }

    fn non_negative(&self) -> Result<f64, ConfigError> {
        let v = self.real()?;
        if v >= 0.0 {
            Ok(v)
        } else {
            Err(self.constraint("must be non-negative"))
        }
    }

    fn unit_interval(&self) -> Result<f64, ConfigError> {
        let v = self.real()?;
        if v > 0.0 && v <= 1.0 {
            Ok(v)
        } else {
            Err(self.constraint("must lie in (0, 1]"))
        }
    }

    fn integer(&self) -> Result<usize, ConfigError> {
        self.text.parse::<usize>().map_err(|_| self.mismatch("a non-negative integer"))
    }

    fn path(&self) -> Result<PathBuf, ConfigError> {
        if self.text.is_empty() {
            Err(self.mismatch("a path"))
        } else {
            Ok(PathBuf::from(self.text))
        }
    }
}

const SECTIONS: [&str; 6] = ["", "coefficients", "charges", "mesh", "strategy", "solver"];

/// Parses a configuration, applying defaults for missing keys.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut cfg = RunConfig::default();
    let mut section = "";
    let mut seen: Vec<(String, String)> = Vec::new();
    let mut inline: Option<(Vec<PointCharge>, usize)> = None;
    let mut pqr: Option<(PathBuf, usize)> = None;
    let mut mesh_file: Option<(PathBuf, usize)> = None;
    let mut generator: Option<usize> = None;
    let mut params = BallMeshParams::default();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| ConfigError { line, kind: ConfigErrorKind::Syntax(content.into()) })?
                .trim();
            section = SECTIONS
                .iter()
                .find(|s| !s.is_empty() && **s == name)
                .ok_or_else(|| ConfigError { line, kind: ConfigErrorKind::UnknownSection(name.into()) })?;
            continue;
        }
        let (key, text) = content
            .split_once('=')
            .map(|(k, v)| (k.trim(), v.trim()))
            .ok_or_else(|| ConfigError { line, kind: ConfigErrorKind::Syntax(content.into()) })?;
        if key.is_empty() {
            return Err(ConfigError { line, kind: ConfigErrorKind::Syntax(content.into()) });
        }
        let v = Value { key, text, line };
        let repeatable = section == "charges" && key == "charge";
        if !repeatable {
            let id = (section.to_string(), key.to_string());
            if seen.contains(&id) {
                return Err(v.err(ConfigErrorKind::Duplicate(key.into())));
            }
            seen.push(id);
        }
        let unknown =
            || v.err(ConfigErrorKind::UnknownKey { section: section.into(), key: key.into() });

        match (section, key) {
            ("", "output") => cfg.output = Some(v.path()?),

            ("coefficients", "eps_m") => cfg.coefficients.eps_m = v.positive()?,
            ("coefficients", "eps_s") => cfg.coefficients.eps_s = v.positive()?,
            ("coefficients", "kappa_sq") => cfg.coefficients.kappa_sq = v.non_negative()?,
            ("coefficients", "charge_scale") => {
                let c = v.real()?;
                if c == 0.0 {
                    return Err(v.constraint("must be non-zero"));
                }
                cfg.coefficients.charge_scale = c;
            }
            ("coefficients", "nonlinearity") => {
                cfg.nonlinearity = match text {
                    "linearized" | "linear" => Nonlinearity::Linearized,
                    "nonlinear" => Nonlinearity::Nonlinear,
                    _ => return Err(v.mismatch("`linearized` or `nonlinear`")),
                }
            }
            ("coefficients", "qoi_eta") => cfg.qoi_eta = v.positive()?,

            ("charges", "pqr") => {
                if inline.is_some() {
                    return Err(v.constraint("inline charges and a PQR file are mutually exclusive"));
                }
                pqr = Some((v.path()?, line));
            }
            ("charges", "charge") => {
                if pqr.is_some() {
                    return Err(v.constraint("inline charges and a PQR file are mutually exclusive"));
                }
                let nums: Vec<f64> = text
                    .split_whitespace()
                    .map(|t| t.parse::<f64>().ok().filter(|x| x.is_finite()))
                    .collect::<Option<_>>()
                    .filter(|n: &Vec<f64>| n.len() == 4)
                    .ok_or_else(|| v.mismatch("four numbers `x y z q`"))?;
                let q = PointCharge { position: Point3::new(nums[0], nums[1], nums[2]), charge: nums[3] };
                inline.get_or_insert_with(|| (Vec::new(), line)).0.push(q);
            }

            ("mesh", "file") => {
                if let Some(l) = generator {
                    return Err(v.constraint(&format!("mesh file conflicts with generator key on line {l}")));
                }
                mesh_file = Some((v.path()?, line));
            }
            ("mesh", k) if is_generator_key(k) => {
                if mesh_file.is_some() {
                    return Err(v.constraint("generator keys conflict with a mesh file"));
                }
                generator.get_or_insert(line);
                match k {
                    "molecular_radius" => params.molecular_radius = v.positive()?,
                    "outer_radius" => params.outer_radius = v.positive()?,
                    "layers" => {
                        params.layers = v.integer()?;
                        if params.layers < 2 {
                            return Err(v.constraint("at least two layers are required"));
                        }
                    }
                    "surface_subdivisions" => {
                        let s = v.integer()?;
                        if s > 6 {
                            return Err(v.constraint("at most 6 subdivisions are supported"));
                        }
                        params.surface_subdivisions = s as u32;
                    }
                    "solvent_layers" => {
                        let s = v.integer()?;
                        if s == 0 {
                            return Err(v.constraint("must be positive"));
                        }
                        params.solvent_layers = Some(s);
                    }
                    "min_dihedral_deg" => params.min_dihedral_deg = v.non_negative()?,
                    _ => unreachable!(),
                }
            }

            ("strategy", "kind") => {
                cfg.strategy.kind =
                    StrategyKind::parse(text).ok_or_else(|| v.mismatch("uniform, ucr, acr or classical"))?
            }
            ("strategy", "dorfler_theta") => cfg.strategy.dorfler_theta = v.unit_interval()?,
            ("strategy", "dominance_factor") => {
                let d = v.real()?;
                if d < 1.0 {
                    return Err(v.constraint("must be at least 1"));
                }
                cfg.strategy.dominance_factor = d;
            }
            ("strategy", "half_rule") => cfg.strategy.half_rule = v.unit_interval()?,
            ("strategy", "max_levels") => cfg.strategy.max_levels = v.integer()?,
            ("strategy", "goal") => cfg.strategy.goal = Some(v.positive()?),
            ("strategy", "target_mode") => cfg.strategy.target_mode = marked_mode(&v)?,
            ("strategy", "marking_mode") => cfg.strategy.marking_mode = marked_mode(&v)?,

            ("solver", "rel_tolerance") => cfg.solver.rel_tolerance = v.positive()?,
            ("solver", "abs_tolerance") => cfg.solver.abs_tolerance = v.non_negative()?,
            ("solver", "max_iterations") => cfg.solver.max_iterations = Some(v.integer()?),
            ("solver", "preconditioner") => cfg.solver.preconditioner = preconditioner(&v)?,
            ("solver", "enriched_rel_tolerance") => cfg.enriched_solver.rel_tolerance = v.positive()?,
            ("solver", "enriched_preconditioner") => cfg.enriched_solver.preconditioner = preconditioner(&v)?,
            ("solver", "newton_rel_tolerance") => cfg.newton.rel_tolerance = v.positive()?,
            ("solver", "newton_abs_tolerance") => cfg.newton.abs_tolerance = v.non_negative()?,
            ("solver", "newton_max_iterations") => cfg.newton.max_iterations = v.integer()?,
            ("solver", "newton_damping") => cfg.newton.damping = v.unit_interval()?,
            ("solver", "newton_min_step") => cfg.newton.min_step = v.unit_interval()?,
            ("solver", "clamp_bound") => cfg.newton.clamp_bound = v.positive()?,
            _ => return Err(unknown()),
        }
    }

    if let Some(line) = generator {
        if params.outer_radius <= params.molecular_radius {
            return Err(ConfigError {
                line,
                kind: ConfigErrorKind::Constraint {
                    key: "outer_radius".into(),
                    message: "must exceed molecular_radius".into(),
                },
            });
        }
    }
    if let Some((p, _)) = pqr {
        cfg.charges = ChargeSource::Pqr(p);
    } else if let Some((q, _)) = inline {
        cfg.charges = ChargeSource::Inline(q);
    }
    cfg.mesh = match mesh_file {
        Some((p, _)) => MeshSource::File(p),
        None => MeshSource::Generate(params),
    };
    Ok(cfg)
}

fn is_generator_key(k: &str) -> bool {
    matches!(
        k,
        "molecular_radius" | "outer_radius" | "layers" | "surface_subdivisions" | "solvent_layers" | "min_dihedral_deg"
    )
}

fn marked_mode(v: &Value<'_>) -> Result<MarkedMode, ConfigError> {
    MarkedMode::parse(v.text).ok_or_else(|| v.mismatch("bisect, split or red-green"))
}

fn preconditioner(v: &Value<'_>) -> Result<Preconditioner, ConfigError> {
    Preconditioner::parse(v.text).ok_or_else(|| v.mismatch("none, jacobi or sgs"))
}

/// Writes every setting explicitly; `parse_config` reads it back unchanged.
pub fn serialize_config(cfg: &RunConfig) -> String {
    let mut s = String::new();
    let path = |p: &Path| p.display().to_string();
    if let Some(p) = &cfg.output {
        let _ = writeln!(s, "output = {}", path(p));
    }
    let c = &cfg.coefficients;
    let _ = writeln!(s, "[coefficients]");
    let _ = writeln!(s, "eps_m = {:?}", c.eps_m);
    let _ = writeln!(s, "eps_s = {:?}", c.eps_s);
    let _ = writeln!(s, "kappa_sq = {:?}", c.kappa_sq);
    let _ = writeln!(s, "charge_scale = {:?}", c.charge_scale);
    let _ = writeln!(s, "nonlinearity = {}", cfg.nonlinearity.name());
    let _ = writeln!(s, "qoi_eta = {:?}", cfg.qoi_eta);

    let _ = writeln!(s, "\n[charges]");
    match &cfg.charges {
        ChargeSource::Pqr(p) => {
            let _ = writeln!(s, "pqr = {}", path(p));
        }
        ChargeSource::Inline(qs) => {
            for q in qs {
                let p = q.position;
                let _ = writeln!(s, "charge = {:?} {:?} {:?} {:?}", p.x, p.y, p.z, q.charge);
            }
        }
    }

    let _ = writeln!(s, "\n[mesh]");
    match &cfg.mesh {
        MeshSource::File(p) => {
            let _ = writeln!(s, "file = {}", path(p));
        }
        MeshSource::Generate(m) => {
            let _ = writeln!(s, "molecular_radius = {:?}", m.molecular_radius);
            let _ = writeln!(s, "outer_radius = {:?}", m.outer_radius);
            let _ = writeln!(s, "layers = {}", m.layers);
            let _ = writeln!(s, "surface_subdivisions = {}", m.surface_subdivisions);
            if let Some(n) = m.solvent_layers {
                let _ = writeln!(s, "solvent_layers = {n}");
            }
            let _ = writeln!(s, "min_dihedral_deg = {:?}", m.min_dihedral_deg);
        }
    }

    let st = &cfg.strategy;
    let _ = writeln!(s, "\n[strategy]");
    let _ = writeln!(s, "kind = {}", st.kind.name());
    let _ = writeln!(s, "dorfler_theta = {:?}", st.dorfler_theta);
    let _ = writeln!(s, "dominance_factor = {:?}", st.dominance_factor);
    let _ = writeln!(s, "half_rule = {:?}", st.half_rule);
    let _ = writeln!(s, "max_levels = {}", st.max_levels);
    if let Some(g) = st.goal {
        let _ = writeln!(s, "goal = {g:?}");
    }
    let _ = writeln!(s, "target_mode = {}", st.target_mode.name());
    let _ = writeln!(s, "marking_mode = {}", st.marking_mode.name());

    let (so, en, nw) = (&cfg.solver, &cfg.enriched_solver, &cfg.newton);
    let _ = writeln!(s, "\n[solver]");
    let _ = writeln!(s, "rel_tolerance = {:?}", so.rel_tolerance);
    let _ = writeln!(s, "abs_tolerance = {:?}", so.abs_tolerance);
    if let Some(n) = so.max_iterations {
        let _ = writeln!(s, "max_iterations = {n}");
    }
    let _ = writeln!(s, "preconditioner = {}", so.preconditioner.name());
    let _ = writeln!(s, "enriched_rel_tolerance = {:?}", en.rel_tolerance);
    let _ = writeln!(s, "enriched_preconditioner = {}", en.preconditioner.name());
    let _ = writeln!(s, "newton_rel_tolerance = {:?}", nw.rel_tolerance);
    let _ = writeln!(s, "newton_abs_tolerance = {:?}", nw.abs_tolerance);
    let _ = writeln!(s, "newton_max_iterations = {}", nw.max_iterations);
    let _ = writeln!(s, "newton_damping = {:?}", nw.damping);
    let _ = writeln!(s, "newton_min_step = {:?}", nw.min_step);
    let _ = writeln!(s, "clamp_bound = {:?}", nw.clamp_bound);
    s
}
