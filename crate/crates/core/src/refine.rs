//! Refinement strategies driven by the error breakdown and the adaptive loop.

use std::collections::BTreeSet;
use std::fmt;

use crate::estimator::{
    classical_indicators, effectivity, estimate, source_indicators, ErrorBreakdown, EstimatorError, EstimatorMode,
    Source,
};
use crate::mesh::{refine_marked_with, refine_uniform, CellSet, MarkedMode, MeshError, Region, SimplicialMesh};
use crate::model::{qoi, solve, PbeProblem};

#[derive(Debug, thiserror::Error)]
pub enum RefineError {
    #[error("invalid strategy configuration: {0}")]
    InvalidConfig(String),
    #[error("level {level}: {source}")]
    Level {
        level: usize,
        #[source]
        source: EstimatorError,
    },
    #[error("level {level}: mesh refinement failed: {source}")]
    Mesh {
        level: usize,
        #[source]
        source: MeshError,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum StrategyKind {
    #[default]
    Uniform,
    /// Uniform refinement of the region of the dominant error source.
    Ucr,
    /// Doerfler marking on the indicators of every significant source.
    Acr,
    /// Doerfler marking on the dual-weighted-residual indicators.
    Classical,
}

impl StrategyKind {
    pub fn name(self) -> &'static str {
        match self {
            StrategyKind::Uniform => "uniform",
            StrategyKind::Ucr => "ucr",
            StrategyKind::Acr => "acr",
            StrategyKind::Classical => "classical",
        }
    }

    pub fn parse(s: &str) -> Option<StrategyKind> {
        match s.to_ascii_lowercase().as_str() {
            "uniform" => Some(StrategyKind::Uniform),
            "ucr" => Some(StrategyKind::Ucr),
            "acr" => Some(StrategyKind::Acr),
            "classical" | "dwr" => Some(StrategyKind::Classical),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StrategyConfig {
    pub kind: StrategyKind,
    /// Fraction of the total indicator mass a Doerfler set must cover.
    pub dorfler_theta: f64,
    /// Ratio by which the largest component must exceed the second to count as dominant.
    pub dominance_factor: f64,
    /// Sources at least this fraction of the largest one are refined adaptively.
    pub half_rule: f64,
    pub max_levels: usize,
    /// Stop once the absolute estimate falls below this value.
    pub goal: Option<f64>,
    /// Refinement of the cell set of a targeted action.
    pub target_mode: MarkedMode,
    /// Refinement of Doerfler-marked cells.
    pub marking_mode: MarkedMode,
}

impl Default for StrategyConfig {
    fn default() -> Self {
        StrategyConfig {
            kind: StrategyKind::Uniform,
            dorfler_theta: 0.2,
            dominance_factor: 3.0,
            half_rule: 0.5,
            max_levels: 2,
            goal: None,
            target_mode: MarkedMode::RedGreen,
            marking_mode: MarkedMode::SplitAllEdges,
        }
    }
}

impl StrategyConfig {
    pub fn validate(&self) -> Result<(), RefineError> {
        let bad = |m: &str| Err(RefineError::InvalidConfig(m.into()));
        if !(self.dorfler_theta > 0.0 && self.dorfler_theta <= 1.0) {
            return bad("dorfler_theta must lie in (0, 1]");
        }
        if !(self.dominance_factor >= 1.0) || !self.dominance_factor.is_finite() {
            return bad("dominance_factor must be at least 1");
        }
        if !(self.half_rule > 0.0 && self.half_rule <= 1.0) {
            return bad("half_rule must lie in (0, 1]");
        }
        if let Some(g) = self.goal {
            if !(g > 0.0) || !g.is_finite() {
                return bad("goal must be positive");
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RefinementAction {
    UniformAll,
    TargetWholeMesh,
    TargetMolecular,
    TargetInterface,
    TargetOuterBoundary,
    AdaptiveOnSources(BTreeSet<Source>),
    /// Doerfler marking on the classical indicators.
    ClassicalMarking,
}

impl RefinementAction {
    /// Target of the dominant source.
    pub fn target(source: Source) -> RefinementAction {
        match source {
            Source::Regular => RefinementAction::TargetWholeMesh,
            Source::Harmonic => RefinementAction::TargetMolecular,
            Source::Interface => RefinementAction::TargetInterface,
            Source::OuterBoundary => RefinementAction::TargetOuterBoundary,
        }
    }
}

impl fmt::Display for RefinementAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RefinementAction::UniformAll => f.write_str("uniform"),
            RefinementAction::TargetWholeMesh => f.write_str("target:R"),
            RefinementAction::TargetMolecular => f.write_str("target:M"),
            RefinementAction::TargetInterface => f.write_str("target:Gamma"),
            RefinementAction::TargetOuterBoundary => f.write_str("target:dOmega"),
            RefinementAction::AdaptiveOnSources(set) => {
                let names: Vec<&str> = set.iter().map(|s| s.name()).collect();
                write!(f, "adaptive:{}", names.join("+"))
            }
            RefinementAction::ClassicalMarking => f.write_str("classical"),
        }
    }
}

/// Sources ordered by decreasing magnitude; zeros last, ties in source order.
fn ranked(components: [f64; 4]) -> Vec<Source> {
    let mut order = Source::ALL.to_vec();
    order.sort_by(|a, b| {
        let (x, y) = (components[a.index()].abs(), components[b.index()].abs());
        y.partial_cmp(&x).unwrap_or(std::cmp::Ordering::Equal)
    });
    order
}

/// Picks the region to refine from `[E_r, E_m, E_Gamma, E_dOmega]`: the
/// dominant source's region when it dominates by the configured factor or
/// shares the sign of the runner-up, otherwise the whole mesh.
pub fn ucr_decide(components: [f64; 4], cfg: &StrategyConfig) -> RefinementAction {
    let order = ranked(components);
    let top = components[order[0].index()];
    let second = components[order[1].index()];
    let dominant = top.abs() >= cfg.dominance_factor * second.abs();
    let same_sign = top != 0.0 && second != 0.0 && top.signum() == second.signum();
    if dominant || same_sign {
        RefinementAction::target(order[0])
    } else {
        RefinementAction::UniformAll
    }
}

/// Sources whose magnitude is at least `half_rule` times the largest.
pub fn acr_select_sources(components: [f64; 4], cfg: &StrategyConfig) -> BTreeSet<Source> {
    let max = components.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Source::ALL
        .into_iter()
        .filter(|s| components[s.index()].abs() >= cfg.half_rule * max)
        .collect()
}

/// Smallest set of cells whose indicators reach `theta` of the total: greedy
/// in decreasing order, ties by lower index. Empty when the total vanishes.
pub fn dorfler_mark(indicators: &[f64], theta: f64) -> CellSet {
    let mut order: Vec<usize> = (0..indicators.len()).collect();
    order.sort_by(|&a, &b| {
        indicators[b].partial_cmp(&indicators[a]).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b))
    });
    let total: f64 = order.iter().map(|&c| indicators[c]).sum();
    let mut marked = CellSet::new();
    if !(total > 0.0) {
        return marked;
    }
    let target = theta * total;
    let mut acc = 0.0;
    for c in order {
        if acc >= target || indicators[c] <= 0.0 {
            break;
        }
        acc += indicators[c];
        marked.insert(c);
    }
    marked
}

/// Cells refined for a targeted action.
pub fn target_cells(mesh: &SimplicialMesh, action: &RefinementAction) -> Option<CellSet> {
    match action {
        RefinementAction::TargetMolecular => Some(mesh.cells_in_region(Region::Molecular)),
        RefinementAction::TargetInterface => Some(mesh.cells_touching_interface()),
        RefinementAction::TargetOuterBoundary => Some(mesh.cells_touching_outer_boundary()),
        _ => None,
    }
}

/// Refines `mesh` according to `action`. Targeted cell sets use
/// `cfg.target_mode`, Doerfler-marked sets `cfg.marking_mode`.
pub fn apply_action(
    mesh: &SimplicialMesh,
    action: &RefinementAction,
    breakdown: &ErrorBreakdown,
    cfg: &StrategyConfig,
) -> Result<SimplicialMesh, MeshError> {
    let (marked, mode) = match action {
        RefinementAction::UniformAll | RefinementAction::TargetWholeMesh => return Ok(refine_uniform(mesh)),
        RefinementAction::AdaptiveOnSources(set) => {
            let mut marked = CellSet::new();
            for s in set {
                marked.union_with(&dorfler_mark(&source_indicators(breakdown, *s), cfg.dorfler_theta));
            }
            (marked, cfg.marking_mode)
        }
        RefinementAction::ClassicalMarking => {
            (dorfler_mark(&classical_indicators(breakdown), cfg.dorfler_theta), cfg.marking_mode)
        }
        targeted => (target_cells(mesh, targeted).expect("targeted action"), cfg.target_mode),
    };
    refine_marked_with(mesh, &marked, mode)
}

/// Action chosen by a strategy for a breakdown.
pub fn decide(breakdown: &ErrorBreakdown, cfg: &StrategyConfig) -> RefinementAction {
    match cfg.kind {
        StrategyKind::Uniform => RefinementAction::UniformAll,
        StrategyKind::Ucr => ucr_decide(breakdown.components(), cfg),
        StrategyKind::Acr => RefinementAction::AdaptiveOnSources(acr_select_sources(breakdown.components(), cfg)),
        StrategyKind::Classical => RefinementAction::ClassicalMarking,
    }
}

/// One row of the refinement history.
#[derive(Clone, Debug, PartialEq)]
pub struct IterationRecord {
    pub level: usize,
    pub vertex_count: usize,
    pub qoi: f64,
    pub estimate: f64,
    pub effectivity: Option<f64>,
    pub e_r: f64,
    pub e_m: f64,
    pub e_gamma: f64,
    pub e_domega: f64,
    pub e_neg: f64,
    /// Refinement applied after this level, if any.
    pub action: Option<RefinementAction>,
}

/// Solve, estimate and breakdown on the problem's current mesh.
pub fn evaluate_level(
    problem: &PbeProblem,
    level: usize,
    reference: Option<f64>,
) -> Result<(IterationRecord, ErrorBreakdown), RefineError> {
    let wrap = |source: EstimatorError| RefineError::Level { level, source };
    let sol = solve(problem).map_err(|e| wrap(e.into()))?;
    let q = qoi(problem, &sol).map_err(|e| wrap(e.into()))?;
    let (_, b) = estimate(problem, &sol, EstimatorMode::Standard).map_err(wrap)?;
    let eff = match reference {
        Some(r) => Some(effectivity(b.total, r - q).map_err(wrap)?),
        None => None,
    };
    let record = IterationRecord {
        level,
        vertex_count: problem.mesh().num_vertices(),
        qoi: q,
        estimate: b.total,
        effectivity: eff,
        e_r: b.e_r,
        e_m: b.e_m,
        e_gamma: b.e_gamma,
        e_domega: b.e_domega,
        e_neg: b.e_neg,
        action: None,
    };
    Ok((record, b))
}

/// Runs levels `0..=max_levels`, refining between levels with the configured
/// strategy. `reference` is a goal value used for effectivities.
pub fn run_refinement_loop(
    problem: PbeProblem,
    cfg: &StrategyConfig,
    reference: Option<f64>,
) -> Result<Vec<IterationRecord>, RefineError> {
    cfg.validate()?;
    let mut records = Vec::new();
    let mut problem = problem;
    for level in 0..=cfg.max_levels {
        let (mut record, b) = evaluate_level(&problem, level, reference)?;
        log::info!(
            "level {level}: {} vertices, estimate {:e}, breakdown [{:e}, {:e}, {:e}, {:e}]",
            record.vertex_count,
            record.estimate,
            b.e_r,
            b.e_m,
            b.e_gamma,
            b.e_domega
        );
        let reached_goal = cfg.goal.is_some_and(|g| record.estimate.abs() < g);
        if level == cfg.max_levels || reached_goal {
            records.push(record);
            break;
        }
        let action = decide(&b, cfg);
        let mesh = apply_action(problem.mesh(), &action, &b, cfg).map_err(|source| RefineError::Mesh { level, source })?;
        record.action = Some(action);
        records.push(record);
        problem = problem
            .with_mesh(mesh)
            .map_err(|e| RefineError::Level { level: level + 1, source: e.into() })?;
    }
    Ok(records)
}
