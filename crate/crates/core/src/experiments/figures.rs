use serde::Serialize;

use super::SweepConfig;
use crate::discretization::{assemble_with, Grid};
use crate::domain::{two_patch, Domain1D, TwoPatch};
use crate::eigensolver::{principal_eigen, DEFAULT_MAX_ITER, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::kernel::Alpha;
use crate::steady::{
    default_initial, march_trajectory, sup_dist, sup_norm, MarchResult, MonotoneIteration, MonotoneOptions,
    Outcome, Start,
};

/// One reference simulation: two patches, fixed `α` and `μ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FigureSpec {
    pub name: &'static str,
    pub alpha: f64,
    pub mu: f64,
    pub expected: Outcome,
    pub check: FigureCheck,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum FigureCheck {
    /// `‖n(T) − n(2T)‖_∞` at most the threshold, state persistent.
    Stationary { threshold: f64 },
    /// `‖n(2T)‖_∞` at most the threshold.
    Vanishing { threshold: f64 },
    /// Sup-norm distance to the merged-interval steady state, relative to
    /// its sup, at most the threshold.
    NearMerged { threshold: f64 },
}

impl FigureSpec {
    pub const ALL: [FigureSpec; 3] = [
        FigureSpec {
            name: "persistence",
            alpha: 0.5,
            mu: 0.5,
            expected: Outcome::Persistence,
            check: FigureCheck::Stationary { threshold: 1e-6 },
        },
        FigureSpec {
            name: "extinction",
            alpha: 0.8,
            mu: 0.5,
            expected: Outcome::Extinction,
            check: FigureCheck::Vanishing { threshold: 1e-3 },
        },
        FigureSpec {
            name: "near-merged",
            alpha: 0.5,
            mu: 1e-4,
            expected: Outcome::Persistence,
            check: FigureCheck::NearMerged { threshold: 0.05 },
        },
    ];
}

#[derive(Debug, Clone, PartialEq)]
pub struct FigureOutcome {
    pub spec: FigureSpec,
    pub lambda: f64,
    /// Outcome implied by the sign of `λ`.
    pub predicted: Outcome,
    pub observed: Outcome,
    pub settled: bool,
    pub metric: f64,
    pub passed: bool,
    pub grid: Grid,
    pub march: MarchResult,
    /// Merged-interval steady state sampled on this grid, when compared.
    pub reference: Option<Vec<f64>>,
}

impl FigureOutcome {
    pub fn detail(&self) -> String {
        let (what, thr) = match self.spec.check {
            FigureCheck::Stationary { threshold } => ("|n(T)-n(2T)|", threshold),
            FigureCheck::Vanishing { threshold } => ("|n(2T)|", threshold),
            FigureCheck::NearMerged { threshold } => ("rel. distance to merged state", threshold),
        };
        format!(
            "alpha={} mu={} lambda={:.6} expected {} observed {} ({}settled), {what} = {:.3e} (limit {thr:.1e})",
            self.spec.alpha,
            self.spec.mu,
            self.lambda,
            self.spec.expected,
            self.observed,
            if self.settled { "" } else { "not " },
            self.metric
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FigureReport {
    pub figures: Vec<FigureOutcome>,
}

impl FigureReport {
    /// First failing figure as an `OutcomeMismatch`.
    pub fn check(&self) -> Result<()> {
        match self.figures.iter().find(|f| !f.passed) {
            None => Ok(()),
            Some(f) => Err(Error::OutcomeMismatch { figure: f.spec.name.into(), detail: f.detail() }),
        }
    }
}

fn run_figure(cfg: &SweepConfig, spec: FigureSpec) -> Result<FigureOutcome> {
    let (a1, a2) = cfg.domain.patch_lengths()?;
    let alpha = Alpha::new(spec.alpha)?;
    let grid = Grid::new(&two_patch(TwoPatch::new(a1, a2, spec.mu)?), cfg.h)?;
    let m = assemble_with(&grid, alpha, Execution::Sequential);
    let lambda = principal_eigen(&m, DEFAULT_TOL, DEFAULT_MAX_ITER)?.lambda;
    let march_cfg = crate::steady::MarchConfig { stop_when_settled: false, ..cfg.march };
    let march = march_trajectory(&m, &default_initial(&m), &march_cfg)?;
    let last = &march.final_state.n;
    let t_end = march.trajectory.last().map(|s| s.0).unwrap_or(0.0);
    let observed = march.final_state.outcome;
    let mut reference = None;
    let (metric, ok) = match spec.check {
        FigureCheck::Stationary { threshold } => {
            let half = march
                .at(0.5 * t_end)
                .ok_or_else(|| Error::Config("snapshot_every must divide t_end / 2".into()))?;
            let d = sup_dist(half, last);
            (d, d <= threshold && observed == Outcome::Persistence && march.settled)
        }
        FigureCheck::Vanishing { threshold } => {
            let s = sup_norm(last);
            (s, s <= threshold)
        }
        FigureCheck::NearMerged { threshold } => {
            let merged_grid = Grid::new(&Domain1D::new(&[(-a1, a2)])?, cfg.h)?;
            let mm = assemble_with(&merged_grid, alpha, Execution::Sequential);
            let opts = MonotoneOptions { tol: cfg.steady_tol, ..MonotoneOptions::default() };
            let merged = MonotoneIteration::new(&mm, Start::Super)?.run(&opts)?;
            let on_grid: Vec<f64> = grid.nodes().iter().map(|&x| merged_grid.interpolate(&merged.n, x)).collect();
            let d = sup_dist(&on_grid, last) / merged.sup();
            reference = Some(on_grid);
            (d, d <= threshold && observed == Outcome::Persistence)
        }
    };
    let predicted = if lambda < 0.0 { Outcome::Persistence } else { Outcome::Extinction };
    Ok(FigureOutcome {
        spec,
        lambda,
        predicted,
        observed,
        settled: march.settled,
        metric,
        passed: ok && observed == spec.expected,
        grid,
        march,
        reference,
    })
}

/// Runs the three reference simulations from the default initial datum
/// (0.5 on the left patch) with the config's grid and march settings.
pub fn reproduce_figures(cfg: &SweepConfig) -> Result<FigureReport> {
    let specs = FigureSpec::ALL;
    let runs: Vec<Result<FigureOutcome>> = cfg.execution().map_slice(&specs, |&s| run_figure(cfg, s));
    Ok(FigureReport { figures: runs.into_iter().collect::<Result<_>>()? })
}
