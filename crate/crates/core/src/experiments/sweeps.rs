use std::f64::consts::PI;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::SweepConfig;
use crate::bounds::{power_law_fit, PowerFit};
use crate::discretization::{assemble_with, Grid};
use crate::domain::{Domain1D, TwoPatch};
use crate::eigensolver::{default_order, principal_eigen, richardson, xi_alpha, DEFAULT_MAX_ITER, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::kernel::Alpha;
use crate::steady::{MonotoneIteration, MonotoneOptions, Outcome, Start};

const MONOTONE_REL_TOL: f64 = 1e-8;
const JOINT_TOL: f64 = 1e-3;
const JOINT_MAX_DEPTH: usize = 40;
const JOINT_MU_CAP: f64 = 1024.0;

/// One row of a sweep table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub mu: f64,
    pub alpha: f64,
    pub h: f64,
    pub xi: f64,
    pub lambda: f64,
    pub outcome: Outcome,
    pub sup_n: f64,
    pub runtime_s: f64,
}

/// Eigenpair plus steady classification (monotone iteration from 1).
fn solve_point(domain: &Domain1D, mu: f64, alpha: Alpha, h: f64, steady_tol: f64) -> Result<SweepRecord> {
    let start = Instant::now();
    let grid = Grid::new(domain, h)?;
    let m = assemble_with(&grid, alpha, Execution::Sequential);
    let eig = principal_eigen(&m, DEFAULT_TOL, DEFAULT_MAX_ITER)?;
    let opts = MonotoneOptions { tol: steady_tol, ..MonotoneOptions::default() };
    let steady = MonotoneIteration::new(&m, Start::Super)?.run(&opts)?;
    Ok(SweepRecord {
        mu,
        alpha: alpha.get(),
        h,
        xi: eig.xi,
        lambda: eig.lambda,
        outcome: steady.outcome,
        sup_n: steady.sup(),
        runtime_s: start.elapsed().as_secs_f64(),
    })
}

fn xi_at(tp: (f64, f64), mu: f64, alpha: Alpha, h: f64) -> Result<f64> {
    let d = crate::domain::two_patch(TwoPatch::new(tp.0, tp.1, mu)?);
    Ok(xi_alpha(&d, alpha, h)?.xi)
}

fn sorted_unique(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

/// `ξ(μ)` for every `(μ, α)`, μ = 0 always included. Rows are ordered by
/// `(μ, α)`. Fails if `ξ` decreases in `μ` or if the `μ = 0` row differs
/// from the merged interval.
pub fn sweep_mu(cfg: &SweepConfig) -> Result<Vec<SweepRecord>> {
    let (a1, a2) = cfg.domain.patch_lengths()?;
    let alphas = cfg.alphas()?;
    let mut mus = cfg.mu.clone();
    mus.push(0.0);
    let mus = sorted_unique(mus);
    let points: Vec<(f64, Alpha)> = mus
        .iter()
        .flat_map(|&mu| {
            let mut a = alphas.clone();
            a.sort_by(|x, y| x.get().total_cmp(&y.get()));
            a.into_iter().map(move |al| (mu, al))
        })
        .collect();
    let rows: Vec<Result<SweepRecord>> = cfg.execution().map_slice(&points, |&(mu, al)| {
        solve_point(&cfg.domain.at(mu)?, mu, al, cfg.h, cfg.steady_tol)
    });
    let rows: Vec<SweepRecord> = rows.into_iter().collect::<Result<_>>()?;

    let merged = Domain1D::new(&[(-a1, a2)])?;
    for al in &alphas {
        let column: Vec<&SweepRecord> = rows.iter().filter(|r| r.alpha == al.get()).collect();
        for w in column.windows(2) {
            if w[1].xi < w[0].xi - MONOTONE_REL_TOL * (1.0 + w[0].xi.abs()) {
                return Err(Error::MonotonicityViolation { mu: w[1].mu, prev: w[0].xi, next: w[1].xi });
            }
        }
        let reference = xi_alpha(&merged, *al, cfg.h)?.xi;
        if (column[0].xi - reference).abs() > 1e-12 * reference.max(1.0) {
            return Err(Error::OutcomeMismatch {
                figure: "sweep-mu".into(),
                detail: format!("xi(0) = {} but merged interval gives {reference}", column[0].xi),
            });
        }
    }
    Ok(rows)
}

/// Result of a sweep in `α` at fixed `μ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaSweep {
    pub records: Vec<SweepRecord>,
    /// `diam^{2α} ξ` per record.
    pub scaled: Vec<f64>,
    pub scaled_increasing: bool,
    pub top_alpha: f64,
    /// Richardson value at the largest `α` from `h` and `h/2`.
    pub extrapolated: f64,
    /// `min(π²/A₁², π²/A₂²)`.
    pub classical: f64,
    pub relative_error: f64,
}

/// `ξ(α)` at the first `μ` of the config, which must be positive.
pub fn sweep_alpha(cfg: &SweepConfig) -> Result<AlphaSweep> {
    let (a1, a2) = cfg.domain.patch_lengths()?;
    let mu = cfg.mu[0];
    if !(mu > 0.0) {
        return Err(Error::Precondition(format!("alpha sweep needs mu > 0, got {mu}")));
    }
    let mut alphas = cfg.alphas()?;
    alphas.sort_by(|x, y| x.get().total_cmp(&y.get()));
    alphas.dedup();
    let domain = cfg.domain.at(mu)?;
    let rows: Vec<Result<SweepRecord>> = cfg
        .execution()
        .map_slice(&alphas, |&al| solve_point(&domain, mu, al, cfg.h, cfg.steady_tol));
    let records: Vec<SweepRecord> = rows.into_iter().collect::<Result<_>>()?;
    let diam = a1 + a2 + 2.0 * mu;
    let scaled: Vec<f64> = records.iter().map(|r| diam.powf(2.0 * r.alpha) * r.xi).collect();
    let scaled_increasing = scaled.windows(2).all(|w| w[1] > w[0]);
    let top = *alphas.last().expect("validated nonempty");
    let coarse = records.last().expect("validated nonempty").xi;
    let fine = xi_alpha(&domain, top, 0.5 * cfg.h)?.xi;
    let extrapolated = richardson(coarse, fine, default_order(top));
    let classical = (PI * PI / (a1 * a1)).min(PI * PI / (a2 * a2));
    Ok(AlphaSweep {
        records,
        scaled,
        scaled_increasing,
        top_alpha: top.get(),
        extrapolated,
        classical,
        relative_error: (extrapolated - classical).abs() / classical,
    })
}

/// One step of the joint staircase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointStep {
    pub alpha: f64,
    pub mu: f64,
    pub xi: f64,
    pub error: f64,
    pub depth: usize,
    pub hit: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointSweep {
    pub xi_star: f64,
    pub range: (f64, f64),
    pub steps: Vec<JointStep>,
}

impl JointSweep {
    pub fn best_error(&self) -> f64 {
        self.steps.iter().map(|s| s.error).fold(f64::INFINITY, f64::min)
    }
}

/// Targets reachable by the staircase on this grid: from the smallest
/// merged-interval `ξ` over the `α` list up to the smallest classical
/// single-patch eigenvalue.
pub fn admissible_range(cfg: &SweepConfig) -> Result<(f64, f64)> {
    let (a1, a2) = cfg.domain.patch_lengths()?;
    let alphas = cfg.alphas()?;
    let xs: Vec<Result<f64>> = cfg.execution().map_slice(&alphas, |&al| xi_at((a1, a2), 0.0, al, cfg.h));
    let lo = xs.into_iter().collect::<Result<Vec<f64>>>()?.into_iter().fold(f64::INFINITY, f64::min);
    let hi = (PI * PI / (a1 * a1)).min(PI * PI / (a2 * a2));
    Ok((lo, hi))
}

pub fn joint_target_midpoint(cfg: &SweepConfig) -> Result<f64> {
    let (lo, hi) = admissible_range(cfg)?;
    Ok(0.5 * (lo + hi))
}

fn staircase_step(tp: (f64, f64), al: Alpha, h: f64, target: f64) -> Result<JointStep> {
    let step = |mu: f64, xi: f64, depth: usize| JointStep {
        alpha: al.get(),
        mu,
        xi,
        error: (xi - target).abs(),
        depth,
        hit: (xi - target).abs() <= JOINT_TOL,
    };
    let xi0 = xi_at(tp, 0.0, al, h)?;
    if xi0 >= target - JOINT_TOL {
        return Ok(step(0.0, xi0, 0));
    }
    let mut hi = 1.0;
    let mut xi_hi = xi_at(tp, hi, al, h)?;
    while xi_hi < target && hi < JOINT_MU_CAP {
        hi *= 4.0;
        xi_hi = xi_at(tp, hi, al, h)?;
    }
    if xi_hi < target - JOINT_TOL {
        return Ok(step(hi, xi_hi, 0));
    }
    let mut best = step(hi, xi_hi, 0);
    let mut lo = 0.0;
    for depth in 1..=JOINT_MAX_DEPTH {
        if best.hit {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let xi = xi_at(tp, mid, al, h)?;
        let s = step(mid, xi, depth);
        if s.error < best.error {
            best = s;
        }
        if xi < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(best)
}

/// Bisects `μ` at each `α` of the list (ascending) so that `ξ_α(μ)` hits
/// `xi_star` to within 1e−3.
pub fn sweep_joint(cfg: &SweepConfig, xi_star: Option<f64>) -> Result<JointSweep> {
    let tp = cfg.domain.patch_lengths()?;
    let range = admissible_range(cfg)?;
    let target = xi_star.unwrap_or(0.5 * (range.0 + range.1));
    if !(target >= range.0 && target <= range.1) {
        return Err(Error::TargetOutOfRange { target, lo: range.0, hi: range.1 });
    }
    let mut alphas = cfg.alphas()?;
    alphas.sort_by(|x, y| x.get().total_cmp(&y.get()));
    alphas.dedup();
    let steps: Vec<Result<JointStep>> =
        cfg.execution().map_slice(&alphas, |&al| staircase_step(tp, al, cfg.h, target));
    Ok(JointSweep { xi_star: target, range, steps: steps.into_iter().collect::<Result<_>>()? })
}

/// Far-field coupling of two individually unfavorable patches.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub alpha: f64,
    pub single_lambda: (f64, f64),
    pub mus: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub gaps: Vec<f64>,
    pub fit: PowerFit,
    /// Log-log slope of the gap, `−fit.exponent`.
    pub slope: f64,
    pub gaps_positive: bool,
    pub gaps_decreasing: bool,
    /// Distance at which `λ(μ)` changes sign, if it does in the scanned range.
    pub mu0: Option<f64>,
}

/// `min(λ₁, λ₂) − λ(μ)` over the positive `μ` of the config, with a
/// power-law fit; both single patches must have `λ > 0`.
pub fn gap_exponent(cfg: &SweepConfig) -> Result<GapReport> {
    let (a1, a2) = cfg.domain.patch_lengths()?;
    let al = cfg.alphas()?[0];
    let single = |a: f64| -> Result<f64> { Ok(xi_alpha(&Domain1D::new(&[(0.0, a)])?, al, cfg.h)?.lambda) };
    let (l1, l2) = (single(a1)?, single(a2)?);
    if l1 <= 0.0 || l2 <= 0.0 {
        return Err(Error::Precondition(format!(
            "single-patch lambdas must be positive, got {l1} and {l2}"
        )));
    }
    let mus = sorted_unique(cfg.mu.iter().cloned().filter(|&m| m > 0.0).collect());
    let lambdas: Vec<Result<f64>> = cfg
        .execution()
        .map_slice(&mus, |&mu| Ok(xi_at((a1, a2), mu, al, cfg.h)? - 1.0));
    let lambdas: Vec<f64> = lambdas.into_iter().collect::<Result<_>>()?;
    let floor = l1.min(l2);
    let gaps: Vec<f64> = lambdas.iter().map(|l| floor - l).collect();
    let fit = power_law_fit(&mus, &gaps)?;
    let mu0 = match zero_crossing((a1, a2), al, cfg.h, &mus) {
        Ok(m) => Some(m),
        Err(Error::NoSignChange) => None,
        Err(e) => return Err(e),
    };
    Ok(GapReport {
        alpha: al.get(),
        single_lambda: (l1, l2),
        gaps_positive: gaps.iter().all(|&g| g > 0.0),
        gaps_decreasing: gaps.windows(2).all(|w| w[1] < w[0]),
        slope: -fit.exponent,
        mus,
        lambdas,
        gaps,
        fit,
        mu0,
    })
}

/// Smallest `μ` where `λ(μ)` changes sign, scanning `0` and `mus` and then
/// bisecting the first bracket.
pub fn zero_crossing(tp: (f64, f64), al: Alpha, h: f64, mus: &[f64]) -> Result<f64> {
    let mut scan = vec![0.0];
    scan.extend(sorted_unique(mus.to_vec()).into_iter().filter(|&m| m > 0.0));
    let lambda = |mu: f64| xi_at(tp, mu, al, h).map(|x| x - 1.0);
    let mut prev = (scan[0], lambda(scan[0])?);
    for &mu in &scan[1..] {
        let l = lambda(mu)?;
        if l == 0.0 {
            return Ok(mu);
        }
        if l.signum() != prev.1.signum() {
            let (mut lo, mut hi) = (prev.0, mu);
            let lo_sign = prev.1.signum();
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if lambda(mid)?.signum() == lo_sign {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo <= 1e-9 * hi.max(1e-12) {
                    break;
                }
            }
            return Ok(0.5 * (lo + hi));
        }
        prev = (mu, l);
    }
    Err(Error::NoSignChange)
}
