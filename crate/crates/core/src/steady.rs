//! Steady states of `(−Δ)^α n = n − n²` with exterior Dirichlet data.
//!
//! Two routes: the monotone resolvent iteration
//! `n ← (M + I)^{-1}(2n − n²)` started from a sub- or supersolution, and
//! linear-implicit time marching of the evolution problem.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::discretization::OperatorMatrix;
use crate::eigensolver::{principal_eigen, DEFAULT_MAX_ITER, DEFAULT_TOL};
use crate::error::{Error, Result};

pub const DEFAULT_EXTINCTION_THRESHOLD: f64 = 1e-4;
pub const DEFAULT_STEADY_TOL: f64 = 1e-8;
const MONOTONE_SLACK: f64 = 1e-10;
const MAX_DT_HALVINGS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Start {
    Sub,
    Super,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Persistence,
    Extinction,
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Outcome::Persistence => "persistence",
            Outcome::Extinction => "extinction",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Source {
    MonotoneFromSub,
    MonotoneFromSuper,
    TimeMarch,
}

/// Nodal steady state with its residual `‖M n − n + n²‖_∞`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteadyState {
    pub n: Vec<f64>,
    pub residual: f64,
    pub outcome: Outcome,
    pub iterations: usize,
    pub source: Source,
}

impl SteadyState {
    pub fn sup(&self) -> f64 {
        sup_norm(&self.n)
    }
}

pub fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, &x| f64::max(m, x.abs()))
}

pub fn sup_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| f64::max(m, (x - y).abs()))
}

/// `‖M n − n + n²‖_∞`.
pub fn steady_residual(m: &OperatorMatrix, n: &[f64]) -> Result<f64> {
    let mn = m.apply(n)?;
    Ok(mn
        .iter()
        .zip(n)
        .fold(0.0, |acc, (a, &v)| f64::max(acc, (a - v + v * v).abs())))
}

fn classify(n: &[f64], threshold: f64) -> Outcome {
    if sup_norm(n) < threshold {
        Outcome::Extinction
    } else {
        Outcome::Persistence
    }
}

/// Options of the monotone iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonotoneOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub extinction_threshold: f64,
}

impl Default for MonotoneOptions {
    fn default() -> Self {
        MonotoneOptions {
            tol: DEFAULT_STEADY_TOL,
            max_iter: 200_000,
            extinction_threshold: DEFAULT_EXTINCTION_THRESHOLD,
        }
    }
}

/// Iterates of `n ← (M + I)^{-1}(2n − n²)`.
pub struct MonotoneIteration<'a> {
    m: &'a OperatorMatrix,
    chol: nalgebra::Cholesky<f64, nalgebra::Dyn>,
    start: Start,
    current: Vec<f64>,
    count: usize,
}

impl<'a> MonotoneIteration<'a> {
    /// From `Super` the start is the constant 1; from `Sub` it is
    /// `min(|λ|, 1) φ / ‖φ‖_∞`, which requires `λ < 0`.
    pub fn new(m: &'a OperatorMatrix, start: Start) -> Result<Self> {
        let n = m.dim();
        let initial = match start {
            Start::Super => vec![1.0; n],
            Start::Sub => {
                let eig = principal_eigen(m, DEFAULT_TOL, DEFAULT_MAX_ITER)?;
                if eig.lambda >= 0.0 {
                    return Err(Error::Precondition(format!(
                        "sub-solution start needs lambda < 0, got {}",
                        eig.lambda
                    )));
                }
                let sigma = eig.lambda.abs().min(1.0) / eig.sup_phi();
                eig.phi.iter().map(|v| sigma * v).collect()
            }
        };
        Self::from_initial(m, start, initial)
    }

    /// Starts from an explicit vector, tagged as coming from `start`.
    pub fn from_initial(m: &'a OperatorMatrix, start: Start, initial: Vec<f64>) -> Result<Self> {
        if initial.len() != m.dim() {
            return Err(Error::DimensionMismatch { expected: m.dim(), got: initial.len() });
        }
        let mut shifted = m.entries().clone();
        for i in 0..m.dim() {
            shifted[(i, i)] += 1.0;
        }
        let chol = shifted.cholesky().ok_or(Error::NotPositiveDefinite)?;
        Ok(MonotoneIteration { m, chol, start, current: initial, count: 0 })
    }

    pub fn current(&self) -> &[f64] {
        &self.current
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// Advances one step; returns the sup-norm increment. Fails when the
    /// step goes against the expected direction.
    pub fn step(&mut self) -> Result<f64> {
        let rhs = DVector::from_iterator(
            self.current.len(),
            self.current.iter().map(|&v| 2.0 * v - v * v),
        );
        let next = self.chol.solve(&rhs);
        self.count += 1;
        let mut inc = 0.0f64;
        for (old, &new) in self.current.iter_mut().zip(next.iter()) {
            let d = new - *old;
            let against = match self.start {
                Start::Super => d > MONOTONE_SLACK,
                Start::Sub => d < -MONOTONE_SLACK,
            };
            if against {
                return Err(Error::NonMonotoneStep(self.count));
            }
            inc = inc.max(d.abs());
            *old = new;
        }
        Ok(inc)
    }

    fn source(&self) -> Source {
        match self.start {
            Start::Sub => Source::MonotoneFromSub,
            Start::Super => Source::MonotoneFromSuper,
        }
    }

    /// Iterates until the increment drops below `opts.tol`.
    pub fn run(mut self, opts: &MonotoneOptions) -> Result<SteadyState> {
        while self.count < opts.max_iter {
            if self.step()? <= opts.tol {
                let residual = steady_residual(self.m, &self.current)?;
                return Ok(SteadyState {
                    outcome: classify(&self.current, opts.extinction_threshold),
                    residual,
                    iterations: self.count,
                    source: self.source(),
                    n: self.current,
                });
            }
        }
        Err(Error::NoConvergence(opts.max_iter))
    }
}

/// Monotone iteration from a sub- or supersolution with default options.
pub fn monotone_solve(m: &OperatorMatrix, start: Start, tol: f64) -> Result<SteadyState> {
    let opts = MonotoneOptions { tol, ..MonotoneOptions::default() };
    MonotoneIteration::new(m, start)?.run(&opts)
}

/// Time-marching parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MarchConfig {
    pub dt: f64,
    pub t_end: f64,
    pub snapshot_every: f64,
    pub steady_tol: f64,
    pub extinction_threshold: f64,
    /// Stop as soon as the state is classified instead of running to `t_end`.
    pub stop_when_settled: bool,
}

impl Default for MarchConfig {
    fn default() -> Self {
        MarchConfig {
            dt: 0.1,
            t_end: 4000.0,
            snapshot_every: 2000.0,
            steady_tol: DEFAULT_STEADY_TOL,
            extinction_threshold: DEFAULT_EXTINCTION_THRESHOLD,
            stop_when_settled: false,
        }
    }
}

impl MarchConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.dt > 0.0
            && self.t_end > 0.0
            && self.snapshot_every > 0.0
            && self.steady_tol > 0.0
            && self.extinction_threshold > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("march parameters must be positive: {self:?}")))
        }
    }
}

/// Snapshots `(t, n)` plus the classified final state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarchResult {
    pub trajectory: Vec<(f64, Vec<f64>)>,
    pub final_state: SteadyState,
    /// Time step actually used, after any halving.
    pub dt: f64,
    /// Whether the final state met the persistence or extinction criterion.
    pub settled: bool,
}

impl MarchResult {
    /// Snapshot at time `t`, if recorded.
    pub fn at(&self, t: f64) -> Option<&[f64]> {
        self.trajectory
            .iter()
            .find(|(s, _)| (s - t).abs() < 1e-9 * t.max(1.0))
            .map(|(_, v)| v.as_slice())
    }
}

const INVARIANT_SLACK: f64 = 1e-9;

fn march_once(m: &OperatorMatrix, n0: &[f64], cfg: &MarchConfig, dt: f64) -> Result<MarchResult> {
    let dim = m.dim();
    let mut a: DMatrix<f64> = m.entries() * dt;
    for i in 0..dim {
        a[(i, i)] += 1.0;
    }
    let chol = a.cholesky().ok_or(Error::NotPositiveDefinite)?;
    let steps = (cfg.t_end / dt).round() as usize;
    let every = ((cfg.snapshot_every / dt).round() as usize).max(1);
    let mut n = DVector::from_column_slice(n0);
    let mut trajectory = vec![(0.0, n0.to_vec())];
    let mut rate = f64::INFINITY;
    let mut done = 0;
    for k in 1..=steps {
        let mut rhs = n.map(|v| v + dt * (v - v * v));
        chol.solve_mut(&mut rhs);
        let mut inc = 0.0f64;
        for (new, old) in rhs.iter_mut().zip(n.iter()) {
            if !(-INVARIANT_SLACK..=1.0 + INVARIANT_SLACK).contains(new) || !new.is_finite() {
                return Err(Error::Blowup(k as f64 * dt));
            }
            // keep the tail of an extinction run out of subnormal range
            if new.abs() < 1e-300 {
                *new = 0.0;
            }
            inc = inc.max((*new - old).abs());
        }
        n = rhs;
        rate = inc / dt;
        done = k;
        let t = k as f64 * dt;
        if k % every == 0 || k == steps {
            trajectory.push((t, n.as_slice().to_vec()));
        }
        if cfg.stop_when_settled {
            let sup = n.amax();
            if sup < cfg.extinction_threshold || rate <= cfg.steady_tol {
                if k % every != 0 && k != steps {
                    trajectory.push((t, n.as_slice().to_vec()));
                }
                break;
            }
        }
    }
    let values = n.as_slice().to_vec();
    let extinct = sup_norm(&values) < cfg.extinction_threshold;
    let outcome = if extinct { Outcome::Extinction } else { Outcome::Persistence };
    Ok(MarchResult {
        settled: extinct || rate <= cfg.steady_tol,
        final_state: SteadyState {
            residual: steady_residual(m, &values)?,
            n: values,
            outcome,
            iterations: done,
            source: Source::TimeMarch,
        },
        trajectory,
        dt,
    })
}

/// Marches `(I + dt M) n^{k+1} = n^k + dt (n^k − (n^k)²)` from `n0`,
/// halving `dt` if the state leaves `[0, 1]`. Fails with `NotSettled` when
/// `t_end` is reached before the state is classified.
pub fn time_march(m: &OperatorMatrix, n0: &[f64], cfg: &MarchConfig) -> Result<MarchResult> {
    let r = march_trajectory(m, n0, cfg)?;
    if r.settled {
        Ok(r)
    } else {
        Err(Error::NotSettled)
    }
}

/// Like [`time_march`] but returns the trajectory even when unsettled.
pub fn march_trajectory(m: &OperatorMatrix, n0: &[f64], cfg: &MarchConfig) -> Result<MarchResult> {
    cfg.validate()?;
    if n0.len() != m.dim() {
        return Err(Error::DimensionMismatch { expected: m.dim(), got: n0.len() });
    }
    if n0.iter().any(|&v| !(0.0..=1.0).contains(&v)) {
        return Err(Error::Precondition("initial data must lie in [0, 1]".into()));
    }
    let mut dt = cfg.dt;
    let mut last = Error::Blowup(0.0);
    for _ in 0..=MAX_DT_HALVINGS {
        match march_once(m, n0, cfg, dt) {
            Err(e @ Error::Blowup(_)) => {
                last = e;
                dt *= 0.5;
            }
            other => return other,
        }
    }
    Err(last)
}

/// Result of marching two ordered initial data side by side.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderingReport {
    pub low: MarchResult,
    pub high: MarchResult,
    /// `max (n_low − n_high)` over all snapshots and nodes.
    pub max_excess: f64,
    pub snapshots: usize,
}

/// Marches `low ≤ high` and checks that the order persists at every snapshot.
pub fn ordered_pair_march(
    m: &OperatorMatrix,
    low: &[f64],
    high: &[f64],
    cfg: &MarchConfig,
) -> Result<OrderingReport> {
    if low.iter().zip(high).any(|(a, b)| a > b) {
        return Err(Error::Precondition("initial data are not ordered".into()));
    }
    let cfg = MarchConfig { stop_when_settled: false, ..*cfg };
    let lo = march_trajectory(m, low, &cfg)?;
    let hi = march_trajectory(m, high, &cfg)?;
    let mut max_excess = f64::NEG_INFINITY;
    for ((t, a), (_, b)) in lo.trajectory.iter().zip(&hi.trajectory) {
        let excess = a.iter().zip(b).fold(f64::NEG_INFINITY, |acc, (x, y)| acc.max(x - y));
        if excess > 1e-12 {
            return Err(Error::OrderViolation { t: *t, excess });
        }
        max_excess = max_excess.max(excess);
    }
    Ok(OrderingReport { snapshots: lo.trajectory.len(), low: lo, high: hi, max_excess })
}

/// 0.5 on the nodes of the leftmost interval, 0 elsewhere.
pub fn default_initial(m: &OperatorMatrix) -> Vec<f64> {
    let g = m.grid();
    (0..g.len()).map(|i| if g.owner(i) == 0 { 0.5 } else { 0.0 }).collect()
}

/// Least-squares slope of `log ‖n(t)‖_∞` against `t` over snapshots with
/// `t ≥ t_min` and a positive sup norm.
pub fn log_sup_slope(trajectory: &[(f64, Vec<f64>)], t_min: f64) -> Option<f64> {
    let pts: Vec<(f64, f64)> = trajectory
        .iter()
        .filter(|(t, _)| *t >= t_min)
        .filter_map(|(t, n)| {
            let s = sup_norm(n);
            (s > 0.0).then(|| (*t, s.ln()))
        })
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    Some(sxy / sxx)
}
