//! Empirical checks of the two-sided envelope `c₁ 𝒢 ≤ n₊ ≤ C₁ 𝒢`, of the
//! far-field power-law decay on the plus set, and of the Harnack-type
//! flatness of `G` over each plus interval.

use serde::{Deserialize, Serialize};

use crate::discretization::Grid;
use crate::domain::{Domain1D, Interval};
use crate::error::{Error, Result};
use crate::kernel::{big_g, Alpha};
use crate::steady::{Outcome, SteadyState};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeReport {
    pub ratio_min: f64,
    pub ratio_max: f64,
    pub fitted_c1: f64,
    #[serde(rename = "fitted_C1")]
    pub fitted_big_c1: f64,
    pub decay_exponent: Option<f64>,
    pub decay_r2: Option<f64>,
    pub samples: usize,
}

impl EnvelopeReport {
    /// Attaches a decay fit.
    pub fn with_decay(mut self, fit: PowerFit) -> Self {
        self.decay_exponent = Some(fit.exponent);
        self.decay_r2 = Some(fit.r2);
        self
    }
}

/// One sampled envelope ratio `n / (min(δ^α, ε^α) G)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioSample {
    pub x: f64,
    pub delta: f64,
    pub ratio: f64,
}

/// Envelope ratios at every node with `δ > h` (the boundary layer within
/// one cell is not resolved). `eps` defaults to half the shortest interval.
pub fn envelope_ratios(
    n: &[f64],
    grid: &Grid,
    minus: &Domain1D,
    plus: Option<&Domain1D>,
    alpha: Alpha,
    eps: Option<f64>,
) -> Result<Vec<RatioSample>> {
    if n.len() != grid.len() {
        return Err(Error::DimensionMismatch { expected: grid.len(), got: n.len() });
    }
    let a = alpha.get();
    let eps = eps.unwrap_or(0.5 * grid.domain().shortest());
    let cap = eps.powf(a);
    let deltas = grid.deltas();
    let h = grid.h();
    Ok(grid
        .nodes()
        .iter()
        .zip(&deltas)
        .zip(n)
        .filter(|((_, &d), _)| d > h * (1.0 + 1e-9))
        .filter_map(|((&x, &d), &v)| {
            let g = big_g(x, minus, plus, alpha);
            (g > 0.0).then(|| RatioSample { x, delta: d, ratio: v / (d.powf(a).min(cap) * g) })
        })
        .collect())
}

/// Min and max ratio over a set of samples.
pub fn ratio_band(samples: &[RatioSample]) -> Option<(f64, f64)> {
    if samples.is_empty() {
        return None;
    }
    Some(samples.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| {
        (lo.min(s.ratio), hi.max(s.ratio))
    }))
}

/// Ratio band of a persistent steady state against the envelope.
pub fn envelope_check(
    state: &SteadyState,
    grid: &Grid,
    minus: &Domain1D,
    plus: Option<&Domain1D>,
    alpha: Alpha,
    eps: Option<f64>,
) -> Result<EnvelopeReport> {
    if state.outcome != Outcome::Persistence {
        return Err(Error::Precondition("envelope needs a persistent state".into()));
    }
    let samples = envelope_ratios(&state.n, grid, minus, plus, alpha, eps)?;
    let (lo, hi) = ratio_band(&samples).ok_or(Error::NoInteriorSamples)?;
    Ok(EnvelopeReport {
        ratio_min: lo,
        ratio_max: hi,
        fitted_c1: lo.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON),
        fitted_big_c1: hi,
        decay_exponent: None,
        decay_r2: None,
        samples: samples.len(),
    })
}

/// Power law `y ≈ C x^{−exponent}` fitted in log-log coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerFit {
    pub exponent: f64,
    pub prefactor: f64,
    pub r2: f64,
}

/// Least squares on `(ln x, ln y)`; needs three positive points.
pub fn power_law_fit(xs: &[f64], ys: &[f64]) -> Result<PowerFit> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 3 {
        return Err(Error::InsufficientSamples { needed: 3, got: pts.len() });
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientSamples { needed: 3, got: 1 });
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0) };
    Ok(PowerFit { exponent: -slope, prefactor: (my - slope * mx).exp(), r2 })
}

/// Decay of `n₊` at the given plus-patch centers against their distance to
/// the minus set.
pub fn decay_fit(state: &SteadyState, grid: &Grid, minus: &Domain1D, centers: &[f64]) -> Result<PowerFit> {
    if centers.len() < 3 {
        return Err(Error::InsufficientSamples { needed: 3, got: centers.len() });
    }
    if state.n.len() != grid.len() {
        return Err(Error::DimensionMismatch { expected: grid.len(), got: state.n.len() });
    }
    let dist: Vec<f64> = centers.iter().map(|&c| minus.dist(c)).collect();
    let vals: Vec<f64> = centers.iter().map(|&c| grid.interpolate(&state.n, c)).collect();
    power_law_fit(&dist, &vals)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarnackRatio {
    pub interval: Interval,
    pub ratio: f64,
    pub flagged: bool,
}

/// `max / min` of the samples of each interval, flagged above `bound`.
pub fn cluster_harnack(values: &[(Interval, Vec<f64>)], bound: f64) -> Vec<HarnackRatio> {
    values
        .iter()
        .map(|(iv, v)| {
            let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let ratio = if lo > 0.0 { hi / lo } else { f64::INFINITY };
            HarnackRatio { interval: *iv, ratio, flagged: !(ratio <= bound) }
        })
        .collect()
}

/// `G` at `per_interval` equispaced interior points of every plus interval.
pub fn sample_big_g(
    minus: &Domain1D,
    plus: &Domain1D,
    alpha: Alpha,
    per_interval: usize,
) -> Vec<(Interval, Vec<f64>)> {
    plus.intervals()
        .iter()
        .map(|iv| {
            let pts = (1..=per_interval)
                .map(|j| iv.a + iv.len() * j as f64 / (per_interval + 1) as f64)
                .map(|x| big_g(x, minus, Some(plus), alpha))
                .collect();
            (*iv, pts)
        })
        .collect()
}
