//! Closed-form ingredients of the fractional Laplacian in one dimension:
//! normalization constant, kernel integrals over intervals, the envelope
//! functions `G` and `𝒢`, the Poisson kernel of a ball and the bubble
//! function.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::domain::{delta, Domain1D};
use crate::error::{Error, Result};

/// Fractional exponent, strictly inside `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Alpha(f64);

impl Alpha {
    pub fn new(value: f64) -> Result<Self> {
        if value > 0.0 && value < 1.0 {
            Ok(Alpha(value))
        } else {
            Err(Error::InvalidParameter(format!("alpha must lie in (0, 1), got {value}")))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }

    /// `2 alpha`, the order of the operator.
    pub fn order(self) -> f64 {
        2.0 * self.0
    }
}

impl TryFrom<f64> for Alpha {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        Alpha::new(v)
    }
}

impl From<Alpha> for f64 {
    fn from(a: Alpha) -> f64 {
        a.0
    }
}

/// Constants of the envelope `𝒢`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeParams {
    pub c1: f64,
    pub eps: f64,
}

impl EnvelopeParams {
    pub fn new(c1: f64, eps: f64) -> Result<Self> {
        if c1 > 0.0 && eps > 0.0 {
            Ok(EnvelopeParams { c1, eps })
        } else {
            Err(Error::InvalidParameter(format!(
                "envelope constants must be positive, got c1={c1}, eps={eps}"
            )))
        }
    }
}

/// `4^α Γ(d/2+α) / (π^{d/2} |Γ(−α)|)`; only `d = 1` is supported.
pub fn c_alpha(alpha: Alpha, d: u32) -> Result<f64> {
    if d != 1 {
        return Err(Error::UnsupportedDimension(d));
    }
    let a = alpha.get();
    let half_d = 0.5 * d as f64;
    // |Γ(−α)| = Γ(1−α)/α on (0, 1)
    let abs_gamma_neg = gamma(1.0 - a) / a;
    Ok(4f64.powf(a) * gamma(half_d + a) / (PI.powf(half_d) * abs_gamma_neg))
}

/// `∫_c^d s^{-1-2α} ds` for `0 < c < d`.
pub(crate) fn power_moment0(c: f64, d: f64, alpha: f64) -> f64 {
    let two_a = 2.0 * alpha;
    c.powf(-two_a) * -(-two_a * (d / c).ln()).exp_m1() / two_a
}

/// `∫_c^d s^{-2α} ds` for `0 < c < d`; logarithmic at `α = 1/2`.
pub(crate) fn power_moment1(c: f64, d: f64, alpha: f64) -> f64 {
    let p = 1.0 - 2.0 * alpha;
    let l = (d / c).ln();
    if p.abs() < 1e-9 {
        l
    } else {
        c.powf(p) * (p * l).exp_m1() / p
    }
}

/// Exact `∫_a^b |x−y|^{−(1+2α)} dy` for `x` outside `[a, b]`.
pub fn interval_kernel_integral(a: f64, b: f64, x: f64, alpha: Alpha) -> Result<f64> {
    if a <= x && x <= b {
        return Err(Error::PointInsideInterval { a, b, x });
    }
    let (near, far) = if x < a { (a - x, b - x) } else { (x - b, x - a) };
    Ok(power_moment0(near, far, alpha.get()))
}

/// `G(x)`: 1 on the minus set, the kernel mass of the minus set seen from
/// `x` on the plus set, 0 elsewhere.
pub fn big_g(x: f64, minus: &Domain1D, plus: Option<&Domain1D>, alpha: Alpha) -> f64 {
    if minus.contains(x) {
        return 1.0;
    }
    match plus {
        Some(p) if p.contains(x) => minus
            .intervals()
            .iter()
            .map(|iv| interval_kernel_integral(iv.a, iv.b, x, alpha).unwrap_or(0.0))
            .sum(),
        _ => 0.0,
    }
}

/// `𝒢(x) = min(min(C₁ δ(x)^α, ε^α) G(x), 1)`.
pub fn script_g(
    x: f64,
    dom: &Domain1D,
    minus: &Domain1D,
    plus: Option<&Domain1D>,
    alpha: Alpha,
    p: EnvelopeParams,
) -> f64 {
    let a = alpha.get();
    let cap = (p.c1 * delta(dom, x).powf(a)).min(p.eps.powf(a));
    (cap * big_g(x, minus, plus, alpha)).min(1.0)
}

/// Constant of the one-dimensional Poisson kernel of a ball.
pub fn poisson_constant(alpha: Alpha) -> f64 {
    (PI * alpha.get()).sin() / PI
}

/// Fractional Poisson kernel of `B(z, r)`: density at exterior point `y`
/// of the harmonic measure seen from interior point `x`.
pub fn poisson_kernel(x: f64, y: f64, z: f64, r: f64, alpha: Alpha) -> Result<f64> {
    let dx = (x - z).abs();
    let dy = (y - z).abs();
    if !(r > 0.0 && dx < r && dy > r) {
        return Err(Error::ArgumentsOutsideSupport);
    }
    let ratio = (r * r - dx * dx) / (dy * dy - r * r);
    Ok(poisson_constant(alpha) * ratio.powf(alpha.get()) / (x - y).abs())
}

/// `Γ(1/2) / (4^α Γ(1+α) Γ(1/2+α))`.
pub fn bubble_constant(alpha: Alpha) -> f64 {
    let a = alpha.get();
    gamma(0.5) / (4f64.powf(a) * gamma(1.0 + a) * gamma(0.5 + a))
}

/// Bubble `β_{z,r}`: solves `(−Δ)^α β = 1` in `B(z, r)`, zero outside.
pub fn bubble(x: f64, z: f64, r: f64, alpha: Alpha) -> f64 {
    let s = r * r - (x - z) * (x - z);
    if s <= 0.0 {
        0.0
    } else {
        bubble_constant(alpha) * s.powf(alpha.get())
    }
}
