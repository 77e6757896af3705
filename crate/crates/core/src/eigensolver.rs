//! Principal eigenpair of the discrete Dirichlet fractional Laplacian.
//!
//! The matrix is factored once (Cholesky) and a small block of vectors is
//! driven by inverse iteration with a Rayleigh–Ritz step each sweep. A plain
//! single-vector iteration stalls on two far-apart patches, whose two lowest
//! eigenvalues differ only by the inter-patch coupling; the Ritz step
//! separates them once the block has captured both.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::discretization::{assemble, Grid, OperatorMatrix};
use crate::domain::Domain1D;
use crate::error::{Error, Result};
use crate::kernel::Alpha;

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 500;
const BLOCK: usize = 4;

/// Principal eigenvalue `ξ`, `λ = ξ − 1` and the positive eigenfunction,
/// normalized to unit grid `L²` norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenResult {
    pub xi: f64,
    pub lambda: f64,
    pub phi: Vec<f64>,
    pub iterations: usize,
    /// `‖M φ − ξ φ‖` in the grid norm.
    pub residual: f64,
    pub h: f64,
    pub alpha: f64,
    pub domain: Domain1D,
}

impl EigenResult {
    pub fn sup_phi(&self) -> f64 {
        self.phi.iter().fold(0.0, |m, &v| f64::max(m, v))
    }
}

/// Smallest eigenpair of `m`. Converged when the grid-norm residual drops
/// below `tol · max(1, max diag M)`.
pub fn principal_eigen(m: &OperatorMatrix, tol: f64, max_iter: usize) -> Result<EigenResult> {
    let grid = m.grid();
    let n = m.dim();
    if n == 0 {
        return Err(Error::InvalidParameter("empty grid".into()));
    }
    let a = m.entries();
    let chol = a.clone().cholesky().ok_or(Error::NotPositiveDefinite)?;
    let p = BLOCK.min(n);
    let (wa, wb) = grid.window();
    let mut x = DMatrix::from_fn(n, p, |i, c| {
        let t = (grid.nodes()[i] - wa) / (wb - wa);
        ((c + 1) as f64 * std::f64::consts::PI * t).sin() + if c == 0 { 0.0 } else { 1e-3 * t }
    });
    let target = tol * m.scale().max(1.0);
    let w = grid.h().sqrt();

    for it in 1..=max_iter {
        let y = chol.solve(&x);
        let q = y.qr().q();
        let aq = a * &q;
        let mut hsmall = q.transpose() * &aq;
        hsmall = 0.5 * (&hsmall + hsmall.transpose());
        let eig = SymmetricEigen::new(hsmall);
        let mut order: Vec<usize> = (0..p).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let v = DMatrix::from_fn(p, p, |r, c| eig.eigenvectors[(r, order[c])]);
        x = &q * &v;
        let ax = &aq * &v;
        let theta = eig.eigenvalues[order[0]];
        let lead = x.column(0);
        let resid = (ax.column(0) - lead * theta).norm();
        // unit Euclidean x ↦ φ = x/√h has unit grid norm and the same residual
        let residual = resid;
        if residual <= target {
            let sign = if lead.sum() < 0.0 { -1.0 } else { 1.0 };
            let phi: Vec<f64> = lead.iter().map(|v| sign * v / w).collect();
            if phi.iter().any(|&v| v <= 0.0) {
                return Err(Error::NonPositiveEigenvector);
            }
            return Ok(EigenResult {
                xi: theta,
                lambda: theta - 1.0,
                phi,
                iterations: it,
                residual,
                h: grid.h(),
                alpha: m.alpha().get(),
                domain: grid.domain().clone(),
            });
        }
    }
    Err(Error::NoConvergence(max_iter))
}

/// Assembles on `(d, h)` and solves with default tolerances.
pub fn xi_alpha(d: &Domain1D, alpha: Alpha, h: f64) -> Result<EigenResult> {
    let grid = Grid::new(d, h)?;
    let m = assemble(&grid, alpha);
    principal_eigen(&m, DEFAULT_TOL, DEFAULT_MAX_ITER)
}

/// `⟨M u, u⟩ / ⟨u, u⟩` in the grid inner product.
pub fn rayleigh(m: &OperatorMatrix, u: &[f64]) -> Result<f64> {
    let mu = m.apply(u)?;
    let g = m.grid();
    let uu = g.dot(u, u);
    if uu == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok(g.dot(&mu, u) / uu)
}

/// Richardson value `fine + (fine − coarse)/(2^order − 1)` for a pair of
/// solves at `h` and `h/2`.
pub fn extrapolate(coarse: &EigenResult, fine: &EigenResult, order: f64) -> Result<f64> {
    if !(order > 0.0) {
        return Err(Error::InvalidParameter(format!("order must be positive, got {order}")));
    }
    if (fine.h * 2.0 - coarse.h).abs() > 1e-12 * coarse.h {
        return Err(Error::GridMismatch(format!("h = {} and {} are not a halving", coarse.h, fine.h)));
    }
    if fine.alpha != coarse.alpha || fine.domain != coarse.domain {
        return Err(Error::GridMismatch("different domain or alpha".into()));
    }
    Ok(richardson(coarse.xi, fine.xi, order))
}

/// Richardson step on raw values.
pub fn richardson(coarse: f64, fine: f64, order: f64) -> f64 {
    fine + (fine - coarse) / (2f64.powf(order) - 1.0)
}

/// Default extrapolation order `min(1, 2 − 2α)`.
pub fn default_order(alpha: Alpha) -> f64 {
    (2.0 - 2.0 * alpha.get()).min(1.0)
}

/// Observed convergence order from three successive halvings, when the
/// increments are monotone.
pub fn observed_order(x_h: f64, x_h2: f64, x_h4: f64) -> Option<f64> {
    let d1 = x_h - x_h2;
    let d2 = x_h2 - x_h4;
    if d1 == 0.0 || d2 == 0.0 || d1.signum() != d2.signum() {
        return None;
    }
    let p = (d1 / d2).log2();
    (p > 0.0).then_some(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::TwoPatch;

    fn al(v: f64) -> Alpha {
        Alpha::new(v).unwrap()
    }

    #[test]
    fn two_by_two_hand_case() {
        let d = Domain1D::new(&[(0.0, 4.0)]).unwrap();
        let g = Grid::new(&d, 1.0).unwrap();
        let m = assemble(&g, al(0.5));
        // matrix is 3x3 here; check against a direct dense eigensolve
        let eig = SymmetricEigen::new(m.entries().clone());
        let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        let r = principal_eigen(&m, 1e-12, 100).unwrap();
        assert!((r.xi - min).abs() < 1e-12 * min.max(1.0));
        assert!((r.lambda - (r.xi - 1.0)).abs() == 0.0);
    }

    #[test]
    fn rayleigh_properties() {
        let d = TwoPatch::new(1.0, 1.0, 0.5).unwrap().domain();
        let g = Grid::new(&d, 1.0 / 32.0).unwrap();
        let m = assemble(&g, al(0.5));
        let r = principal_eigen(&m, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
        assert!((g.norm(&r.phi) - 1.0).abs() < 1e-12);
        assert!((rayleigh(&m, &r.phi).unwrap() - r.xi).abs() < 1e-9);
        let u: Vec<f64> = g.nodes().iter().map(|x| 1.0 + x * x).collect();
        assert!(rayleigh(&m, &u).unwrap() >= r.xi - 1e-9);
        assert_eq!(rayleigh(&m, &vec![0.0; g.len()]), Err(Error::ZeroVector));
        let mphi = m.apply(&r.phi).unwrap();
        let res: Vec<f64> = mphi.iter().zip(&r.phi).map(|(a, b)| a - r.xi * b).collect();
        assert!(g.norm(&res) <= r.residual * (1.0 + 1e-6) + 1e-12);
    }

    #[test]
    fn symmetric_patches_give_even_eigenfunction() {
        let d = TwoPatch::new(2.0, 2.0, 0.5).unwrap().domain();
        let r = xi_alpha(&d, al(0.5), 1.0 / 32.0).unwrap();
        let n = r.phi.len();
        for i in 0..n {
            assert!((r.phi[i] - r.phi[n - 1 - i]).abs() < 1e-8);
        }
    }

    #[test]
    fn far_patches_still_converge() {
        let d = TwoPatch::new(1.5, 1.5, 80.0).unwrap().domain();
        let r = xi_alpha(&d, al(0.5), 1.0 / 16.0).unwrap();
        assert!(r.phi.iter().all(|&v| v > 0.0));
        let single = xi_alpha(&Domain1D::new(&[(0.0, 1.5)]).unwrap(), al(0.5), 1.0 / 16.0).unwrap();
        assert!(r.xi < single.xi);
    }

    #[test]
    fn extrapolate_examples() {
        let d = Domain1D::new(&[(0.0, 2.0)]).unwrap();
        let c = xi_alpha(&d, al(0.5), 0.125).unwrap();
        assert_eq!(extrapolate(&c, &c, 1.0).unwrap_err(), Error::GridMismatch(format!("h = {} and {} are not a halving", 0.125, 0.125)));
        let mut same = c.clone();
        same.h = 0.0625;
        assert_eq!(extrapolate(&c, &same, 1.0).unwrap(), c.xi);
        // x_h = 3 + 5 h^0.7
        let f = |h: f64| 3.0 + 5.0 * h.powf(0.7);
        assert!((richardson(f(0.1), f(0.05), 0.7) - 3.0).abs() < 1e-12);
        let p = observed_order(f(0.1), f(0.05), f(0.025)).unwrap();
        assert!((p - 0.7).abs() < 1e-10);
        assert_eq!(observed_order(1.0, 1.0, 1.0), None);
    }

    #[test]
    fn translation_invariance() {
        let d = TwoPatch::new(1.0, 1.5, 0.3).unwrap().domain();
        let a = xi_alpha(&d, al(0.4), 1.0 / 32.0).unwrap();
        let b = xi_alpha(&d.translate(7.0), al(0.4), 1.0 / 32.0).unwrap();
        assert!((a.xi - b.xi).abs() < 1e-11 * a.xi);
    }
}
