//! Uniform grids on fragmented domains and the dense matrix of the
//! fractional Laplacian with exterior Dirichlet conditions.
//!
//! Row `i` approximates `C_α PV∫ (u(x_i) − u(y)) |x_i − y|^{−1−2α} dy` where
//! `u` is the piecewise-linear interpolant of the nodal values, vanishing at
//! interval endpoints and outside the domain:
//!
//! * on `[x_i − h, x_i + h]` the symmetric second difference replaces
//!   `2u(x_i) − u(x_i + s) − u(x_i − s)`, giving `h^{−2α}/(2−2α)` times the
//!   three-point stencil;
//! * every other cell of the domain is integrated exactly against the hat
//!   functions of its two endpoints (Gauss–Legendre once the cell is far
//!   enough for the integrand to be smooth);
//! * the complement of the domain contributes `u(x_i)` times the kernel mass
//!   of the two tails outside the hull and of each gap between intervals.

use std::io::{Read, Write};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::domain::{Domain1D, Interval};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::kernel::{c_alpha, interval_kernel_integral, power_moment0, power_moment1, Alpha};

/// Cells farther than this many cell widths use Gauss–Legendre.
const FAR_CELL_RATIO: f64 = 4.0;

// 8-point Gauss–Legendre on [-1, 1].
const GL_NODES: [f64; 8] = [
    -0.960_289_856_497_536_3,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL_WEIGHTS: [f64; 8] = [
    0.101_228_536_290_376_26,
    0.222_381_034_453_374_47,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362,
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_47,
    0.101_228_536_290_376_26,
];

/// Uniform mesh of a [`Domain1D`]; interval endpoints are not nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    domain: Domain1D,
    h: f64,
    window: (f64, f64),
    /// Cell count per interval.
    cells: Vec<usize>,
    /// Effective mesh width per interval.
    widths: Vec<f64>,
    /// Index of the first node of each interval.
    offsets: Vec<usize>,
    nodes: Vec<f64>,
    owner: Vec<usize>,
}

impl Grid {
    /// Meshes every interval with `round(len / h)` cells.
    pub fn new(domain: &Domain1D, h: f64) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidParameter(format!("mesh width must be positive, got {h}")));
        }
        let shortest = domain.shortest();
        if h > shortest / 4.0 * (1.0 + 1e-12) {
            return Err(Error::MeshTooCoarse { h, shortest });
        }
        let mut cells = Vec::with_capacity(domain.len());
        let mut widths = Vec::with_capacity(domain.len());
        let mut offsets = Vec::with_capacity(domain.len());
        let mut nodes = Vec::new();
        let mut owner = Vec::new();
        for (k, iv) in domain.intervals().iter().enumerate() {
            let n = (iv.len() / h).round().max(4.0) as usize;
            let hk = iv.len() / n as f64;
            cells.push(n);
            widths.push(hk);
            offsets.push(nodes.len());
            for j in 1..n {
                nodes.push(iv.a + j as f64 * hk);
                owner.push(k);
            }
        }
        Ok(Grid {
            domain: domain.clone(),
            h,
            window: domain.hull(),
            cells,
            widths,
            offsets,
            nodes,
            owner,
        })
    }

    pub fn domain(&self) -> &Domain1D {
        &self.domain
    }

    /// Requested mesh width.
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn window(&self) -> (f64, f64) {
        self.window
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Interval owning node `i`.
    pub fn node_interval(&self, i: usize) -> Interval {
        self.domain.intervals()[self.owner[i]]
    }

    pub fn owner(&self, i: usize) -> usize {
        self.owner[i]
    }

    /// Mesh width used inside interval `k`.
    pub fn width(&self, k: usize) -> f64 {
        self.widths[k]
    }

    /// Node indices belonging to interval `k`.
    pub fn interval_nodes(&self, k: usize) -> std::ops::Range<usize> {
        let start = self.offsets[k];
        start..start + self.cells[k] - 1
    }

    /// Weight of node `i` in the grid inner product. All nodes carry the
    /// requested mesh width so that the weighted Rayleigh quotient of the
    /// symmetric operator matrix is minimized by its eigenvector.
    pub fn weight(&self, _i: usize) -> f64 {
        self.h
    }

    /// `sqrt(Σ w_i u_i²)`.
    pub fn norm(&self, u: &[f64]) -> f64 {
        self.dot(u, u).sqrt()
    }

    /// `Σ w_i u_i v_i`.
    pub fn dot(&self, u: &[f64], v: &[f64]) -> f64 {
        u.iter()
            .zip(v)
            .enumerate()
            .map(|(i, (a, b))| self.weight(i) * a * b)
            .sum()
    }

    /// Boundary distance of every node.
    pub fn deltas(&self) -> Vec<f64> {
        self.nodes
            .iter()
            .zip(&self.owner)
            .map(|(&x, &k)| {
                let iv = self.domain.intervals()[k];
                (x - iv.a).min(iv.b - x)
            })
            .collect()
    }

    /// Evaluates the piecewise-linear interpolant of nodal values `u`
    /// (zero at endpoints and outside the domain) at `x`.
    pub fn interpolate(&self, u: &[f64], x: f64) -> f64 {
        let Some(k) = self.domain.find(x) else {
            return 0.0;
        };
        let iv = self.domain.intervals()[k];
        let hk = self.widths[k];
        let n = self.cells[k];
        let t = (x - iv.a) / hk;
        let l = (t.floor() as usize).min(n - 1);
        let frac = t - l as f64;
        let value = |j: usize| {
            if j == 0 || j >= n {
                0.0
            } else {
                u[self.offsets[k] + j - 1]
            }
        };
        value(l) * (1.0 - frac) + value(l + 1) * frac
    }

    /// Nodal values of `f`.
    pub fn sample<F: Fn(f64) -> f64>(&self, f: F) -> Vec<f64> {
        self.nodes.iter().map(|&x| f(x)).collect()
    }
}

/// Weights of the two endpoints of a cell at distances `[c, d]` from the
/// evaluation point: `(near, far)` such that `near + far = ∫_c^d s^{−1−2α}`.
fn cell_weights(c: f64, d: f64, alpha: f64) -> (f64, f64) {
    let w = d - c;
    if c >= FAR_CELL_RATIO * w {
        let mid = 0.5 * (c + d);
        let half = 0.5 * w;
        let p = -1.0 - 2.0 * alpha;
        let (mut near, mut far) = (0.0, 0.0);
        for (t, g) in GL_NODES.iter().zip(GL_WEIGHTS) {
            let s = mid + half * t;
            let k = g * half * s.powf(p);
            near += k * (1.0 - t) * 0.5;
            far += k * (1.0 + t) * 0.5;
        }
        (near, far)
    } else {
        let i0 = power_moment0(c, d, alpha);
        let i1 = power_moment1(c, d, alpha);
        ((d * i0 - i1) / w, (i1 - c * i0) / w)
    }
}

/// Dense symmetric matrix of the discrete Dirichlet fractional Laplacian.
#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    alpha: Alpha,
    grid: Grid,
    entries: DMatrix<f64>,
    asymmetry: f64,
}

impl OperatorMatrix {
    pub fn alpha(&self) -> Alpha {
        self.alpha
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.grid.len()
    }

    /// `max |M − Mᵀ|` before symmetrization.
    pub fn asymmetry(&self) -> f64 {
        self.asymmetry
    }

    /// Largest diagonal entry, a cheap scale for residual tolerances.
    pub fn scale(&self) -> f64 {
        self.entries.diagonal().iter().fold(0.0, |m, &v| f64::max(m, v.abs()))
    }

    /// Matrix-vector product.
    pub fn apply(&self, u: &[f64]) -> Result<Vec<f64>> {
        if u.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: u.len() });
        }
        let n = self.dim();
        let mut out = vec![0.0; n];
        // column-major storage: accumulate column by column
        for (j, &uj) in u.iter().enumerate() {
            if uj == 0.0 {
                continue;
            }
            let col = self.entries.column(j);
            for (o, &m) in out.iter_mut().zip(col.iter()) {
                *o += m * uj;
            }
        }
        Ok(out)
    }

    /// Writes the matrix and grid: magic `FRACMAT1`, little-endian `u64`
    /// header length, JSON header, `dim` node coordinates, then `dim²`
    /// row-major entries, all little-endian `f64`.
    pub fn write_dump<W: Write>(&self, mut w: W) -> Result<()> {
        let header = DumpHeader {
            dim: self.dim(),
            h: self.grid.h,
            alpha: self.alpha.get(),
            window: [self.grid.window.0, self.grid.window.1],
        };
        let json = serde_json::to_vec(&header)?;
        w.write_all(b"FRACMAT1")?;
        w.write_all(&(json.len() as u64).to_le_bytes())?;
        w.write_all(&json)?;
        for x in &self.grid.nodes {
            w.write_all(&x.to_le_bytes())?;
        }
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                w.write_all(&self.entries[(i, j)].to_le_bytes())?;
            }
        }
        Ok(())
    }
}

/// Header of a matrix dump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DumpHeader {
    pub dim: usize,
    pub h: f64,
    pub alpha: f64,
    pub window: [f64; 2],
}

/// Reads a dump written by [`OperatorMatrix::write_dump`]; returns the
/// header, node coordinates and row-major entries.
pub fn read_dump<R: Read>(mut r: R) -> Result<(DumpHeader, Vec<f64>, Vec<f64>)> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != b"FRACMAT1" {
        return Err(Error::Config("not a matrix dump".into()));
    }
    let mut len = [0u8; 8];
    r.read_exact(&mut len)?;
    let mut json = vec![0u8; u64::from_le_bytes(len) as usize];
    r.read_exact(&mut json)?;
    let header: DumpHeader = serde_json::from_slice(&json)?;
    let mut read_f64s = |n: usize| -> Result<Vec<f64>> {
        let mut buf = vec![0u8; 8 * n];
        r.read_exact(&mut buf)?;
        Ok(buf
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
            .collect())
    };
    let nodes = read_f64s(header.dim)?;
    let entries = read_f64s(header.dim * header.dim)?;
    Ok((header, nodes, entries))
}

/// Per-interval lookup of `(near, far)` cell weights at integer offsets.
struct OffsetTable {
    weights: Vec<(f64, f64)>,
}

impl OffsetTable {
    fn new(cells: usize, hk: f64, alpha: f64) -> Self {
        // offset m ≥ 1: cell at distances [m hk, (m+1) hk]
        let weights = (0..=cells)
            .map(|m| {
                if m == 0 {
                    (0.0, 0.0)
                } else {
                    cell_weights(m as f64 * hk, (m + 1) as f64 * hk, alpha)
                }
            })
            .collect();
        OffsetTable { weights }
    }
}

/// Assembles one unscaled row (without the `C_α` factor).
fn assemble_row(grid: &Grid, tables: &[OffsetTable], i: usize, alpha: f64) -> Vec<f64> {
    let n = grid.len();
    let mut row = vec![0.0; n];
    let k = grid.owner[i];
    let hk = grid.widths[k];
    let nk = grid.cells[k];
    let j = i - grid.offsets[k] + 1;
    let xi = grid.nodes[i];
    let mut diag = 0.0;

    // local part: three-point stencil scaled by ∫_0^h s^{1−2α} ds / h²
    let q = hk.powf(-2.0 * alpha) / (2.0 - 2.0 * alpha);
    diag += 2.0 * q;
    if j > 1 {
        row[i - 1] -= q;
    }
    if j + 1 < nk {
        row[i + 1] -= q;
    }

    let node_of = |kk: usize, l: usize| -> Option<usize> {
        (l >= 1 && l < grid.cells[kk]).then(|| grid.offsets[kk] + l - 1)
    };

    // own interval, cells away from x_i, via the offset table
    let table = &tables[k];
    for l in (j + 1)..nk {
        let (near, far) = table.weights[l - j];
        diag += near + far;
        if let Some(p) = node_of(k, l) {
            row[p] -= near;
        }
        if let Some(p) = node_of(k, l + 1) {
            row[p] -= far;
        }
    }
    for l in 0..j.saturating_sub(1) {
        // cell [t_l, t_{l+1}] left of x_i, near end is l+1
        let (near, far) = table.weights[j - l - 1];
        diag += near + far;
        if let Some(p) = node_of(k, l + 1) {
            row[p] -= near;
        }
        if let Some(p) = node_of(k, l) {
            row[p] -= far;
        }
    }

    // other intervals
    for (kk, iv) in grid.domain.intervals().iter().enumerate() {
        if kk == k {
            continue;
        }
        let hm = grid.widths[kk];
        let nm = grid.cells[kk];
        let right = iv.a > xi;
        for l in 0..nm {
            let t0 = iv.a + l as f64 * hm;
            let t1 = if l + 1 == nm { iv.b } else { iv.a + (l + 1) as f64 * hm };
            let (c, d, near_node, far_node) = if right {
                (t0 - xi, t1 - xi, l, l + 1)
            } else {
                (xi - t1, xi - t0, l + 1, l)
            };
            let (near, far) = cell_weights(c, d, alpha);
            diag += near + far;
            if let Some(p) = node_of(kk, near_node) {
                row[p] -= near;
            }
            if let Some(p) = node_of(kk, far_node) {
                row[p] -= far;
            }
        }
    }

    // exterior: tails beyond the window and gaps between intervals
    let a = Alpha::new(alpha).expect("validated alpha");
    let (wa, wb) = grid.window;
    let two_a = 2.0 * alpha;
    diag += ((xi - wa).powf(-two_a) + (wb - xi).powf(-two_a)) / two_a;
    for (ga, gb) in grid.domain.gaps() {
        diag += interval_kernel_integral(ga, gb, xi, a).expect("node outside gaps");
    }

    row[i] += diag;
    row
}

/// Assembles the operator matrix on the rayon pool when available.
pub fn assemble(grid: &Grid, alpha: Alpha) -> OperatorMatrix {
    assemble_with(grid, alpha, Execution::default())
}

/// Assembles the operator matrix with an explicit execution policy.
pub fn assemble_with(grid: &Grid, alpha: Alpha, exec: Execution) -> OperatorMatrix {
    let a = alpha.get();
    let scale = c_alpha(alpha, 1).expect("dimension 1");
    let tables: Vec<OffsetTable> = grid
        .cells
        .iter()
        .zip(&grid.widths)
        .map(|(&nk, &hk)| OffsetTable::new(nk, hk, a))
        .collect();
    let rows = exec.map_range(grid.len(), |i| assemble_row(grid, &tables, i, a));
    let n = grid.len();
    let mut m = DMatrix::from_fn(n, n, |i, j| scale * rows[i][j]);
    let mut asymmetry = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            let (u, l) = (m[(i, j)], m[(j, i)]);
            asymmetry = asymmetry.max((u - l).abs());
            let s = 0.5 * (u + l);
            m[(i, j)] = s;
            m[(j, i)] = s;
        }
    }
    OperatorMatrix { alpha, grid: grid.clone(), entries: m, asymmetry }
}

/// [`Grid::new`] under its operation name.
pub fn build_grid(domain: &Domain1D, h: f64) -> Result<Grid> {
    Grid::new(domain, h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::TwoPatch;

    fn al(v: f64) -> Alpha {
        Alpha::new(v).unwrap()
    }

    #[test]
    fn grid_examples() {
        let d = Domain1D::new(&[(0.0, 2.0)]).unwrap();
        let g = Grid::new(&d, 0.5).unwrap();
        assert_eq!(g.nodes(), &[0.5, 1.0, 1.5]);
        let d = Domain1D::new(&[(0.0, 1.0), (2.0, 3.0)]).unwrap();
        let g = Grid::new(&d, 0.25).unwrap();
        assert_eq!(g.len(), 6);
        assert_eq!(g.interval_nodes(1), 3..6);
        let d = Domain1D::new(&[(0.0, 2.0)]).unwrap();
        assert!(matches!(Grid::new(&d, 1.0), Err(Error::MeshTooCoarse { .. })));
    }

    #[test]
    fn grid_snaps_lengths_but_not_gaps() {
        let d = TwoPatch::new(1.0, 1.3, 0.123).unwrap().domain();
        let g = Grid::new(&d, 0.1).unwrap();
        assert_eq!(g.cells, vec![10, 13]);
        assert!((g.width(1) - 0.1).abs() < 1e-15);
        assert_eq!(g.window(), (-1.123, 1.423));
        for i in 0..g.len() {
            assert!(g.node_interval(i).contains(g.nodes()[i]));
        }
    }

    #[test]
    fn interpolation_reproduces_nodes_and_vanishes_outside() {
        let d = Domain1D::new(&[(0.0, 1.0), (2.0, 3.0)]).unwrap();
        let g = Grid::new(&d, 0.25).unwrap();
        let u: Vec<f64> = (1..=6).map(|v| v as f64).collect();
        for (i, &x) in g.nodes().iter().enumerate() {
            assert_eq!(g.interpolate(&u, x), u[i]);
        }
        assert_eq!(g.interpolate(&u, 0.125), 0.5);
        assert_eq!(g.interpolate(&u, 1.5), 0.0);
        assert_eq!(g.interpolate(&u, 2.875), 3.0);
    }

    #[test]
    fn cell_weights_branches_agree() {
        for &alpha in &[0.25, 0.5, 0.75, 0.95] {
            let (c, d) = (4.0, 5.0);
            let i0 = power_moment0(c, d, alpha);
            let i1 = power_moment1(c, d, alpha);
            let exact = ((d * i0 - i1), (i1 - c * i0));
            let gl = cell_weights(c, d, alpha);
            assert!((gl.0 - exact.0).abs() < 1e-13 * exact.0, "{alpha}");
            assert!((gl.1 - exact.1).abs() < 1e-13 * exact.1, "{alpha}");
            assert!((gl.0 + gl.1 - i0).abs() < 1e-14 * i0);
        }
    }

    #[test]
    fn exterior_plus_far_mass_is_closed_form() {
        // Σ far-cell masses + exterior mass = ∫_{|s|>h} |s|^{−1−2α} = h^{−2α}/α
        let d = Domain1D::new(&[(0.0, 1.0), (1.3, 2.0), (4.0, 4.5)]).unwrap();
        let g = Grid::new(&d, 1.0 / 16.0).unwrap();
        for &a in &[0.3, 0.5, 0.8] {
            let m = assemble(&g, al(a));
            let c = c_alpha(al(a), 1).unwrap();
            for i in 0..g.len() {
                let hk = g.width(g.owner(i));
                let expect = c * hk.powf(-2.0 * a) * (1.0 / a + 1.0 / (1.0 - a));
                let got = m.entries()[(i, i)];
                assert!((got - expect).abs() < 1e-11 * expect, "alpha {a} node {i}");
            }
        }
    }

    #[test]
    fn z_matrix_and_positive_row_sums() {
        let d = Domain1D::new(&[(0.0, 1.0), (1.5, 3.0)]).unwrap();
        let g = Grid::new(&d, 1.0 / 32.0).unwrap();
        for &a in &[0.2, 0.5, 0.9] {
            let m = assemble(&g, al(a));
            let e = m.entries();
            for i in 0..g.len() {
                assert!(e[(i, i)] > 0.0);
                for j in 0..g.len() {
                    if i != j {
                        assert!(e[(i, j)] <= 0.0);
                    }
                }
            }
            let ones = vec![1.0; g.len()];
            assert!(m.apply(&ones).unwrap().iter().all(|&v| v > 0.0));
        }
    }

    #[test]
    fn single_interval_is_exactly_symmetric() {
        let d = Domain1D::new(&[(0.0, 2.0)]).unwrap();
        let g = Grid::new(&d, 1.0 / 16.0).unwrap();
        let m = assemble(&g, al(0.6));
        assert!(m.asymmetry() < 1e-12 * m.scale());
    }

    #[test]
    fn asymmetry_shrinks_under_refinement() {
        let d = Domain1D::new(&[(0.0, 1.03), (1.5, 2.77)]).unwrap();
        let coarse = assemble(&Grid::new(&d, 1.0 / 16.0).unwrap(), al(0.5));
        let fine = assemble(&Grid::new(&d, 1.0 / 64.0).unwrap(), al(0.5));
        assert!(coarse.asymmetry() > 0.0);
        assert!(fine.asymmetry() < coarse.asymmetry());
    }

    #[test]
    fn patch_swap_symmetry() {
        let d = TwoPatch::new(1.0, 1.0, 3.0).unwrap().domain();
        let g = Grid::new(&d, 1.0 / 16.0).unwrap();
        let m = assemble(&g, al(0.4));
        let n = g.len();
        let e = m.entries();
        for i in 0..n {
            for j in 0..n {
                let (pi, pj) = (n - 1 - i, n - 1 - j);
                assert!((e[(i, j)] - e[(pi, pj)]).abs() < 1e-12 * m.scale());
            }
        }
    }

    #[test]
    fn apply_examples() {
        let d = Domain1D::new(&[(0.0, 1.0)]).unwrap();
        let m = assemble(&Grid::new(&d, 0.125).unwrap(), al(0.5));
        assert!(m.apply(&[0.0; 7]).unwrap().iter().all(|&v| v == 0.0));
        assert_eq!(
            m.apply(&[1.0, 2.0]),
            Err(Error::DimensionMismatch { expected: 7, got: 2 })
        );
    }

    #[test]
    fn sequential_and_parallel_assembly_agree() {
        let d = Domain1D::new(&[(0.0, 1.0), (2.0, 2.5)]).unwrap();
        let g = Grid::new(&d, 1.0 / 32.0).unwrap();
        let a = assemble_with(&g, al(0.7), Execution::Sequential);
        let b = assemble_with(&g, al(0.7), Execution::Parallel);
        assert_eq!(a.entries(), b.entries());
    }

    #[test]
    fn dump_round_trip() {
        let d = Domain1D::new(&[(0.0, 1.0), (2.0, 2.5)]).unwrap();
        let g = Grid::new(&d, 0.125).unwrap();
        let m = assemble(&g, al(0.3));
        let mut buf = Vec::new();
        m.write_dump(&mut buf).unwrap();
        let (hdr, nodes, entries) = read_dump(buf.as_slice()).unwrap();
        assert_eq!(hdr.dim, g.len());
        assert_eq!(hdr.window, [0.0, 2.5]);
        assert_eq!(nodes, g.nodes());
        assert_eq!(entries[1], m.entries()[(0, 1)]);
        assert_eq!(entries[g.len()], m.entries()[(1, 0)]);
        assert!(read_dump(&b"garbage!"[..]).is_err());
    }
}
