use fraclab::kernel::bubble;
use fraclab::*;
use proptest::prelude::*;

fn al(a: f64) -> Alpha {
    Alpha::new(a).unwrap()
}

fn two_patches(a1: f64, a2: f64, mu: f64) -> Domain1D {
    TwoPatch::new(a1, a2, mu).unwrap().domain()
}

/// Smooth bump vanishing to second order at the ends of (−1, 1).
fn smooth(x: f64) -> f64 {
    let s = 1.0 - x * x;
    if s > 0.0 {
        s * s * (1.0 + 0.3 * x)
    } else {
        0.0
    }
}

/// `M_h u` sampled at the points `xs` (all of which are nodes).
fn applied_at(h: f64, alpha: Alpha, xs: &[f64]) -> Vec<f64> {
    let g = Grid::new(&Domain1D::new(&[(-1.0, 1.0)]).unwrap(), h).unwrap();
    let r = assemble(&g, alpha).apply(&g.sample(smooth)).unwrap();
    xs.iter()
        .map(|&x| {
            let i = g.nodes().iter().position(|&n| (n - x).abs() < 1e-9).unwrap();
            r[i]
        })
        .collect()
}

#[test]
fn self_convergence_on_a_smooth_function() {
    let xs: Vec<f64> = (-4..=4).map(|k| k as f64 / 8.0).collect();
    for a in [0.25, 0.5] {
        let v: Vec<Vec<f64>> = [16.0, 32.0, 64.0, 128.0].iter().map(|n| applied_at(1.0 / n, al(a), &xs)).collect();
        let d: Vec<f64> = v
            .windows(2)
            .map(|w| w[0].iter().zip(&w[1]).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max))
            .collect();
        for p in d.windows(2) {
            assert!(p[0] / p[1] >= 1.5, "alpha {a}: successive differences {d:?}");
        }
    }
}

#[test]
fn bubble_residual_is_small_and_shrinks() {
    let alpha = al(0.5);
    let err = |h: f64| {
        let g = Grid::new(&Domain1D::new(&[(2.0, 4.0)]).unwrap(), h).unwrap();
        let r = assemble(&g, alpha).apply(&g.sample(|x| bubble(x, 3.0, 1.0, alpha))).unwrap();
        g.nodes()
            .iter()
            .zip(&r)
            .filter(|(x, _)| 1.0 - (*x - 3.0).abs() >= 0.25)
            .map(|(_, v)| (v - 1.0).abs())
            .fold(0.0, f64::max)
    };
    let (coarse, fine) = (err(1.0 / 64.0), err(1.0 / 128.0));
    assert!(fine <= 0.05, "{fine}");
    assert!(fine < coarse);
}

#[test]
fn eigenpair_is_consistent_with_apply() {
    let g = Grid::new(&two_patches(1.0, 1.5, 0.3), 1.0 / 32.0).unwrap();
    let m = assemble(&g, al(0.6));
    let e = principal_eigen(&m, 1e-12, 1000).unwrap();
    let mphi = m.apply(&e.phi).unwrap();
    let worst = mphi.iter().zip(&e.phi).map(|(a, b)| (a - e.xi * b).abs()).fold(0.0, f64::max);
    assert!(worst < 1e-8 * e.xi.max(1.0), "{worst}");
    assert!(e.phi.iter().all(|&v| v > 0.0));
}

#[test]
fn sequential_fallback_is_bitwise_identical() {
    let g = Grid::new(&two_patches(1.0, 1.0, 0.25), 1.0 / 32.0).unwrap();
    let s = assemble_with(&g, al(0.35), Execution::Sequential);
    let p = assemble_with(&g, al(0.35), Execution::Parallel);
    assert_eq!(s.entries(), p.entries());
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn assembled_matrices_are_z_matrices(
        a1 in 0.5f64..2.0,
        a2 in 0.5f64..2.0,
        mu in 0.0f64..1.5,
        alpha in 0.05f64..0.95,
    ) {
        let g = Grid::new(&two_patches(a1, a2, mu), 1.0 / 16.0).unwrap();
        let m = assemble(&g, al(alpha));
        let e = m.entries();
        let ones = m.apply(&vec![1.0; g.len()]).unwrap();
        for i in 0..g.len() {
            prop_assert!(e[(i, i)] > 0.0);
            prop_assert!(ones[i] > 0.0, "row sum {} at node {}", ones[i], i);
            for j in 0..g.len() {
                if i != j {
                    prop_assert!(e[(i, j)] <= 0.0);
                }
                prop_assert_eq!(e[(i, j)], e[(j, i)]);
            }
        }
    }

    #[test]
    fn grid_invariants(
        a1 in 0.5f64..3.0,
        a2 in 0.5f64..3.0,
        mu in 0.0f64..2.0,
        k in 3u32..7,
    ) {
        let d = two_patches(a1, a2, mu);
        let h = 2f64.powi(-(k as i32));
        let g = Grid::new(&d, h).unwrap();
        let (lo, hi) = g.window();
        for (i, &x) in g.nodes().iter().enumerate() {
            prop_assert!(d.contains(x));
            prop_assert!(lo < x && x < hi);
            prop_assert!(g.node_interval(i).contains(x));
        }
        for w in g.nodes().windows(2) {
            prop_assert!(w[1] > w[0]);
        }
        for k in 0..d.len() {
            let r = g.interval_nodes(k);
            let xs = &g.nodes()[r];
            for w in xs.windows(2) {
                prop_assert!((w[1] - w[0] - g.width(k)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn scaling_covariance_of_the_matrix(
        a1 in 0.5f64..2.0,
        mu in 0.0f64..1.0,
        s in 0.25f64..4.0,
        alpha in 0.05f64..0.95,
    ) {
        let d = two_patches(a1, 1.0, mu);
        let h = 1.0 / 16.0;
        let m = assemble(&Grid::new(&d, h).unwrap(), al(alpha));
        let ms = assemble(&Grid::new(&d.scale(s).unwrap(), s * h).unwrap(), al(alpha));
        let f = s.powf(-2.0 * alpha);
        let diff = (ms.entries() - m.entries() * f).amax();
        prop_assert!(diff <= 1e-10 * ms.scale(), "diff {}", diff);
    }

    #[test]
    fn eigenvalue_scales_like_a_power(
        s in 0.5f64..3.0,
        alpha in 0.1f64..0.9,
    ) {
        let d = two_patches(1.0, 1.0, 0.5);
        let h = 1.0 / 16.0;
        let x = xi_alpha(&d, al(alpha), h).unwrap().xi;
        let xs = xi_alpha(&d.scale(s).unwrap(), al(alpha), s * h).unwrap().xi;
        prop_assert!((xs - s.powf(-2.0 * alpha) * x).abs() <= 1e-8 * xs);
    }

    #[test]
    fn eigenvalue_grows_with_the_gap(
        mu in 0.0625f64..1.0,
        alpha in 0.1f64..0.9,
    ) {
        let h = 1.0 / 32.0;
        let near = xi_alpha(&two_patches(1.0, 1.0, mu), al(alpha), h).unwrap().xi;
        let far = xi_alpha(&two_patches(1.0, 1.0, 2.0 * mu), al(alpha), h).unwrap().xi;
        prop_assert!(far >= near * (1.0 - 1e-10), "{} then {}", near, far);
    }

    #[test]
    fn sub_domains_have_larger_eigenvalues(
        len in 1.0f64..3.0,
        cut in 0.1f64..0.5,
        alpha in 0.1f64..0.9,
    ) {
        let h = 1.0 / 32.0;
        let big = xi_alpha(&Domain1D::new(&[(0.0, len)]).unwrap(), al(alpha), h).unwrap().xi;
        let small = xi_alpha(&Domain1D::new(&[(0.0, len * (1.0 - cut))]).unwrap(), al(alpha), h).unwrap().xi;
        prop_assert!(small > big);
    }
}
