//! Closed forms and brute-force references checked against the library.

use std::f64::consts::{E, PI};
use std::sync::Arc;

use glspace::operators::{apply, heat_kernel_row, make_test_family, OperatorKind, OperatorSpec};
use glspace::spaces::{fundamental_function_with, Settings};
use glspace::{
    fundamental_function, gls_norm, kappa, lp_norm, tail_bound, GeneratingFunction, MeasureSpace, MriNorm, PGrid,
    SampledFunction,
};

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Composite Simpson with `n` (even) panels.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let inner: f64 = (1..n)
        .map(|i| f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 })
        .sum();
    (f(a) + f(b) + inner) * h / 3.0
}

/// `max` of `objective` over `n` log-spaced points of `[lo, hi]`.
fn dense_max(objective: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> (f64, f64) {
    (0..n)
        .map(|i| {
            let p = (lo.ln() + (hi / lo).ln() * i as f64 / (n - 1) as f64).exp();
            (objective(p), p)
        })
        .fold((f64::NEG_INFINITY, 0.0), |a, b| if b.0 > a.0 { b } else { a })
}

#[test]
fn phi_matches_stationary_point() {
    for m in [0.5, 1.0, 2.0] {
        let psi = GeneratingFunction::power_law(m).unwrap();
        let hi = -1.0 / m;
        for i in 0..50 {
            let ln_delta = -20.0 + (hi + 20.0) * (i as f64 + 0.5) / 50.0;
            let delta = ln_delta.exp();
            let oracle = (-1.0 / m).exp() * (m * -ln_delta).powf(-1.0 / m);
            let got = fundamental_function(&psi, delta).unwrap();
            assert!(rel(got, oracle) < 1e-6, "m={m} delta={delta}: {got} vs {oracle}");
        }
    }
    let e = fundamental_function_with(
        &GeneratingFunction::power_law(1.0).unwrap(),
        (-2.0f64).exp(),
        &Settings::default(),
    )
    .unwrap();
    assert!(rel(e.value, (-1.0f64).exp() / 2.0) < 1e-12);
    assert!((e.argmax - 2.0).abs() < 1e-4);
}

#[test]
fn phi_endpoint_singular_against_dense_grid() {
    let (a, b, alpha, beta) = (1.5, 9.0, 0.4, 1.3);
    let psi = GeneratingFunction::endpoint_singular(a, b, alpha, beta).unwrap();
    for delta in [1e-4f64, 0.05, 0.7, 3.0] {
        let ln_psi = |p: f64| -alpha * (p - a).ln() - beta * (b - p).ln();
        let (best, _) = dense_max(|p| delta.ln() / p - ln_psi(p), a + 1e-9, b - 1e-9, 200_000);
        let got = fundamental_function(&psi, delta).unwrap();
        assert!(rel(got, best.exp()) < 1e-8, "{delta}: {got} vs {}", best.exp());
        assert!(got >= best.exp() * (1.0 - 1e-14));
    }
}

#[test]
fn tabulated_power_law_reproduces_power_law() {
    let ps: Vec<f64> = vec![1.0, 3.0, 20.0, 500.0, 1e4];
    let tab = GeneratingFunction::tabulated(ps.clone(), ps.iter().map(|p| p.sqrt()).collect()).unwrap();
    let pow = GeneratingFunction::power_law(2.0).unwrap();
    for delta in [1e-6, 1e-3, 0.2] {
        let (a, b) = (
            fundamental_function(&tab, delta).unwrap(),
            fundamental_function(&pow, delta).unwrap(),
        );
        assert!(rel(a, b) < 1e-9);
    }
}

#[test]
fn two_point_gls_norm_against_dense_grid() {
    let space = Arc::new(MeasureSpace::new(vec![0.0, 1.0], vec![0.5, 0.5]).unwrap());
    let f = SampledFunction::new(space, vec![1.0, 2.0]).unwrap();
    // psi(p) = p as a two-point table, exact under log-log interpolation
    let psi = GeneratingFunction::tabulated(vec![1.0, 1e4], vec![1.0, 1e4]).unwrap();
    let grid = psi.scan_grid(&Default::default()).unwrap();
    let got = gls_norm(&f, &psi, &grid).unwrap();
    let (oracle, argmax) = dense_max(|p| lp_norm(&f, p).unwrap() / p, 1.0, 1e4, 10_000);
    assert!(rel(got, 1.5) < 1e-12 && rel(oracle, 1.5) < 1e-12 && argmax == 1.0);
}

#[test]
fn tail_bound_closed_form() {
    let psi = GeneratingFunction::power_law(1.0).unwrap();
    let got = tail_bound(&psi, 1.0, 2.0 * E).unwrap();
    assert!(rel(got, (-2.0f64).exp()) < 1e-10, "{got}");
    // the bound is at most one at t = N psi(p0)
    for p0 in [1.5, 4.0, 30.0] {
        assert!(tail_bound(&psi, 0.7, 0.7 * p0).unwrap() <= 1.0 + 1e-15);
    }
    let r = GeneratingFunction::extremal(3.0).unwrap();
    assert_eq!(tail_bound(&r, 2.0, 4.0).unwrap(), 0.125);
}

#[test]
fn integral_kappa_closed_forms() {
    // psi = 1 on (1, 2): int_1^2 e^(1/p) dp
    let flat = GeneratingFunction::endpoint_singular(1.0, 2.0, 0.0, 0.0).unwrap();
    let z = MriNorm::integral(flat, 1.0).unwrap();
    let oracle = simpson(|p| (1.0 / p).exp(), 1.0, 2.0, 200_000);
    assert!(rel(oracle, 2.020_058_624_433_974_4) < 1e-13);
    assert!(rel(kappa(&z, E).unwrap(), oracle) < 1e-6);
    // psi = p^2 on [1, inf): int_1^inf delta^(1/p) p^-2 dp = (delta - 1) / ln delta
    let z = MriNorm::integral(GeneratingFunction::power_law(0.5).unwrap(), 1.0).unwrap();
    for delta in [1e-3, 0.4, 2.5, 40.0] {
        let oracle = (delta - 1.0) / f64::ln(delta);
        let got = kappa(&z, delta).unwrap();
        assert!(rel(got, oracle) < 1e-6, "{delta}: {got} vs {oracle}");
    }
    // s = 2: int_1^inf delta^(2/p) p^-4 dp, via u = 1/p: int_0^1 delta^(2u) u^2 du
    let z = MriNorm::integral(GeneratingFunction::power_law(0.5).unwrap(), 2.0).unwrap();
    let delta: f64 = 0.3;
    let oracle = simpson(|u| delta.powf(2.0 * u) * u * u, 0.0, 1.0, 20_000).sqrt();
    assert!(rel(kappa(&z, delta).unwrap(), oracle) < 1e-6);
}

#[test]
fn sup_kappa_is_phi_over_fifty_deltas() {
    for psi in [
        GeneratingFunction::power_law(1.0).unwrap(),
        GeneratingFunction::endpoint_singular(2.0, 5.0, 1.0, 0.5).unwrap(),
        GeneratingFunction::extremal(2.0).unwrap(),
    ] {
        let z = MriNorm::sup(psi.clone());
        for i in 0..50 {
            let delta = (-12.0 + 0.3 * i as f64).exp();
            let (a, b) = (kappa(&z, delta).unwrap(), fundamental_function(&psi, delta).unwrap());
            assert!(rel(a, b) <= 1e-10);
        }
    }
}

#[test]
fn nikolskii_family_has_the_right_degree() {
    for n in [1usize, 3, 10] {
        let op = OperatorSpec::nikolskii(n);
        for f in make_test_family(&op, 4, 99).unwrap() {
            let m = f.values().len();
            assert_eq!(m, 8 * (n + 1) + 1);
            // naive complex DFT, independent of the library's
            let mut top = 0.0f64;
            let mut low = 0.0f64;
            for k in 0..=m / 2 {
                let (mut re, mut im) = (0.0, 0.0);
                for (j, v) in f.values().iter().enumerate() {
                    let x = 2.0 * PI * (j as f64) * (k as f64) / m as f64;
                    re += v * x.cos();
                    im += v * x.sin();
                }
                let mag = re.hypot(im) / m as f64;
                if k > n {
                    top = top.max(mag);
                } else {
                    low = low.max(mag);
                }
            }
            assert!(top < 1e-12 * low.max(1.0), "n={n}: {top}");
            assert_eq!(apply(&op, &f, op.t_set[0]).unwrap(), f);
        }
    }
}

#[test]
fn heat_is_a_positive_mean_preserving_contraction() {
    let (length, n) = (2.0, 64);
    let op = OperatorSpec::new(
        OperatorKind::HeatConvolution { length, resolution: n },
        vec![1e-3, 0.05, 1.0],
    )
    .unwrap();
    for t in [1e-3, 0.05, 1.0] {
        let row = heat_kernel_row(t, length, n);
        assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        assert!(row.iter().all(|&k| k > 0.0));
        // symmetric circulant: k(j) = k(n - j)
        for j in 1..n {
            assert!((row[j] - row[n - j]).abs() <= 1e-15);
        }
    }
    // large t flattens to the mean
    let flat = heat_kernel_row(50.0, length, n);
    assert!(flat.iter().all(|&k| (k - 1.0 / n as f64).abs() < 1e-12));
    for f in make_test_family(&op, 5, 3).unwrap() {
        let mean = |g: &SampledFunction| lp_norm(g, 1.0).unwrap();
        for &t in &op.t_set {
            let u = apply(&op, &f, t).unwrap();
            assert!(u.values().iter().all(|&v| v >= 0.0));
            assert!(rel(mean(&u), mean(&f)) < 1e-12);
            for p in [1.5, 2.0, 7.0, f64::INFINITY] {
                assert!(lp_norm(&u, p).unwrap() <= lp_norm(&f, p).unwrap() * (1.0 + 1e-12));
            }
        }
    }
}

#[test]
fn dilation_scales_norms_exactly() {
    let op = OperatorSpec::new(OperatorKind::Dilation, vec![0.125, 3.0]).unwrap();
    for f in make_test_family(&op, 3, 1).unwrap() {
        for &t in &op.t_set {
            let u = apply(&op, &f, t).unwrap();
            for p in [1.0, 2.5, 11.0] {
                assert!(rel(lp_norm(&u, p).unwrap(), t.powf(1.0 / p) * lp_norm(&f, p).unwrap()) < 1e-13);
            }
            assert_eq!(lp_norm(&u, f64::INFINITY).unwrap(), lp_norm(&f, f64::INFINITY).unwrap());
        }
    }
}

#[test]
fn extremal_gls_is_lebesgue() {
    let op = OperatorSpec::new(OperatorKind::Dilation, vec![1.0]).unwrap();
    let grid = PGrid::log_spaced(1.0, 10.0, 5, false).unwrap();
    for f in make_test_family(&op, 10, 8).unwrap() {
        for r in [1.0, 1.5, 2.0, 4.0] {
            let psi = GeneratingFunction::extremal(r).unwrap();
            assert!(rel(gls_norm(&f, &psi, &grid).unwrap(), lp_norm(&f, r).unwrap()) <= 1e-9);
        }
    }
}
