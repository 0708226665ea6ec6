use glspace::operators::{apply, make_test_family, nikolskii_t, OperatorKind, OperatorSpec};
use glspace::verify::{
    check_lemma_normalized, check_proposition1, check_proposition2, check_proposition3, measure_constant,
    measure_constant_general, ExponentWindow, ScalingFunctions,
};
use glspace::{lp_norm, Error, GeneratingFunction, MriNorm, PGrid, SampledFunction};

const SLACK: f64 = 1e-9;

fn dyadic(lo: i32, hi: i32) -> Vec<f64> {
    (lo..=hi).map(|k| 2f64.powi(k)).collect()
}

/// p below q, sharing the point 4.
fn dilation_window() -> ExponentWindow {
    ExponentWindow::log_spaced(4.0, 16.0, 1.1, 4.0, 9).unwrap()
}

#[test]
fn dilation_constant_is_one() {
    let op = OperatorSpec::new(OperatorKind::Dilation, dyadic(-4, 4)).unwrap();
    let family = make_test_family(&op, 12, 7).unwrap();
    let scaling = ScalingFunctions::from_fns(&op.t_set, |t| t, |_| 1.0).unwrap();
    let d_hat = measure_constant_general(&op, &family, &dilation_window(), &scaling).unwrap();
    assert!((d_hat - 1.0).abs() <= 1e-6, "{d_hat}");
}

#[test]
fn dilation_propositions_pass() {
    let op = OperatorSpec::new(OperatorKind::Dilation, dyadic(-4, 4)).unwrap();
    let family = make_test_family(&op, 8, 3).unwrap();
    let psi = GeneratingFunction::power_law(1.0).unwrap();
    let window = dilation_window();
    let c_hat = measure_constant(&op, &family, &window).unwrap();
    let r1 = check_proposition1(&op, &family, &psi, &psi, &window, c_hat, 1e-6).unwrap();
    assert!(r1.passed(), "{:?}", r1.worst_ratio);
    assert_eq!(r1.per_t_ratios.len(), 8 * 9);

    let scaling = ScalingFunctions::from_fns(&op.t_set, |t| t, |_| 1.0).unwrap();
    let z = MriNorm::sup(psi.clone());
    let r3 = check_proposition3(&op, &family, &z, &z, &window, &scaling, 1.0, 1e-6).unwrap();
    assert!(r3.passed(), "{:?}", r3.worst_ratio);
}

#[test]
fn dilation_with_integral_norms() {
    let op = OperatorSpec::new(OperatorKind::Dilation, vec![0.25, 1.0, 4.0]).unwrap();
    let family = make_test_family(&op, 6, 11).unwrap();
    let window = dilation_window();
    let c_hat = measure_constant(&op, &family, &window).unwrap();
    let z = MriNorm::integral(GeneratingFunction::endpoint_singular(1.0, 20.0, 0.5, 0.5).unwrap(), 2.0).unwrap();
    let r = check_proposition2(&op, &family, &z, &z, &window, c_hat, SLACK).unwrap();
    assert!(r.passed(), "{:?}", r.worst_ratio);
    assert_eq!(r.skipped, 0);
}

#[test]
fn sup_type_proposition2_matches_proposition1() {
    let op = OperatorSpec::new(
        OperatorKind::HeatConvolution {
            length: 1.0,
            resolution: 64,
        },
        dyadic(-8, -2),
    )
    .unwrap();
    let family = make_test_family(&op, 5, 2).unwrap();
    let window = ExponentWindow::log_spaced(1.1, 8.0, 1.1, 8.0, 7).unwrap();
    let psi = GeneratingFunction::power_law(2.0).unwrap();
    let nu = GeneratingFunction::endpoint_singular(1.0, 10.0, 0.3, 0.6).unwrap();
    let c_hat = measure_constant(&op, &family, &window).unwrap();
    let r1 = check_proposition1(&op, &family, &psi, &nu, &window, c_hat, SLACK).unwrap();
    let r2 = check_proposition2(
        &op,
        &family,
        &MriNorm::sup(psi),
        &MriNorm::sup(nu),
        &window,
        c_hat,
        SLACK,
    )
    .unwrap();
    assert_eq!(r1.per_t_ratios.len(), r2.per_t_ratios.len());
    for (a, b) in r1.per_t_ratios.iter().zip(&r2.per_t_ratios) {
        assert!((a.ratio - b.ratio).abs() <= 1e-12 * a.ratio.abs());
    }
    assert_eq!(r1.verdict, r2.verdict);
}

#[test]
fn proposition3_with_identity_scaling_is_proposition2() {
    let op = OperatorSpec::new(
        OperatorKind::HeatConvolution {
            length: 1.0,
            resolution: 64,
        },
        dyadic(-6, -2),
    )
    .unwrap();
    let family = make_test_family(&op, 4, 9).unwrap();
    let window = ExponentWindow::log_spaced(1.2, 6.0, 1.2, 6.0, 5).unwrap();
    let z = MriNorm::integral(GeneratingFunction::power_law(0.5).unwrap(), 1.0).unwrap();
    let c_hat = measure_constant(&op, &family, &window).unwrap();
    let r2 = check_proposition2(&op, &family, &z, &z, &window, c_hat, SLACK).unwrap();
    let scaling = ScalingFunctions::identity(&op.t_set).unwrap();
    let r3 = check_proposition3(&op, &family, &z, &z, &window, &scaling, c_hat, SLACK).unwrap();
    for (a, b) in r2.per_t_ratios.iter().zip(&r3.per_t_ratios) {
        assert_eq!(a.ratio, b.ratio);
    }
    assert!(r2.passed());
}

#[test]
fn heat_held_out_times() {
    let heat = OperatorKind::HeatConvolution {
        length: 1.0,
        resolution: 128,
    };
    let train = OperatorSpec::new(heat.clone(), dyadic(-7, -1)).unwrap();
    let family = make_test_family(&train, 10, 5).unwrap();
    let window = ExponentWindow::log_spaced(1.1, 8.0, 1.1, 8.0, 6).unwrap();
    let scaling = |ts: &[f64]| ScalingFunctions::from_fns(ts, |t| t.powf(-0.5), |_| 1.0).unwrap();
    let d_hat = measure_constant_general(&train, &family, &window, &scaling(&train.t_set)).unwrap();
    assert!(d_hat.is_finite() && d_hat > 0.0);

    // per-t constants stay within a factor two of each other on these octaves;
    // below 2^-7 they keep growing because t^(-1/2) is not the Young rate
    let per_t: Vec<f64> = train
        .t_set
        .iter()
        .map(|&t| {
            let one = OperatorSpec::new(heat.clone(), vec![t]).unwrap();
            measure_constant_general(&one, &family, &window, &scaling(&[t])).unwrap()
        })
        .collect();
    let (lo, hi) = per_t.iter().fold((f64::MAX, 0f64), |(l, h), &c| (l.min(c), h.max(c)));
    assert!(hi / lo < 2.0, "{per_t:?}");

    let z = MriNorm::sup(GeneratingFunction::power_law(1.0).unwrap());
    let r = check_proposition3(&train, &family, &z, &z, &window, &scaling(&train.t_set), d_hat, SLACK).unwrap();
    assert!(r.passed(), "{:?}", r.worst_ratio);

    let held: Vec<f64> = (-7..=-2).map(|k| 2f64.powf(k as f64 + 0.5)).collect();
    let held_op = OperatorSpec::new(heat, held.clone()).unwrap();
    let r = check_proposition3(&held_op, &family, &z, &z, &window, &scaling(&held), d_hat, 0.05).unwrap();
    assert!(r.passed(), "{:?}", r.worst_ratio);
}

#[test]
fn nikolskii_constants_are_stable() {
    let window = ExponentWindow::new(
        (1.1, 32.0),
        (1.1, 32.0),
        PGrid::log_spaced(1.2, 4.0, 6, false).unwrap(),
        PGrid::log_spaced(4.0, 30.0, 6, false).unwrap(),
    )
    .unwrap();
    let psi = GeneratingFunction::power_law(1.0).unwrap();
    let mut constants = Vec::new();
    for n in [1, 2, 5, 8, 16, 33] {
        let op = OperatorSpec::nikolskii(n);
        assert_eq!(op.t_set, vec![nikolskii_t(n)]);
        let family = make_test_family(&op, 6, n as u64).unwrap();
        let c = measure_constant(&op, &family, &window).unwrap();
        let r = check_proposition1(&op, &family, &psi, &psi, &window, c, SLACK).unwrap();
        assert!(r.passed());
        constants.push(c);
    }
    let (lo, hi) = constants
        .iter()
        .fold((f64::MAX, 0f64), |(l, h), &c| (l.min(c), h.max(c)));
    assert!(hi / lo < 2.0, "{constants:?}");
}

#[test]
fn extremal_reduction_matches_assumption_ratio() {
    let op = OperatorSpec::new(
        OperatorKind::HeatConvolution {
            length: 1.0,
            resolution: 32,
        },
        vec![0.01, 0.05],
    )
    .unwrap();
    let family = make_test_family(&op, 3, 4).unwrap();
    let (q0, p0) = (2.0, 3.0);
    let window = ExponentWindow::new(
        (1.0, f64::INFINITY),
        (1.0, f64::INFINITY),
        PGrid::new(vec![q0, 2.5], false).unwrap(),
        PGrid::new(vec![p0, 5.0], false).unwrap(),
    )
    .unwrap();
    let c_hat = measure_constant(&op, &family, &window).unwrap();
    let r = check_proposition1(
        &op,
        &family,
        &GeneratingFunction::extremal(q0).unwrap(),
        &GeneratingFunction::extremal(p0).unwrap(),
        &window,
        c_hat,
        0.0,
    )
    .unwrap();
    for row in &r.per_t_ratios {
        let f = &family[row.f_index];
        let u = apply(&op, f, row.t).unwrap();
        let direct = lp_norm(&u, p0).unwrap() / (row.t.powf(1.0 / p0 - 1.0 / q0) * lp_norm(f, q0).unwrap());
        assert!((row.ratio - direct / c_hat).abs() <= 1e-12 * row.ratio);
    }
    assert!(r.worst_ratio.unwrap() <= 1.0 + 1e-12);
}

#[test]
fn scaling_the_family_changes_nothing() {
    let op = OperatorSpec::new(OperatorKind::Dilation, vec![0.5, 2.0]).unwrap();
    let family = make_test_family(&op, 4, 8).unwrap();
    let scaled: Vec<SampledFunction> = family.iter().map(|f| f.scaled(-3.7).unwrap()).collect();
    let window = ExponentWindow::log_spaced(1.5, 6.0, 1.5, 6.0, 5).unwrap();
    let c = measure_constant(&op, &family, &window).unwrap();
    let cs = measure_constant(&op, &scaled, &window).unwrap();
    assert!((c - cs).abs() <= 1e-12 * c);
    let psi = GeneratingFunction::power_law(1.0).unwrap();
    let r = check_proposition1(&op, &family, &psi, &psi, &window, c, SLACK).unwrap();
    let rs = check_proposition1(&op, &scaled, &psi, &psi, &window, c, SLACK).unwrap();
    for (a, b) in r.per_t_ratios.iter().zip(&rs.per_t_ratios) {
        assert!((a.ratio - b.ratio).abs() <= 1e-12 * a.ratio);
    }
}

#[test]
fn wider_window_never_lowers_the_constant() {
    let op = OperatorSpec::nikolskii(6);
    let family = make_test_family(&op, 5, 1).unwrap();
    let narrow = ExponentWindow::log_spaced(1.5, 3.0, 3.0, 8.0, 4).unwrap();
    let wide = ExponentWindow::new(
        (1.0, f64::INFINITY),
        (1.0, f64::INFINITY),
        narrow.q_grid().with_point(1.2).unwrap(),
        narrow.p_grid().with_point(20.0).unwrap(),
    )
    .unwrap();
    let a = measure_constant(&op, &family, &narrow).unwrap();
    let b = measure_constant(&op, &family, &wide).unwrap();
    assert!(b >= a);
}

#[test]
fn identity_operator_constant_is_one() {
    // mass one, so ||f||_p <= ||f||_q for p <= q, with equality on the shared point
    let op = OperatorSpec::nikolskii(3);
    let family = make_test_family(&op, 3, 0).unwrap();
    let window = ExponentWindow::log_spaced(2.5, 3.0, 2.0, 2.5, 3).unwrap();
    let scaling = ScalingFunctions::from_fns(&op.t_set, |_| 1.0, |_| 1.0).unwrap();
    let c = measure_constant_general(&op, &family, &window, &scaling).unwrap();
    assert!((c - 1.0).abs() < 1e-15, "{c}");
}

#[test]
fn zero_family_is_degenerate() {
    let op = OperatorSpec::new(OperatorKind::Dilation, vec![1.0]).unwrap();
    let f = make_test_family(&op, 1, 0).unwrap().remove(0).scaled(0.0).unwrap();
    let window = dilation_window();
    let family = vec![f];
    assert!(matches!(
        measure_constant(&op, &family, &window),
        Err(Error::Degenerate(_))
    ));
    let z = MriNorm::sup(GeneratingFunction::power_law(1.0).unwrap());
    assert!(matches!(
        check_proposition2(&op, &family, &z, &z, &window, 1.0, 0.0),
        Err(Error::Degenerate(_))
    ));
}

#[test]
fn reports_are_deterministic_and_round_trip() {
    let op = OperatorSpec::new(OperatorKind::Dilation, vec![0.25, 1.0, 4.0]).unwrap();
    let psi = GeneratingFunction::power_law(1.0).unwrap();
    let window = dilation_window();
    let run = || {
        let family = make_test_family(&op, 6, 42).unwrap();
        let c = measure_constant(&op, &family, &window).unwrap();
        let r = check_proposition1(&op, &family, &psi, &psi, &window, c, 1e-6).unwrap();
        let mut out = Vec::new();
        r.write_json(&mut out).unwrap();
        (r, out)
    };
    let (r, a) = run();
    let (_, b) = run();
    assert_eq!(a, b);
    let back: glspace::verify::VerificationReport = serde_json::from_slice(&a).unwrap();
    assert_eq!(back, r);
    let mut csv = Vec::new();
    r.write_csv(&mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert!(text.starts_with("t,lhs,rhs,ratio\n"));
    assert_eq!(text.lines().count(), 1 + r.per_t_ratios.len());
}

#[test]
fn lemma_normalization() {
    let op = OperatorSpec::new(OperatorKind::Dilation, vec![1.0]).unwrap();
    let family = make_test_family(&op, 5, 13).unwrap();
    let psi = GeneratingFunction::power_law(2.0).unwrap();
    let grid = psi.scan_grid(&Default::default()).unwrap();
    for f in &family {
        let rep = check_lemma_normalized(f, f, &psi, &psi, &grid).unwrap();
        assert!(rep.pass);
        assert_eq!(rep.max_ratio_f, rep.max_ratio_u);
        assert!((rep.max_ratio_f - 1.0).abs() < 1e-9, "{}", rep.max_ratio_f);
    }
    let zero = family[0].scaled(0.0).unwrap();
    assert!(matches!(
        check_lemma_normalized(&zero, &family[0], &psi, &psi, &grid),
        Err(Error::Degenerate(_))
    ));
}
