use conewarp::cone_geom::{sheet_geodesic, Fiber, FiberMeasure, MetricOptions};
use conewarp::densities::{model_density, DensityKind};
use conewarp::verify::{
    check_hawking, check_splitting_hypotheses, check_volume_singularity, classify_cdcon,
    converse_family, detect_converse_violation, rescale_fiber, verify_contraction,
    verify_needle_concavity, verify_pointwise_tcd, CdconConfig, CellMeasure, ContractionExperiment,
    HawkingConfig, NeedleConfig, PointwiseConfig, Rect, Sheet, SplittingConfig, Status,
};
use conewarp::warp::{catalog, natural_interval};
use conewarp::{
    CatalogEntry, ConeSpec, DensityProfile, Error, ModelTag, Signature, VerificationReport,
    WarpingFunction,
};
use std::f64::consts::{E, PI};

fn density(name: &str, n: f64, domain: [f64; 2]) -> DensityProfile {
    model_density(name, n, domain).unwrap()
}

fn needle(samples: usize) -> NeedleConfig {
    NeedleConfig {
        samples,
        ..NeedleConfig::default()
    }
}

fn cone(entry: CatalogEntry, n: f64) -> ConeSpec {
    let (w, _) = catalog(entry);
    ConeSpec::new(
        w,
        Fiber::Interval { a: 0.0, b: 1.0 },
        n,
        FiberMeasure::Density {
            profile: density("const", n, [0.0, 1.0]),
        },
    )
    .unwrap()
}

fn diag(r: &VerificationReport, key: &str) -> f64 {
    r.diagnostics[key].0
}

// ---------------------------------------------------------------- needle

#[test]
fn sinh_sheet_over_constant_fiber_passes() {
    let (w, budget) = catalog(CatalogEntry::L4);
    let sheet = Sheet::new(w.clone(), density("const", 2.0, [0.0, 1.0]));
    let r = verify_needle_concavity(&sheet, budget.kappa, &needle(400)).unwrap();
    assert!(r.passed, "{}", r.min_slack);

    // psi = sinh(t(s)) along ten geodesics; its second difference against kappa L^2 psi
    let opts = MetricOptions::default();
    for k in 0..10 {
        let t0 = 0.3 + 0.1 * k as f64;
        let t1 = t0 + 1.0 + 0.05 * k as f64;
        let d = 0.09 * k as f64 * w.inv_f_integral(t0, t1);
        let g = sheet_geodesic(&w, t0, t1, d, &opts).unwrap();
        let psi = |s: f64| g.point(s).0.sinh();
        let l2 = g.length * g.length;
        let h = 1e-3;
        for j in 1..10 {
            let s = j as f64 / 10.0;
            let second = (psi(s + h) - 2.0 * psi(s) + psi(s - h)) / (h * h);
            let residual = second - budget.kappa * l2 * psi(s);
            assert!(
                residual <= 1e-4 * (1.0 + psi(s)),
                "geodesic {k} at s={s}: {residual}"
            );
        }
    }
}

#[test]
fn flat_product_needle_is_exact() {
    let (w, budget) = catalog(CatalogEntry::L3);
    let sheet = Sheet::new(w, density("const", 2.0, [0.0, 1.0]));
    let r = verify_needle_concavity(&sheet, budget.kappa, &needle(200)).unwrap();
    assert!(r.passed);
    assert!(r.min_slack.abs() < 1e-12, "{}", r.min_slack);
}

#[test]
fn cosh_sheet_with_underbudgeted_fiber_fails_inside() {
    // psi = cosh t cosh r. On the slice t = 0 its Hessian plus kappa psi g along a
    // unit timelike direction (a, b), a^2 - b^2 = 1, is cosh r (3 b^2 - a^2) with
    // kappa = 2, positive as soon as b^2 > 1/2: the needle inequality must break.
    let kappa = 2.0;
    let (a2, b2) = (2.0f64, 1.0f64);
    let r0 = 0.5f64;
    assert!(r0.cosh() * (3.0 * b2 - a2) > 0.0);

    let w = WarpingFunction::model(
        ModelTag::Cosh,
        natural_interval(ModelTag::Cosh),
        Signature::Lorentzian,
    );
    let sheet = Sheet::new(w, density("cosh", 2.0, [0.0, 1.0]));
    let cfg = NeedleConfig {
        samples: 400,
        window: Some([-1.0, 1.0]),
        ..NeedleConfig::default()
    };
    let r = verify_needle_concavity(&sheet, kappa, &cfg).unwrap();
    assert!(!r.passed, "{}", r.min_slack);
    let worst = &r.witnesses[0];
    for (t, x) in [worst.start, worst.end] {
        assert!(
            (-1.0..=1.0).contains(&t) && (0.0..=1.0).contains(&x),
            "{worst:?}"
        );
    }
    assert!(worst.s > 0.0 && worst.s < 1.0);
}

// ----------------------------------------------------------- contraction

fn minkowski_experiment(cells: usize) -> (Sheet, ContractionExperiment) {
    let (w, _) = catalog(CatalogEntry::L2);
    let sheet = Sheet::new(w, density("sinh", 2.0, [0.0, 1.0]));
    let exp = ContractionExperiment::new(
        Rect {
            t: [1.0, 1.5],
            r: [0.3, 0.6],
        },
        (3.0, 0.45),
        cells,
    );
    (sheet, exp)
}

#[test]
fn minkowski_cone_contracts_at_two_resolutions() {
    let mut slacks = Vec::new();
    for cells in [50, 100, 200] {
        let (sheet, exp) = minkowski_experiment(cells);
        let r = verify_contraction(&sheet, 0.0, &exp).unwrap();
        assert!(r.passed, "{cells}: {}", r.min_slack);
        assert!(r.min_slack >= -exp.tolerance);
        slacks.push(r.min_slack);
    }
    let (d1, d2) = ((slacks[1] - slacks[0]).abs(), (slacks[2] - slacks[1]).abs());
    assert!(d2 <= 0.5 * d1 + 1e-12, "{slacks:?}");
}

#[test]
fn contraction_slack_converges_at_first_order() {
    let cases = [
        (
            CatalogEntry::L2,
            "sinh",
            [0.0, 1.0],
            Rect {
                t: [1.0, 1.5],
                r: [0.3, 0.6],
            },
            (3.0, 0.45),
            0.0,
        ),
        (
            CatalogEntry::L4,
            "const",
            [0.0, 1.0],
            Rect {
                t: [1.0, 1.4],
                r: [0.3, 0.6],
            },
            (2.5, 0.5),
            -2.0,
        ),
        (
            CatalogEntry::R2,
            "sin",
            [0.0, PI],
            Rect {
                t: [1.0, 1.4],
                r: [1.2, 1.6],
            },
            (2.0, 1.5),
            0.0,
        ),
    ];
    for (entry, dens, dom, rect, o, k) in cases {
        let (w, _) = catalog(entry);
        let sheet = Sheet::new(w, density(dens, 2.0, dom));
        let slacks: Vec<f64> = [25, 50, 100]
            .iter()
            .map(|&cells| {
                verify_contraction(&sheet, k, &ContractionExperiment::new(rect, o, cells))
                    .unwrap()
                    .min_slack
            })
            .collect();
        let (d1, d2) = ((slacks[1] - slacks[0]).abs(), (slacks[2] - slacks[1]).abs());
        // a first-order error halves exactly in the limit; allow a tenth of slack on the ratio
        assert!(d2 <= 0.55 * d1, "{entry:?}: {slacks:?}");
    }
}

#[test]
fn single_cell_contraction_is_jacobian_positivity() {
    let (sheet, exp) = minkowski_experiment(1);
    let r = verify_contraction(&sheet, 0.0, &exp).unwrap();
    assert!(r.passed, "{}", r.min_slack);
}

#[test]
fn euclidean_cone_over_overcurved_fiber_fails() {
    // root cosh(3 r) has g'' = 9 g, far beyond the budget of CD(N-1, N)
    let w = WarpingFunction::model(
        ModelTag::Id,
        natural_interval(ModelTag::Id),
        Signature::Riemannian,
    );
    for n in [2.0, 3.0] {
        let h = DensityProfile::new(
            [0.0, 1.0],
            n,
            DensityKind::Model {
                tag: ModelTag::Cosh,
                scale: 3.0,
                kink: None,
            },
        )
        .unwrap();
        let sheet = Sheet::new(w.clone(), h);
        let needle_report = verify_needle_concavity(&sheet, 0.0, &needle(300)).unwrap();
        assert!(!needle_report.passed, "needle N={n}");
        let exp = ContractionExperiment::new(
            Rect {
                t: [1.0, 1.3],
                r: [0.7, 0.9],
            },
            (1.5, 0.05),
            60,
        );
        let r = verify_contraction(&sheet, 0.0, &exp).unwrap();
        assert!(!r.passed, "contraction N={n}: {}", r.min_slack);
        let worst = &r.witnesses[0];
        assert!(worst.s > 0.0 && worst.s < 1.0);
    }
}

#[test]
fn pointwise_with_single_target_cell_agrees_with_contraction() {
    let target = |c: (f64, f64)| CellMeasure {
        rect: Rect {
            t: [c.0 - 1e-3, c.0 + 1e-3],
            r: [c.1 - 1e-3, c.1 + 1e-3],
        },
        cells: 1,
        density: vec![],
    };
    let cases = [
        (
            CatalogEntry::L2,
            "sinh",
            [0.0, 1.0],
            Rect {
                t: [1.0, 1.5],
                r: [0.3, 0.6],
            },
            (3.0, 0.45),
        ),
        (
            CatalogEntry::L6,
            "const",
            [0.0, 1.0],
            Rect {
                t: [0.0, 0.3],
                r: [0.2, 0.4],
            },
            (1.8, 0.3),
        ),
    ];
    for (entry, dens, dom, rect, o) in cases {
        let (w, _) = catalog(entry);
        let sheet = Sheet::new(w, density(dens, 2.0, dom));
        let exp = ContractionExperiment::new(rect, o, 24);
        let contraction = verify_contraction(&sheet, 0.0, &exp).unwrap();
        let mu0 = CellMeasure {
            rect,
            cells: 24,
            density: vec![],
        };
        let pointwise =
            verify_pointwise_tcd(&sheet, 0.0, &mu0, &target(o), &PointwiseConfig::default())
                .unwrap();
        assert_eq!(
            contraction.passed, pointwise.passed,
            "{entry:?}: contraction {} pointwise {}",
            contraction.min_slack, pointwise.min_slack
        );
    }
}

// -------------------------------------------------------------- converse

fn bump_derivatives(x: f64) -> (f64, f64, f64) {
    if x.abs() >= 1.0 {
        return (0.0, 0.0, 0.0);
    }
    let q = 1.0 - x * x;
    let b = (-1.0 / q).exp();
    let b1 = b * (-2.0 * x / (q * q));
    let b2 = b * (4.0 * x * x / q.powi(4) - 2.0 / (q * q) - 8.0 * x * x / q.powi(3));
    (b, b1, b2)
}

/// Worst warper slack of `sin t (1 + eps B((t - pi/2) / w))` with `kappa = -1`,
/// scaled like the warper check, from the closed-form second derivative.
fn bumped_sine_slack(eps: f64, width: f64) -> f64 {
    let mut worst = f64::INFINITY;
    for k in 1..200_000 {
        let t = PI * k as f64 / 200_000.0;
        let (b, b1, b2) = bump_derivatives((t - PI / 2.0) / width);
        let f = t.sin() * (1.0 + eps * b);
        let residual = 2.0 * t.cos() * eps * b1 / width + t.sin() * eps * b2 / (width * width);
        worst = worst.min(-residual / f.abs().max(1.0));
    }
    worst
}

fn member<'a>(report: &'a VerificationReport, name: &str) -> &'a VerificationReport {
    let tag = format!("member: {name}");
    report
        .sub_reports
        .iter()
        .find(|r| r.notes.contains(&tag))
        .unwrap()
}

#[test]
fn converse_family_has_no_alarms() {
    let family = converse_family(2.0);
    assert_eq!(family.len(), 20);
    let report = detect_converse_violation(&family, &needle(200)).unwrap();
    assert!(report.passed, "{}", report.min_slack);
    assert_eq!(diag(&report, "alarms"), 0.0);
    assert_eq!(report.sub_reports.len(), 20);

    for eps in [-0.2, -0.1, -0.05, 0.05, 0.1, 0.2] {
        let sub = member(&report, &format!("bump {eps}"));
        let oracle = bumped_sine_slack(eps, 0.5);
        assert!(
            (diag(sub, "warper_slack") - oracle).abs() < 1e-6 * oracle.abs(),
            "{eps}: {oracle} vs {}",
            diag(sub, "warper_slack")
        );
        // a bump of either sign bends f'' + f upward somewhere: at the apex when
        // eps < 0, on the flanks when eps > 0
        assert!(oracle < 0.0);
        assert!(!sub.passed, "bump {eps}");
        assert!(sub.notes.iter().any(|n| n == "hypotheses fail"));
        if eps < 0.0 {
            // apex residual eps B''(0) / w^2 = -8 eps / e
            let apex = eps * (-2.0 / E) / 0.25;
            assert!((apex + 8.0 * eps / E).abs() < 1e-15 && apex > 0.0);
            assert!(oracle <= -apex + 1e-12);
        }
    }

    // a convex kink in the root: one-sided slopes jump up by 2 slope
    for slope in [0.1, 0.3] {
        let sub = member(&report, &format!("kink {slope}"));
        assert!(
            !sub.passed && diag(sub, "fiber_slack") < 0.0,
            "kink {slope}"
        );
        let h = &family
            .iter()
            .find(|m| m.name == format!("kink {slope}"))
            .unwrap()
            .sheet
            .density;
        let d = 1e-4;
        let jump = (h.root(0.5 + d) - 2.0 * h.root(0.5) + h.root(0.5 - d)) / d;
        assert!((jump - 2.0 * slope).abs() < 1e-3, "{jump}");
    }
    let concave_kink = member(&report, "kink -0.3");
    assert!(concave_kink.passed);
}

#[test]
fn equality_catalog_members_raise_no_alarms() {
    use conewarp::verify::FamilyMember;
    let cases = [
        (CatalogEntry::L1, "cosh"),
        (CatalogEntry::L2, "sinh"),
        (CatalogEntry::L3, "const"),
        (CatalogEntry::L4, "cosh"),
        (CatalogEntry::L5, "const"),
        (CatalogEntry::L6, "sin"),
    ];
    let family: Vec<FamilyMember> = cases
        .iter()
        .map(|&(entry, dens)| {
            let (w, budget) = catalog(entry);
            let tag: ModelTag = dens.parse().unwrap();
            FamilyMember {
                name: format!("{entry:?}"),
                sheet: Sheet::new(w, density(dens, 2.0, tag.default_domain())),
                kappa: budget.kappa,
            }
        })
        .collect();
    let report = detect_converse_violation(&family, &needle(150)).unwrap();
    assert!(report.passed, "{}", report.min_slack);
    assert!(report.sub_reports.iter().all(|r| r.passed));
}

#[test]
fn soundness_sweep_over_the_catalog() {
    for entry in CatalogEntry::ALL {
        let (w, budget) = catalog(entry);
        let (name, dom) = if budget.eta > 0.0 {
            ("sin", [0.0, PI])
        } else if budget.eta == 0.0 {
            ("const", [0.0, 1.0])
        } else {
            ("cosh", [0.0, 1.0])
        };
        let good = Sheet::new(w.clone(), density(name, 2.0, dom));
        let r = verify_needle_concavity(&good, budget.kappa, &needle(150)).unwrap();
        assert!(
            r.passed && r.min_slack >= -1e-6,
            "{entry:?}: {}",
            r.min_slack
        );

        // root cosh(s r) needs eta <= -s^2, one unit below the budget
        let scale = (f64::max(-budget.eta, 0.0) + 1.0).sqrt();
        let kind = DensityKind::Model {
            tag: ModelTag::Cosh,
            scale,
            kink: None,
        };
        let bad = Sheet::new(w, DensityProfile::new([0.0, 1.0], 2.0, kind).unwrap());
        let r = verify_needle_concavity(&bad, budget.kappa, &needle(150)).unwrap();
        assert!(!r.passed, "{entry:?} accepted a broken fiber");
    }
}

// ---------------------------------------------------------- applications

#[test]
fn hawking_on_the_sine_suspension() {
    let c = cone(CatalogEntry::L1, 2.0);
    let r = check_hawking(&c, &HawkingConfig::new(PI / 2.0, 0.0, 1.0)).unwrap();
    assert!(r.passed, "{}", r.min_slack);
    assert!(diag(&r, "max_tau") <= PI / 2.0 + 1e-12);
    assert!((diag(&r, "base_bound") - PI / 2.0).abs() < 1e-15);
    assert!(diag(&r, "saturation_gap").abs() < 1e-12);

    let mut with_d = HawkingConfig::new(PI / 2.0, 0.0, 1.0);
    with_d.diameter = Some(PI / 2.0);
    assert!(check_hawking(&c, &with_d).unwrap().passed);
    with_d.diameter = Some(1.0);
    assert!(!check_hawking(&c, &with_d).unwrap().passed);
}

#[test]
fn hawking_preconditions() {
    let flat = check_hawking(
        &cone(CatalogEntry::L3, 2.0),
        &HawkingConfig::new(0.0, 0.0, 0.0),
    )
    .unwrap();
    assert_eq!(flat.status, Status::NotApplicable);

    // cot(1) is about 0.64, below H / N = 1.5
    let err = check_hawking(
        &cone(CatalogEntry::L1, 2.0),
        &HawkingConfig::new(1.0, 3.0, 1.0),
    )
    .unwrap_err();
    assert!(matches!(err, Error::MeanCurvature { .. }), "{err:?}");
}

#[test]
fn future_volumes() {
    let (v, r) = check_volume_singularity(&cone(CatalogEntry::L1, 2.0), 0.0).unwrap();
    assert!((v - PI / 2.0).abs() < 1e-8, "{v}");
    assert!(r.notes.iter().any(|n| n.contains("incomplete")));

    let (v, r) = check_volume_singularity(&cone(CatalogEntry::L3, 2.0), 0.0).unwrap();
    assert!(v.is_infinite());
    assert!(r.passed && r.notes.iter().any(|n| n.contains("complete")));

    for t in [0.5, 2.0, 3.0] {
        let mut c = cone(CatalogEntry::L2, 2.0);
        c.warper = c.warper.clone().with_interval([0.0, t]);
        let (v, _) = check_volume_singularity(&c, 0.0).unwrap();
        assert!((v - t * t * t / 3.0).abs() < 1e-10 * t * t * t, "{t}: {v}");
    }
}

#[test]
fn splitting_dichotomy() {
    let cfg = SplittingConfig::default();
    let flat = check_splitting_hypotheses(&cone(CatalogEntry::L3, 2.0), &cfg).unwrap();
    assert!(flat.passed && flat.notes.iter().any(|n| n == "f constant: true"));
    assert!(flat
        .notes
        .iter()
        .any(|n| n == "line survives all probes: true"));

    let sine = check_splitting_hypotheses(&cone(CatalogEntry::L1, 2.0), &cfg).unwrap();
    assert!(sine.passed);
    assert!(sine
        .notes
        .iter()
        .any(|n| n == "line survives all probes: false"));
    assert!(diag(&sine, "longest_probe") <= PI);

    let exp = check_splitting_hypotheses(&cone(CatalogEntry::L5, 2.0), &cfg).unwrap();
    assert_eq!(exp.status, Status::NotApplicable);
    assert!(diag(&exp, "concavity_slack") < 0.0);
}

// ----------------------------------------------------------------- cdcon

#[test]
fn cdcon_examples() {
    let cfg = CdconConfig::default();
    let sine = classify_cdcon(&density("sin", 2.0, [0.0, PI]), 1.0, 2.0, 0.5, &cfg).unwrap();
    assert!(sine.passed, "{}", sine.min_slack);
    assert!(sine.notes.iter().any(|n| n.contains("Euclidean")));

    let sinh = classify_cdcon(&density("sinh", 3.0, [0.0, 1.0]), -2.0, 3.0, 0.5, &cfg).unwrap();
    assert!(sinh.passed, "{}", sinh.min_slack);
    assert!(sinh.notes.iter().any(|n| n.contains("Minkowski")));

    for (name, dom, k) in [
        ("sinh", [0.0, 1.0], -3.0),
        ("sin", [0.0, PI], 0.25),
        ("cosh", [0.0, 1.0], 2.0),
    ] {
        let h = density(name, 2.0, dom);
        let direct = classify_cdcon(&h, k, 2.0, 0.5, &cfg).unwrap();
        let lambda = (1.0 / f64::abs(k)).sqrt();
        let via = classify_cdcon(
            &rescale_fiber(&h, lambda).unwrap(),
            k.signum(),
            2.0,
            0.5,
            &cfg,
        )
        .unwrap();
        assert_eq!(direct.passed, via.passed, "{name} K={k}");
    }

    let flat = classify_cdcon(&density("const", 2.0, [0.0, 1.0]), 0.0, 2.0, 0.5, &cfg).unwrap();
    assert!(flat.passed);
    let convex = classify_cdcon(&density("cosh", 2.0, [0.0, 1.0]), 0.0, 2.0, 0.5, &cfg).unwrap();
    assert!(!convex.passed);
}

// --------------------------------------------------------------- reports

#[test]
fn reports_are_deterministic_and_round_trip() {
    let (w, budget) = catalog(CatalogEntry::L4);
    let sheet = Sheet::new(w, density("cosh", 3.0, [0.0, 1.0]));
    let a = verify_needle_concavity(&sheet, budget.kappa, &needle(128)).unwrap();
    let b = verify_needle_concavity(&sheet, budget.kappa, &needle(128)).unwrap();
    let ja = serde_json::to_string(&a).unwrap();
    assert_eq!(ja, serde_json::to_string(&b).unwrap());
    let back: VerificationReport = serde_json::from_str(&ja).unwrap();
    assert_eq!(serde_json::to_string(&back).unwrap(), ja);
    assert_eq!(back.passed, back.min_slack >= -back.tolerance);
    assert!(back.witnesses.len() <= 10);

    let other = verify_needle_concavity(
        &sheet,
        budget.kappa,
        &NeedleConfig {
            seed: 7,
            ..needle(128)
        },
    )
    .unwrap();
    assert_ne!(serde_json::to_string(&other).unwrap(), ja);
}
