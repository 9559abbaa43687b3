use conewarp::densities::{
    check_cd_density, model_density, power_convolution, DensityKind, Witness,
};
use conewarp::{DensityProfile, ModelTag};
use std::f64::consts::PI;

const TOL: f64 = 1e-6;

/// `s(t x)/s(x)` for curvature `eta` and `x = theta`, straight from the definition.
fn sigma(eta: f64, t: f64, theta: f64) -> f64 {
    let u = eta * theta * theta;
    if u >= PI * PI {
        return f64::INFINITY;
    }
    if u == 0.0 {
        return t;
    }
    if u > 0.0 {
        let x = u.sqrt();
        (t * x).sin() / x.sin()
    } else {
        let x = (-u).sqrt();
        (t * x).sinh() / x.sinh()
    }
}

/// Exhaustive triple sweep of the sigma-concavity of `h^{1/(N-1)}` on `nodes` grid points.
fn brute_force_passes(h: &DensityProfile, eta: f64, n: f64, nodes: usize) -> bool {
    let (a, b) = (h.a(), h.b());
    let xs: Vec<f64> = (0..nodes)
        .map(|i| a + (b - a) * i as f64 / (nodes - 1) as f64)
        .collect();
    let g = |r: f64| h.h(r).powf(1.0 / (n - 1.0));
    let sup = xs.iter().map(|&x| g(x)).fold(0.0, f64::max);
    let mut worst = f64::INFINITY;
    for i in 1..nodes - 1 {
        for j in i + 1..nodes - 1 {
            let theta = xs[j] - xs[i];
            for k in 1..16 {
                let s = k as f64 / 16.0;
                let rhs = sigma(eta, 1.0 - s, theta) * g(xs[i]) + sigma(eta, s, theta) * g(xs[j]);
                worst = worst.min(g(xs[i] + s * theta) - rhs);
            }
        }
    }
    worst / (1.0 + sup) >= -TOL
}

fn interior(w: Witness, a: f64, b: f64) -> bool {
    match w {
        Witness::Triple { r0, r1, s } => {
            let mid = r0 + s * (r1 - r0);
            a <= r0.min(r1) && r0.max(r1) <= b && a < mid && mid < b
        }
        Witness::Point { t } => a < t && t < b,
        _ => false,
    }
}

#[test]
fn sine_power_is_an_equality_density() {
    let h = model_density("sin", 3.0, [0.0, PI]).unwrap();
    let r = check_cd_density(&h, 1.0, 3.0, TOL).unwrap();
    assert!(r.passed);
    assert!(r.min_slack.abs() <= TOL, "{}", r.min_slack);
}

#[test]
fn constant_density_passes_for_any_n() {
    for n in [1.5, 2.0, 3.0, 7.5] {
        let h = model_density("const", n, [0.0, 1.0]).unwrap();
        assert!(check_cd_density(&h, 0.0, n, TOL).unwrap().passed, "N={n}");
    }
}

#[test]
fn linear_root_fails_with_positive_eta() {
    let h = model_density("id", 2.0, [0.1, 2.0]).unwrap();
    let d = 1e-3;
    let residual = (h.h(1.0 + d) - 2.0 * h.h(1.0) + h.h(1.0 - d)) / (d * d) + h.h(1.0);
    assert!((residual - 1.0).abs() < 1e-6);
    let res = check_cd_density(&h, 1.0, 2.0, TOL).unwrap();
    assert!(!res.passed);
    assert!(interior(res.witness, 0.1, 2.0), "{:?}", res.witness);
}

#[test]
fn model_density_values() {
    let h = model_density("sin", 2.0, [0.0, PI]).unwrap();
    assert!((h.h(PI / 2.0) - 1.0).abs() < 1e-15);
    let c = model_density("const", 4.0, [0.0, 1.0]).unwrap();
    for r in [0.0, 0.3, 1.0] {
        assert_eq!(c.h(r), 1.0);
    }
    let id = model_density("id", 3.0, [0.0, 2.0]).unwrap();
    assert!((id.h(2.0) - 4.0).abs() < 1e-14);
    assert!(model_density("spline", 2.0, [0.0, 1.0]).is_err());
}

#[test]
fn equality_models_sit_on_the_boundary() {
    for tag in ModelTag::ALL {
        for n in [2.0, 3.0] {
            let h = model_density(tag.name(), n, tag.default_domain()).unwrap();
            let r = check_cd_density(&h, tag.equality_eta(), n, TOL).unwrap();
            assert!(r.passed, "{tag} N={n}: {}", r.min_slack);
            assert!(r.min_slack <= TOL, "{tag} N={n}: {}", r.min_slack);
        }
    }
}

#[test]
fn passing_densities_are_positive_inside() {
    let cases = [
        ("sin", 1.0),
        ("sinh", -1.0),
        ("cosh", -1.0),
        ("id", 0.0),
        ("const", 0.0),
        ("exp", -1.0),
    ];
    for (name, eta) in cases {
        let h = model_density(name, 3.0, [0.0, 1.0]).unwrap();
        if check_cd_density(&h, eta, 3.0, TOL).unwrap().passed {
            for k in 1..100 {
                assert!(h.h(k as f64 / 100.0) > 0.0, "{name}");
            }
        }
    }
}

#[test]
fn brute_force_agrees_on_coarse_grids() {
    let cases = [
        ("sin", [0.0, PI], 1.0),
        ("sin", [0.0, PI], 0.5),
        ("sin", [0.0, PI], 1.5),
        ("id", [0.1, 2.0], 1.0),
        ("id", [0.1, 2.0], 0.0),
        ("cosh", [0.0, 1.0], -1.0),
        ("cosh", [0.0, 1.0], 0.0),
        ("const", [0.0, 1.0], 0.3),
        ("const", [0.0, 1.0], -0.3),
        ("sinh", [0.0, 2.0], -1.0),
        ("sinh", [0.0, 2.0], -2.0),
    ];
    for (name, dom, eta) in cases {
        for n in [2.0, 3.5] {
            let h = model_density(name, n, dom).unwrap();
            let ours = check_cd_density(&h, eta, n, TOL).unwrap().passed;
            assert_eq!(
                ours,
                brute_force_passes(&h, eta, n, 41),
                "{name} eta={eta} N={n}"
            );
        }
    }
}

#[test]
fn sampled_profile_matches_model() {
    let model = model_density("sin", 3.0, [0.0, PI]).unwrap();
    let values: Vec<f64> = (0..=400).map(|i| model.h(PI * i as f64 / 400.0)).collect();
    let sampled = DensityProfile::new([0.0, PI], 3.0, DensityKind::Sampled { values }).unwrap();
    for r in [0.3, 1.0, 2.2] {
        assert!((sampled.h(r) - model.h(r)).abs() < 1e-4);
    }
    assert!(check_cd_density(&sampled, 0.9, 3.0, 1e-4).unwrap().passed);
    assert!(!check_cd_density(&sampled, 1.3, 3.0, 1e-4).unwrap().passed);
}

#[test]
fn convolution_preserves_constants() {
    let h = model_density("const", 3.0, [0.0, 1.0]).unwrap();
    let m = power_convolution(&h, 0.1, 2.0).unwrap();
    assert_eq!(m.domain, [0.1, 0.9]);
    for k in 0..=20 {
        let r = 0.1 + 0.8 * k as f64 / 20.0;
        assert!((m.h(r) - 1.0).abs() < 1e-12);
    }
}

#[test]
fn convolution_of_a_step_stays_in_range_and_is_continuous() {
    let values: Vec<f64> = (0..=200).map(|i| if i < 100 { 1.0 } else { 2.0 }).collect();
    let h = DensityProfile::new([0.0, 1.0], 2.0, DensityKind::Sampled { values }).unwrap();
    let m = power_convolution(&h, 0.05, 1.0).unwrap();
    let xs: Vec<f64> = (0..=900).map(|k| 0.05 + 0.9 * k as f64 / 900.0).collect();
    let vals: Vec<f64> = xs.iter().map(|&r| m.h(r)).collect();
    for v in &vals {
        assert!((1.0 - 1e-12..=2.0 + 1e-12).contains(v));
    }
    let jump = vals
        .windows(2)
        .map(|w| (w[1] - w[0]).abs())
        .fold(0.0, f64::max);
    assert!(jump < 0.05, "largest step {jump}");
}

#[test]
fn convolution_converges_on_compacta() {
    let h = model_density("sin", 3.0, [0.0, PI]).unwrap();
    let mut errs = Vec::new();
    for eps in [0.2, 0.1, 0.05, 0.025] {
        let m = power_convolution(&h, eps, 2.0).unwrap();
        let err = (0..=100)
            .map(|k| 0.5 + (PI - 1.0) * k as f64 / 100.0)
            .map(|r| (m.h(r) - h.h(r)).abs())
            .fold(0.0, f64::max);
        errs.push(err);
    }
    for w in errs.windows(2) {
        assert!(w[1] < w[0], "{errs:?}");
    }
    assert!(errs[3] < 1e-3, "{errs:?}");
}

#[test]
fn mollification_keeps_the_inequality() {
    for (name, eta, dom) in [
        ("sin", 1.0, [0.0, PI]),
        ("cosh", -1.0, [0.0, 1.0]),
        ("id", 0.0, [0.0, 1.0]),
    ] {
        let h = model_density(name, 3.0, dom).unwrap();
        assert!(check_cd_density(&h, eta, 3.0, TOL).unwrap().passed);
        let m = power_convolution(&h, 0.1, 2.0).unwrap();
        let r = check_cd_density(&m, eta, 3.0, TOL).unwrap();
        assert!(r.passed, "{name}: {}", r.min_slack);
    }
}
