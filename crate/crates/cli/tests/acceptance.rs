//! Acceptance suite, run with its own harness so that every criterion prints
//! one `criterion N: pass|FAIL` line. Pass a substring to run a subset:
//! `cargo test --test acceptance -- criterion_07`.

use conewarp::coeffs::{sigma_kappa, sigma_kn, tau_coeff, CoeffValue};
use conewarp::cone_geom::{metric_distance_with, time_separation, MetricOptions};
use conewarp::densities::model_density;
use conewarp::transport::{
    check_cyclical_monotonicity, cone_tau, lorentz_wasserstein_p, plan_support_costs,
    wasserstein_p, MonotonicityMode, DEFAULT_CYCLE_CAP,
};
use conewarp::verify::{
    check_hawking, check_splitting_hypotheses, check_volume_singularity, converse_family,
    detect_converse_violation, verify_contraction, verify_needle_concavity, ContractionExperiment,
    HawkingConfig, NeedleConfig, Rect, Sheet, SplittingConfig,
};
use conewarp::warp::{catalog, compute_eta};
use conewarp::{
    CatalogEntry, ConePoint, ConeSpec, DiscreteMeasure, Fiber, FiberMeasure, FiberPoint, ModelTag,
    Result, Signature, VerificationReport,
};
use conewarp_cli::run::report_json;
use conewarp_cli::tables::catalog_rows;
use conewarp_cli::{run_experiment, ExperimentConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::path::Path;
use std::time::{Duration, Instant};

fn verdict(id: u32, what: &str, ok: bool, detail: String) {
    println!(
        "criterion {id}: {} ({what}) {detail}",
        if ok { "pass" } else { "FAIL" }
    );
}

fn catalog_cone(entry: CatalogEntry, fiber_len: f64) -> ConeSpec {
    let (w, _) = catalog(entry);
    let h = model_density("const", 2.0, [0.0, fiber_len]).unwrap();
    ConeSpec::new(
        w,
        Fiber::Interval {
            a: 0.0,
            b: fiber_len,
        },
        2.0,
        FiberMeasure::Density { profile: h },
    )
    .unwrap()
}

fn coord(p: &ConePoint) -> f64 {
    match p.x {
        FiberPoint::Coord(x) => x,
        FiberPoint::Node { .. } => unreachable!(),
    }
}

// ------------------------------------------------------------------------ 1

fn criterion_01_catalog() {
    let start = Instant::now();
    let expected: [(&str, [f64; 2], &str, f64, f64); 12] = [
        ("L1", [0.0, PI], "sin", -1.0, -1.0),
        ("L2", [0.0, f64::INFINITY], "id", -1.0, 0.0),
        ("L3", [f64::NEG_INFINITY, f64::INFINITY], "const", 0.0, 0.0),
        ("L4", [0.0, f64::INFINITY], "sinh", -1.0, 1.0),
        ("L5", [f64::NEG_INFINITY, f64::INFINITY], "exp", 0.0, 1.0),
        ("L6", [f64::NEG_INFINITY, f64::INFINITY], "cosh", 1.0, 1.0),
        ("R1", [0.0, PI], "sin", 1.0, 1.0),
        ("R2", [0.0, f64::INFINITY], "id", 1.0, 0.0),
        ("R3", [f64::NEG_INFINITY, f64::INFINITY], "const", 0.0, 0.0),
        ("R4", [0.0, f64::INFINITY], "sinh", 1.0, -1.0),
        ("R5", [f64::NEG_INFINITY, f64::INFINITY], "exp", 0.0, -1.0),
        ("R6", [f64::NEG_INFINITY, f64::INFINITY], "cosh", -1.0, -1.0),
    ];
    let rows = catalog_rows(None);
    let mut mismatches = Vec::new();
    if rows.len() != 12 {
        mismatches.push(format!("{} rows", rows.len()));
    }
    for (row, (name, interval, f, eta, kappa)) in rows.iter().zip(expected) {
        let (w, budget) = catalog(row.name);
        let computed = compute_eta(&w, budget.kappa).eta;
        let same = row.name.to_string() == name
            && row.interval == interval
            && row.f == f
            && row.eta == eta
            && row.kappa == kappa
            && computed == eta
            && row.eta_computed == eta
            && (row.name.signature() == Signature::Lorentzian) == name.starts_with('L');
        if !same {
            mismatches.push(format!("{row:?}"));
        }
    }
    let elapsed = start.elapsed();
    let ok = mismatches.is_empty() && elapsed < Duration::from_secs(1);
    verdict(1, "catalog rows and eta", ok, format!("{elapsed:?}"));
    assert!(mismatches.is_empty(), "{mismatches:#?}");
    assert!(elapsed < Duration::from_secs(1), "{elapsed:?}");
}

// ------------------------------------------------------------------------ 2

fn euclidean_closed_form(s: f64, t: f64, d: f64) -> f64 {
    if d >= PI {
        s + t
    } else {
        (s * s + t * t - 2.0 * s * t * d.cos()).sqrt()
    }
}

fn criterion_02_euclidean_cone() {
    let start = Instant::now();
    let cone = catalog_cone(CatalogEntry::R2, 4.0);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let pairs: Vec<(ConePoint, ConePoint)> = (0..200)
        .map(|_| {
            let p = ConePoint::new(rng.gen_range(0.2..2.0), rng.gen_range(0.0..4.0));
            let q = ConePoint::new(rng.gen_range(0.2..2.0), rng.gen_range(0.0..4.0));
            (p, q)
        })
        .collect();
    let worst = |lattice: usize| -> f64 {
        let opts = MetricOptions::with_lattice(lattice);
        pairs
            .iter()
            .map(|(p, q)| {
                let exact = euclidean_closed_form(p.t, q.t, (coord(p) - coord(q)).abs());
                let d = metric_distance_with(&cone, *p, *q, &opts).unwrap();
                (d - exact).abs() / exact
            })
            .fold(0.0, f64::max)
    };
    let (coarse, fine) = (worst(200), worst(400));
    let elapsed = start.elapsed();
    let ok = fine <= 1e-3 && fine <= 0.5 * coarse && elapsed < Duration::from_secs(30);
    verdict(
        2,
        "Euclidean cone distances",
        ok,
        format!("err200={coarse:.3e} err400={fine:.3e} {elapsed:?}"),
    );
    assert!(fine <= 1e-3, "{fine}");
    assert!(fine <= 0.5 * coarse, "{coarse} -> {fine}");
    assert!(elapsed < Duration::from_secs(30), "{elapsed:?}");
}

// ------------------------------------------------------------------------ 3

fn criterion_03_minkowski_separation() {
    let cone = catalog_cone(CatalogEntry::L3, 4.0);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    let mut nonzero_unrelated = 0;
    for _ in 0..200 {
        let (t0, x0) = (rng.gen_range(-1.0..1.0), rng.gen_range(0.0..4.0));
        let dt = rng.gen_range(0.05..2.0);
        let d = rng.gen_range(0.0..0.98) * dt;
        let x1 = if x0 + d <= 4.0 { x0 + d } else { x0 - d };
        let tau =
            time_separation(&cone, ConePoint::new(t0, x0), ConePoint::new(t0 + dt, x1)).unwrap();
        let exact = (dt * dt - d * d).sqrt();
        worst = worst.max((tau - exact).abs() / exact);

        // spacelike and past-directed pairs
        let gap = rng.gen_range(0.05..1.0);
        let x2 = if x0 + dt + gap <= 4.0 {
            x0 + dt + gap
        } else {
            x0 - dt - gap
        };
        if (0.0..=4.0).contains(&x2) {
            let v = time_separation(&cone, ConePoint::new(t0, x0), ConePoint::new(t0 + dt, x2))
                .unwrap();
            nonzero_unrelated += usize::from(v != 0.0);
        }
        let v =
            time_separation(&cone, ConePoint::new(t0 + dt, x1), ConePoint::new(t0, x0)).unwrap();
        nonzero_unrelated += usize::from(v != 0.0);
    }
    let ok = worst <= 1e-3 && nonzero_unrelated == 0;
    verdict(
        3,
        "Minkowski time separation",
        ok,
        format!("worst={worst:.3e} nonzero={nonzero_unrelated}"),
    );
    assert!(worst <= 1e-3, "{worst}");
    assert_eq!(nonzero_unrelated, 0);
}

// ------------------------------------------------------------------------ 4

/// `sin(sqrt(u) t) / sqrt(u)` by its power series in `u`.
fn series_sin(u: f64, t: f64) -> f64 {
    let mut term = t;
    let mut sum = t;
    for k in 1..400 {
        let k = k as f64;
        term *= -u * t * t / ((2.0 * k) * (2.0 * k + 1.0));
        sum += term;
        if term.abs() <= 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

fn sigma_oracle(kappa: f64, t: f64, theta: f64) -> f64 {
    let u = kappa * theta * theta;
    series_sin(u, t) / series_sin(u, 1.0)
}

fn criterion_04_coefficients() {
    const TOL: f64 = 1e-12;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut failures: Vec<String> = Vec::new();
    let mut fail = |what: &str, args: (f64, f64, f64, f64)| {
        if failures.len() < 10 {
            failures.push(format!(
                "{what} at K={} N={} t={} theta={}",
                args.0, args.1, args.2, args.3
            ));
        }
    };
    for _ in 0..10_000 {
        let k = rng.gen_range(-20.0..12.0);
        let n = rng.gen_range(1.5..6.0);
        let t = rng.gen_range(0.0..=1.0);
        let theta = rng.gen_range(0.0..2.5);
        let args = (k, n, t, theta);
        let kappa = k / n;
        let u = kappa * theta * theta;

        // branch values
        let s = sigma_kn(k, n, t, theta);
        match s {
            CoeffValue::Infinite if u < PI * PI || theta == 0.0 => fail("spurious infinity", args),
            CoeffValue::Finite(_) if u >= PI * PI && theta > 0.0 => fail("missing infinity", args),
            CoeffValue::Finite(v) if theta > 0.0 && u > -700.0 => {
                let o = sigma_oracle(kappa, t, theta);
                if (v - o).abs() > TOL * v.abs().max(1e-3) {
                    fail("sigma value", args);
                }
            }
            _ => {}
        }

        // rescaling identity
        if theta > 0.0 {
            let a = sigma_kappa(kappa, t, theta);
            let b = sigma_kappa(u, t, 1.0);
            match (a.finite(), b.finite()) {
                (Some(a), Some(b)) if (a - b).abs() > TOL * b.abs().max(1e-300) => {
                    fail("rescaling", args)
                }
                (Some(_), None) | (None, Some(_)) => fail("rescaling branch", args),
                _ => {}
            }
        }

        // monotone in K; nonincreasing in N for K >= 0
        let dk = rng.gen_range(0.0..5.0);
        if let (Some(lo), Some(hi)) = (s.finite(), sigma_kn(k + dk, n, t, theta).finite()) {
            if hi < lo * (1.0 - TOL) - TOL {
                fail("monotone in K", args);
            }
        }
        if k >= 0.0 {
            let dn = rng.gen_range(0.0..4.0);
            if let (Some(a), Some(b)) = (s.finite(), sigma_kn(k, n + dn, t, theta).finite()) {
                if b > a * (1.0 + TOL) + TOL {
                    fail("monotone in N", args);
                }
            }
        }

        // tau dominates sigma
        if let (Some(tv), Some(sv)) = (tau_coeff(k, n, t, theta).finite(), s.finite()) {
            if tv < sv - TOL {
                fail("tau >= sigma", args);
            }
        }
    }
    let ok = failures.is_empty();
    verdict(
        4,
        "distortion coefficients on 10^4 points",
        ok,
        format!("{} failures", failures.len()),
    );
    assert!(ok, "{failures:#?}");
}

// ------------------------------------------------------------------------ 5

fn criterion_05_needle_forward() {
    let lorentz = [
        CatalogEntry::L1,
        CatalogEntry::L2,
        CatalogEntry::L3,
        CatalogEntry::L4,
        CatalogEntry::L5,
        CatalogEntry::L6,
    ];
    let cfg = NeedleConfig {
        samples: 1000,
        ..NeedleConfig::default()
    };
    let mut lines = Vec::new();
    let mut ok = true;
    for entry in lorentz {
        let (w, budget) = catalog(entry);
        let equality = ModelTag::ALL
            .into_iter()
            .find(|t| t.equality_eta() == budget.eta && *t != ModelTag::Const)
            .unwrap();
        let mut fibers = vec![equality];
        // h = 1 satisfies the fiber inequality exactly when eta <= 0
        if budget.eta <= 0.0 {
            fibers.push(ModelTag::Const);
        }
        for tag in fibers {
            let start = Instant::now();
            let h = model_density(tag.name(), 2.0, tag.default_domain()).unwrap();
            let sheet = Sheet::new(w.clone(), h);
            let r = verify_needle_concavity(&sheet, budget.kappa, &cfg).unwrap();
            let elapsed = start.elapsed();
            let good =
                r.samples >= 1000 && r.min_slack >= -1e-6 && elapsed < Duration::from_secs(60);
            ok &= good;
            lines.push(format!(
                "{entry:?}/{}: samples={} min_slack={:.3e} {elapsed:?}{}",
                tag.name(),
                r.samples,
                r.min_slack,
                if good { "" } else { " <- FAIL" }
            ));
        }
    }
    verdict(
        5,
        "needle concavity on the Lorentzian catalog",
        ok,
        lines.join("; "),
    );
    assert!(ok, "{lines:#?}");
}

// ------------------------------------------------------------------------ 6

fn criterion_06_converse_family() {
    let family = converse_family(2.0);
    assert_eq!(family.len(), 20);
    let cfg = NeedleConfig {
        samples: 300,
        ..NeedleConfig::default()
    };
    let report = detect_converse_violation(&family, &cfg).unwrap();
    let mut disagreements = Vec::new();
    let (mut holding, mut broken) = (0, 0);
    for sub in &report.sub_reports {
        let holds = sub.notes.iter().any(|n| n == "hypotheses hold");
        if holds {
            holding += 1;
        } else {
            broken += 1;
        }
        if sub.passed != holds {
            disagreements.push(sub.notes.join(" | "));
        }
    }
    let alarms = report.diagnostics["alarms"].0;
    let ok =
        report.passed && alarms == 0.0 && disagreements.is_empty() && holding > 0 && broken > 0;
    verdict(
        6,
        "converse detection",
        ok,
        format!(
            "alarms={alarms} hold={holding} broken={broken} disagreements={}",
            disagreements.len()
        ),
    );
    assert!(ok, "{disagreements:#?}");
}

// ------------------------------------------------------------------------ 7

/// Largest `|m(A_s) / (s^{N+1} m(A)) - 1|` over the sampled times.
fn contraction_deviation(r: &VerificationReport, n: f64) -> f64 {
    r.diagnostics
        .iter()
        .filter_map(|(k, v)| {
            k.strip_prefix("ratio_s")
                .map(|s| (s.parse::<f64>().unwrap(), v.0))
        })
        .map(|(s, ratio)| (ratio / s.powf(n + 1.0) - 1.0).abs())
        .fold(0.0, f64::max)
}

fn criterion_07_contraction() {
    // With the target on the polar axis r = 0 the contraction is a homothety of
    // Minkowski space and m(A_s) = s^{N+1} m(A) holds with equality; off the axis
    // only the inequality is available.
    let (w, _) = catalog(CatalogEntry::L2);
    let mut ok = true;
    let mut lines = Vec::new();
    for n in [2.0, 3.0] {
        let sheet = Sheet::new(w.clone(), model_density("sinh", n, [0.0, 1.0]).unwrap());
        let source = Rect {
            t: [1.0, 1.5],
            r: [0.3, 0.6],
        };
        for (target, exact) in [((3.0, 0.0), true), ((3.0, 0.45), false)] {
            let mut errs = Vec::new();
            for (cells, allowed) in [(400, 0.02), (800, 0.01)] {
                let r = verify_contraction(
                    &sheet,
                    0.0,
                    &ContractionExperiment::new(source, target, cells),
                )
                .unwrap();
                let err = if exact {
                    contraction_deviation(&r, n)
                } else {
                    (-r.min_slack).max(0.0)
                };
                let good = r.passed && err <= allowed;
                ok &= good;
                errs.push(format!(
                    "{cells}: err={err:.2e} min_slack={:.3e}{}",
                    r.min_slack,
                    if good { "" } else { " <- FAIL" }
                ));
            }
            lines.push(format!("N={n} target={target:?} [{}]", errs.join(", ")));
        }
    }
    verdict(7, "contraction on the Minkowski cone", ok, lines.join("; "));
    assert!(ok, "{lines:#?}");
}

// ------------------------------------------------------------------------ 8

fn planar(p: &ConePoint, q: &ConePoint) -> Result<f64> {
    Ok(((p.t - q.t).powi(2) + (coord(p) - coord(q)).powi(2)).sqrt())
}

fn flat_tau(p: &ConePoint, q: &ConePoint) -> Option<f64> {
    let (dt, dx) = (q.t - p.t, (coord(q) - coord(p)).abs());
    (dt >= dx && (dt > 0.0 || dx == 0.0)).then(|| (dt * dt - dx * dx).max(0.0).sqrt())
}

/// Optimum over all vertices of the transportation polytope; `None` cells carry no mass.
fn vertex_optimum(a: &[f64], b: &[f64], cost: &[Vec<Option<f64>>], maximize: bool) -> Option<f64> {
    let (m, n) = (a.len(), b.len());
    let cells: Vec<(usize, usize)> = (0..m).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
    let k = m + n - 1;
    let mut best: Option<f64> = None;
    let mut pick = Vec::with_capacity(k);
    subsets(cells.len(), k, 0, &mut pick, &mut |basis| {
        let Some(x) = solve_basis(a, b, basis.iter().map(|&c| cells[c]).collect()) else {
            return;
        };
        if x.iter().any(|&v| v < -1e-12) {
            return;
        }
        let mut value = 0.0;
        for (&c, &v) in basis.iter().zip(&x) {
            let (i, j) = cells[c];
            match cost[i][j] {
                Some(cv) => value += cv * v.max(0.0),
                None if v > 1e-12 => return,
                None => {}
            }
        }
        best = Some(match best {
            Some(bv) if maximize => bv.max(value),
            Some(bv) => bv.min(value),
            None => value,
        });
    });
    best
}

fn subsets(
    total: usize,
    k: usize,
    start: usize,
    pick: &mut Vec<usize>,
    visit: &mut dyn FnMut(&[usize]),
) {
    if pick.len() == k {
        visit(pick);
        return;
    }
    for c in start..total {
        if total - c < k - pick.len() {
            break;
        }
        pick.push(c);
        subsets(total, k, c + 1, pick, visit);
        pick.pop();
    }
}

fn solve_basis(a: &[f64], b: &[f64], basis: Vec<(usize, usize)>) -> Option<Vec<f64>> {
    let (m, n, k) = (a.len(), b.len(), basis.len());
    let mut mat = vec![vec![0.0; k + 1]; m + n - 1];
    for (c, &(i, j)) in basis.iter().enumerate() {
        mat[i][c] = 1.0;
        if j < n - 1 {
            mat[m + j][c] = 1.0;
        }
    }
    for i in 0..m {
        mat[i][k] = a[i];
    }
    for j in 0..n - 1 {
        mat[m + j][k] = b[j];
    }
    for col in 0..k {
        let piv = (col..k).max_by(|&x, &y| mat[x][col].abs().total_cmp(&mat[y][col].abs()))?;
        if mat[piv][col].abs() < 1e-12 {
            return None;
        }
        mat.swap(col, piv);
        let pivot = mat[col].clone();
        for (r, row) in mat.iter_mut().enumerate().take(k) {
            let f = row[col] / pivot[col];
            if r != col && f != 0.0 {
                for (x, p) in row[col..].iter_mut().zip(&pivot[col..]) {
                    *x -= f * p;
                }
            }
        }
    }
    Some((0..k).map(|c| mat[c][k] / mat[c][c]).collect())
}

fn random_measure(rng: &mut ChaCha8Rng, t: (f64, f64)) -> DiscreteMeasure {
    let n = rng.gen_range(1..=4);
    let support = (0..n)
        .map(|_| ConePoint::new(rng.gen_range(t.0..t.1), rng.gen_range(0.0..4.0)))
        .collect();
    let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let mut w: Vec<f64> = raw.iter().map(|v| v / total).collect();
    let head: f64 = w[..n - 1].iter().sum();
    w[n - 1] = 1.0 - head;
    DiscreteMeasure::new(support, w).unwrap()
}

fn cost_matrix<C: FnMut(&ConePoint, &ConePoint) -> Option<f64>>(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    mut c: C,
) -> Vec<Vec<Option<f64>>> {
    mu.support
        .iter()
        .map(|x| nu.support.iter().map(|y| c(x, y)).collect())
        .collect()
}

fn criterion_08_transport() {
    let cone = catalog_cone(CatalogEntry::L3, 4.0);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut problems = Vec::new();
    let mut infeasible = 0;
    for case in 0..50 {
        let mu = random_measure(&mut rng, (0.0, 1.0));
        let nu = random_measure(&mut rng, (0.0, 3.0));

        let p = [1.0, 2.0, 3.0][rng.gen_range(0..3)];
        let (w, plan) = wasserstein_p(&mu, &nu, p, planar).unwrap();
        let cost = cost_matrix(&mu, &nu, |x, y| Some(planar(x, y).unwrap().powf(p)));
        let brute = vertex_optimum(&mu.weights, &nu.weights, &cost, false).unwrap();
        if (w.powf(p) - brute).abs() > 1e-9 {
            problems.push(format!("case {case}: W {} vs {brute}", w.powf(p)));
        }
        let support =
            plan_support_costs(&mu, &nu, &plan, |x, y| Ok(planar(x, y)?.powf(p))).unwrap();
        if !check_cyclical_monotonicity(&support, MonotonicityMode::Min, DEFAULT_CYCLE_CAP)
            .unwrap()
            .monotone
        {
            problems.push(format!("case {case}: W plan not cyclically monotone"));
        }

        let q = [0.25, 0.5, 0.75][rng.gen_range(0..3)];
        let (l, plan) = lorentz_wasserstein_p(&mu, &nu, q, cone_tau(&cone)).unwrap();
        let cost = cost_matrix(&mu, &nu, |x, y| flat_tau(x, y).map(|t| t.powf(q)));
        match vertex_optimum(&mu.weights, &nu.weights, &cost, true) {
            None => {
                infeasible += 1;
                if l != f64::NEG_INFINITY || plan.causal_feasible {
                    problems.push(format!("case {case}: expected -inf, got {l}"));
                }
            }
            Some(brute) => {
                if !l.is_finite() || (l.powf(q) - brute).abs() > 1e-9 {
                    problems.push(format!("case {case}: l {l} vs {brute}"));
                    continue;
                }
                let support = plan_support_costs(&mu, &nu, &plan, |x, y| {
                    Ok(flat_tau(x, y).map_or(f64::NEG_INFINITY, |t| t.powf(q)))
                })
                .unwrap();
                if !check_cyclical_monotonicity(&support, MonotonicityMode::Max, DEFAULT_CYCLE_CAP)
                    .unwrap()
                    .monotone
                {
                    problems.push(format!("case {case}: l plan not cyclically monotone"));
                }
            }
        }
    }
    let ok = problems.is_empty() && infeasible > 0 && infeasible < 50;
    verdict(
        8,
        "exact transport",
        ok,
        format!("infeasible={infeasible} problems={}", problems.len()),
    );
    assert!(ok, "{problems:#?} infeasible={infeasible}");
}

// ------------------------------------------------------------------------ 9

fn criterion_09_applications() {
    let sine = catalog_cone(CatalogEntry::L1, 1.0);
    let (volume, _) = check_volume_singularity(&sine, 0.0).unwrap();
    let volume_ok = (volume - PI / 2.0).abs() <= 1e-8;

    let h = check_hawking(&sine, &HawkingConfig::new(PI / 2.0, 0.0, 1.0)).unwrap();
    let max_tau = h.diagnostics["max_tau"].0;
    let gap = h.diagnostics["saturation_gap"].0;
    let hawking_ok = h.passed && max_tau <= PI - PI / 2.0 + 1e-12 && gap.abs() <= 1e-9;

    let cfg = SplittingConfig::default();
    let flat = check_splitting_hypotheses(&catalog_cone(CatalogEntry::L3, 1.0), &cfg).unwrap();
    let curved = check_splitting_hypotheses(&sine, &cfg).unwrap();
    let has = |r: &VerificationReport, note: &str| r.notes.iter().any(|n| n == note);
    let splitting_ok = flat.passed
        && has(&flat, "f constant: true")
        && has(&flat, "line survives all probes: true")
        && curved.passed
        && has(&curved, "f constant: false")
        && has(&curved, "line survives all probes: false");

    let ok = volume_ok && hawking_ok && splitting_ok;
    verdict(
        9,
        "volume, Hawking and splitting",
        ok,
        format!("volume={volume} max_tau={max_tau} gap={gap:e} splitting={splitting_ok}"),
    );
    assert!(volume_ok, "{volume}");
    assert!(hawking_ok, "max_tau={max_tau} gap={gap}");
    assert!(splitting_ok, "{:?} / {:?}", flat.notes, curved.notes);
}

// ----------------------------------------------------------------------- 10

const FULL_SUITE: &str = r#"{
  "schema_version": 1,
  "name": "every verifier on the Minkowski cone",
  "cone": {
    "warper": { "catalog": "L2" },
    "N": 2,
    "density": { "model": { "tag": "sinh", "domain": [0, 1] } }
  },
  "seed": 11,
  "resolution": 60,
  "verifiers": [
    { "kind": "warper" },
    { "kind": "density" },
    { "kind": "needle", "samples": 200 },
    { "kind": "contraction", "K": 0, "source": { "t": [1.0, 1.5], "r": [0.3, 0.6] }, "target": [3.0, 0.45] },
    {
      "kind": "pointwise", "K": 0,
      "mu0": { "rect": { "t": [1.0, 1.3], "r": [0.3, 0.6] }, "cells": 4 },
      "mu1": { "rect": { "t": [2.6, 2.9], "r": [0.35, 0.65] }, "cells": 4 }
    },
    { "kind": "volume", "r0": 0.5 },
    { "kind": "splitting", "lengths": [1, 2, 4], "tolerance": 1e-9 },
    { "kind": "cdcon", "K": -1 },
    { "kind": "converse", "samples": 60 }
  ]
}"#;

fn report_bytes(text: &str) -> Vec<String> {
    let cfg = ExperimentConfig::parse(text).unwrap();
    let outcome = run_experiment(&cfg, text.as_bytes()).unwrap();
    outcome.reports.iter().map(report_json).collect()
}

fn criterion_10_determinism() {
    let mut texts = vec![("full-suite".to_string(), FULL_SUITE.to_string())];
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut paths: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    paths.sort();
    for p in paths {
        texts.push((
            p.display().to_string(),
            std::fs::read_to_string(&p).unwrap(),
        ));
    }
    let mut differing = Vec::new();
    let mut reports = 0;
    for (name, text) in &texts {
        let (a, b) = (report_bytes(text), report_bytes(text));
        reports += a.len();
        if a != b {
            differing.push(name.clone());
        }
    }
    let ok = differing.is_empty();
    verdict(
        10,
        "byte-identical reports",
        ok,
        format!("{} configs, {reports} reports", texts.len()),
    );
    assert!(ok, "{differing:?}");
}

fn main() {
    let all: [(&str, fn()); 10] = [
        ("criterion_01_catalog", criterion_01_catalog),
        ("criterion_02_euclidean_cone", criterion_02_euclidean_cone),
        (
            "criterion_03_minkowski_separation",
            criterion_03_minkowski_separation,
        ),
        ("criterion_04_coefficients", criterion_04_coefficients),
        ("criterion_05_needle_forward", criterion_05_needle_forward),
        ("criterion_06_converse_family", criterion_06_converse_family),
        ("criterion_07_contraction", criterion_07_contraction),
        ("criterion_08_transport", criterion_08_transport),
        ("criterion_09_applications", criterion_09_applications),
        ("criterion_10_determinism", criterion_10_determinism),
    ];
    // cargo passes libtest flags such as --nocapture; only bare words filter
    let filters: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut failed = Vec::new();
    let mut ran = 0;
    for (name, run) in all {
        if !filters.is_empty() && !filters.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        ran += 1;
        if std::panic::catch_unwind(run).is_err() {
            failed.push(name);
        }
    }
    println!(
        "acceptance: {} of {ran} criteria passed",
        ran - failed.len()
    );
    if !failed.is_empty() {
        println!("failed: {}", failed.join(", "));
        std::process::exit(1);
    }
}
