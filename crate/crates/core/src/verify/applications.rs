use super::sampling::latin_hypercube;
use super::{Condition, Parameters, VerificationReport, WitnessRecord, NEEDLE_TOL};
use crate::cone_geom::{sheet_geodesic, ConeSpec, MetricOptions};
use crate::error::{Error, Result};
use crate::quad::integrate;
use crate::warp::{check_warper, log_derivative, Signature};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HawkingConfig {
    pub r0: f64,
    /// Lower bound for the mean curvature of the slice `{r0} x X`.
    pub mean_curvature: f64,
    /// Curvature scale: the cone is assumed to satisfy the contraction property with `K N`.
    #[serde(rename = "K")]
    pub k: f64,
    /// Optional comparison bound `D` for the time separation from the slice.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diameter: Option<f64>,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_samples() -> usize {
    256
}

impl HawkingConfig {
    pub fn new(r0: f64, mean_curvature: f64, k: f64) -> Self {
        Self {
            r0,
            mean_curvature,
            k,
            diameter: None,
            samples: default_samples(),
            seed: 0,
        }
    }
}

/// Which of the three curvature cases applies, if any.
fn hawking_case(k: f64, h: f64, n: f64) -> Option<&'static str> {
    if k > 0.0 {
        Some("K > 0, any H")
    } else if k == 0.0 && h < 0.0 {
        Some("K = 0 and H < 0")
    } else if k < 0.0 && h < -n * (-k).sqrt() {
        Some("K < 0 and H < -N sqrt(-K)")
    } else {
        None
    }
}

/// Samples future-directed maximizers from the slice `{r0} x X` and checks that
/// their proper time stays below `sup I - r0` (and below `D` when supplied). The
/// vertical geodesic to the top of the interval is always included; it attains
/// the base bound.
pub fn check_hawking(cone: &ConeSpec, cfg: &HawkingConfig) -> Result<VerificationReport> {
    VerificationReport::timed(|| {
        cone.require(Signature::Lorentzian)?;
        let w = &cone.warper;
        let n = cone.n;
        let params = Parameters {
            k: cfg.k * n,
            n: n + 1.0,
            p: None,
            signature: Signature::Lorentzian,
        };
        let report = VerificationReport::new(
            Condition::Singularity,
            "proper time from the slice {r0} x X is at most sup I - r0",
            params,
            NEEDLE_TOL,
        );
        let Some(case) = hawking_case(cfg.k, cfg.mean_curvature, n) else {
            return Ok(report.not_applicable(&format!(
                "no curvature case applies to K = {}, H = {}",
                cfg.k, cfg.mean_curvature
            )));
        };
        let mut report = report;
        report.notes.push(format!("case: {case}"));
        let [lo, hi] = w.interval;
        if !(cfg.r0 > lo && cfg.r0 < hi) || w.vanishes_at(cfg.r0) {
            return Err(Error::Domain(format!(
                "r0 = {} is not interior to the base",
                cfg.r0
            )));
        }
        let logd = log_derivative(w, cfg.r0);
        let required = cfg.mean_curvature / n;
        if logd < required - 1e-12 * required.abs().max(1.0) {
            return Err(Error::MeanCurvature {
                log_derivative: logd,
                required,
            });
        }
        let top = w.truncated()?[1];
        let bound = hi - cfg.r0;
        let span = top - cfg.r0;
        let draws = latin_hypercube::<2>(cfg.samples, cfg.seed);
        let mut targets: Vec<(f64, f64)> = draws
            .iter()
            .map(|u| {
                let t1 = cfg.r0 + (0.02 + 0.98 * u[0]) * span;
                let avail = w.inv_f_integral(cfg.r0, t1).min(cone.fiber.diameter());
                (t1, 0.95 * u[1] * avail)
            })
            .collect();
        targets.push((top, 0.0));
        let taus: Vec<Result<f64>> = targets
            .par_iter()
            .map(|&(t1, d)| Ok(sheet_geodesic(w, cfg.r0, t1, d, &MetricOptions::default())?.length))
            .collect();
        let mut records = Vec::with_capacity(targets.len());
        let mut max_tau = 0.0f64;
        for (&(t1, d), tau) in targets.iter().zip(taus) {
            let tau = tau?;
            max_tau = max_tau.max(tau);
            // the slice's own separation t1 - r0 dominates every curve from it
            let mut slack = (bound - tau).min(t1 - cfg.r0 - tau);
            if let Some(dm) = cfg.diameter {
                slack = slack.min(dm - (t1 - cfg.r0));
            }
            records.push(WitnessRecord {
                start: (cfg.r0, 0.0),
                end: (t1, d),
                s: 1.0,
                slack,
            });
        }
        report.absorb(records);
        report.diag("base_bound", bound);
        report.diag("max_tau", max_tau);
        report.diag("saturation_gap", bound - max_tau);
        report.diag("log_derivative", logd);
        if let Some(dm) = cfg.diameter {
            report.diag("comparison_bound", dm);
        }
        if bound.is_infinite() && cfg.diameter.is_none() {
            report
                .notes
                .push("base interval is unbounded above; the base bound is vacuous".into());
        }
        Ok(report)
    })
}

/// Measure of the future of the slice `{r0} x X`: `m(X) * int_{r0}^{sup I} f^N`.
/// A divergent integral is reported as volume complete, with value `+inf`.
pub fn check_volume_singularity(cone: &ConeSpec, r0: f64) -> Result<(f64, VerificationReport)> {
    let mut value = f64::NAN;
    let report = VerificationReport::timed(|| {
        cone.require(Signature::Lorentzian)?;
        let w = &cone.warper;
        let n = cone.n;
        let mass = cone.fiber_mass();
        if !(mass.is_finite() && mass > 0.0) {
            return Err(Error::InvalidMeasure(format!(
                "fiber mass {mass} is not finite and positive"
            )));
        }
        let params = Parameters {
            k: 0.0,
            n: n + 1.0,
            p: None,
            signature: Signature::Lorentzian,
        };
        let mut report = VerificationReport::new(
            Condition::Singularity,
            "future volume of the slice {r0} x X is finite",
            params,
            0.0,
        );
        let [lo, hi] = w.interval;
        if !(r0 >= lo && r0 < hi) {
            return Err(Error::Domain(format!(
                "r0 = {r0} lies outside the base interval"
            )));
        }
        let fpow = |t: f64| w.f(t).abs().powf(n);
        let integral = if hi.is_finite() {
            let q = integrate(fpow, r0, hi, 0.0, 1e-13);
            report.diag("quadrature_error", q.error);
            Some(q.value)
        } else {
            tail_integral(&fpow, r0)
        };
        match integral {
            Some(v) => {
                value = mass * v;
                report.notes.push("future volume incomplete".into());
            }
            None => {
                value = f64::INFINITY;
                report
                    .notes
                    .push("integral diverges: future volume complete".into());
            }
        }
        report.diag("fiber_mass", mass);
        report.diag("volume", value);
        report.absorb_slack(0.0, 1);
        Ok(report)
    })?;
    Ok((value, report))
}

/// `int_{r0}^inf g` by doubling the upper limit; `None` when the pieces stop shrinking.
fn tail_integral(g: &dyn Fn(f64) -> f64, r0: f64) -> Option<f64> {
    let mut total = 0.0;
    let mut a = r0;
    let mut width = 1.0;
    let mut prev_piece = f64::INFINITY;
    for _ in 0..64 {
        let q = integrate(g, a, a + width, 0.0, 1e-13);
        if !q.value.is_finite() {
            return None;
        }
        total += q.value;
        if q.value <= 1e-15 * total {
            return Some(total);
        }
        // each piece doubles in width; a convergent tail must shrink geometrically
        if q.value > 0.75 * prev_piece && width >= 64.0 {
            return None;
        }
        prev_piece = q.value;
        a += width;
        width *= 2.0;
    }
    None
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplittingConfig {
    /// Base lengths of the vertical probes.
    pub lengths: Vec<f64>,
    /// Relative oscillation below which `f` counts as constant.
    pub tolerance: f64,
}

impl Default for SplittingConfig {
    fn default() -> Self {
        Self {
            lengths: vec![1.0, 2.0, 4.0, 8.0, 16.0, 32.0],
            tolerance: 1e-9,
        }
    }
}

/// Compares the line probe with the dichotomy for cones with concave warper: a
/// timelike line forces `I = R` and constant `f`, while a nonconstant `f` or a
/// bounded side of `I` rules out lines. Convex warpers are reported as not
/// applicable with both observations recorded.
pub fn check_splitting_hypotheses(
    cone: &ConeSpec,
    cfg: &SplittingConfig,
) -> Result<VerificationReport> {
    VerificationReport::timed(|| {
        cone.require(Signature::Lorentzian)?;
        let w = &cone.warper;
        let params = Parameters {
            k: 0.0,
            n: cone.n + 1.0,
            p: None,
            signature: Signature::Lorentzian,
        };
        let mut report = VerificationReport::new(
            Condition::Splitting,
            "a timelike line exists exactly when I = R and f is constant",
            params,
            0.0,
        );
        let [lo, hi] = w.truncated()?;
        let grid: Vec<f64> = (0..=2000)
            .map(|k| w.f(lo + (hi - lo) * k as f64 / 2000.0))
            .collect();
        let fmax = grid.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let fmin = grid.iter().cloned().fold(f64::INFINITY, f64::min);
        let constant = fmax - fmin <= cfg.tolerance * fmax.abs().max(1.0);
        let whole_line = w.interval[0] == f64::NEG_INFINITY && w.interval[1] == f64::INFINITY;
        let mut longest = 0.0f64;
        let mut survives = true;
        for &len in &cfg.lengths {
            // centered vertical segment of base length `len`
            let mid = 0.5 * (lo + hi);
            let (a, b) = (mid - 0.5 * len, mid + 0.5 * len);
            let inside = a >= lo && b <= hi && !w.vanishes_at(a) && !w.vanishes_at(b);
            if !inside {
                survives = false;
                break;
            }
            let g = sheet_geodesic(w, a, b, 0.0, &MetricOptions::default())?;
            longest = longest.max(g.length);
        }
        let concave = check_warper(w, 0.0, 1e-9)?;
        report.diag("oscillation", fmax - fmin);
        report.diag("longest_probe", longest);
        report.diag("concavity_slack", concave.min_slack);
        report.notes.push(format!("f constant: {constant}"));
        report
            .notes
            .push(format!("line survives all probes: {survives}"));
        if !concave.passed {
            return Ok(report
                .not_applicable("f is not concave, so the zero curvature hypothesis cannot hold"));
        }
        let consistent = survives == (constant && whole_line);
        report.absorb_slack(if consistent { 0.0 } else { -1.0 }, cfg.lengths.len());
        Ok(report)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone_geom::{Fiber, FiberMeasure};
    use crate::densities::model_density;
    use crate::warp::{catalog, CatalogEntry};
    use std::f64::consts::PI;

    fn cone(entry: CatalogEntry, n: f64) -> ConeSpec {
        let (w, _) = catalog(entry);
        ConeSpec::new(
            w,
            Fiber::Interval { a: 0.0, b: 1.0 },
            n,
            FiberMeasure::Density {
                profile: model_density("const", n, [0.0, 1.0]).unwrap(),
            },
        )
        .unwrap()
    }

    #[test]
    fn sine_volume_is_half_pi() {
        let (v, r) = check_volume_singularity(&cone(CatalogEntry::L1, 2.0), 0.0).unwrap();
        assert!((v - PI / 2.0).abs() < 1e-12, "{v}");
        assert!(r.passed);
    }

    #[test]
    fn product_volume_diverges() {
        let (v, r) = check_volume_singularity(&cone(CatalogEntry::L3, 2.0), 0.0).unwrap();
        assert!(v.is_infinite());
        assert!(r.passed && r.notes[0].contains("complete"));
    }

    #[test]
    fn hawking_base_bound_saturates() {
        let r = check_hawking(
            &cone(CatalogEntry::L1, 2.0),
            &HawkingConfig::new(PI / 2.0, 0.0, 1.0),
        )
        .unwrap();
        assert!(r.passed);
        assert!(r.diagnostics["saturation_gap"].0.abs() < 1e-12);
        assert!(r.min_slack.abs() < 1e-12);
    }

    #[test]
    fn flat_product_with_zero_mean_curvature_is_not_applicable() {
        let r = check_hawking(
            &cone(CatalogEntry::L3, 2.0),
            &HawkingConfig::new(0.0, 0.0, 0.0),
        )
        .unwrap();
        assert_eq!(r.status, super::super::Status::NotApplicable);
    }

    #[test]
    fn splitting_dichotomy() {
        let cfg = SplittingConfig::default();
        assert!(
            check_splitting_hypotheses(&cone(CatalogEntry::L3, 2.0), &cfg)
                .unwrap()
                .passed
        );
        assert!(
            check_splitting_hypotheses(&cone(CatalogEntry::L1, 2.0), &cfg)
                .unwrap()
                .passed
        );
        let exp = check_splitting_hypotheses(&cone(CatalogEntry::L5, 2.0), &cfg).unwrap();
        assert_eq!(exp.status, super::super::Status::NotApplicable);
    }
}
