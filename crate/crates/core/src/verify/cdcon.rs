use super::contraction::{verify_contraction, ContractionExperiment, Rect};
use super::needle::{verify_needle_concavity, NeedleConfig, Sheet};
use super::{Condition, Parameters, VerificationReport, TRANSPORT_TOL};
use crate::densities::{check_cd_density, DensityKind, DensityProfile, Kink, ModelTag};
use crate::error::{Error, Result};
use crate::warp::{natural_interval, Signature, WarpingFunction};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CdconConfig {
    pub needle: NeedleConfig,
    /// Cells per side of the contraction experiment.
    pub cells: usize,
    pub contraction_tolerance: f64,
}

impl Default for CdconConfig {
    fn default() -> Self {
        Self {
            needle: NeedleConfig {
                samples: 300,
                ..NeedleConfig::default()
            },
            cells: 24,
            contraction_tolerance: TRANSPORT_TOL,
        }
    }
}

/// The fiber with its metric multiplied by `lambda`: domain scaled, density `h(r / lambda)`.
pub fn rescale_fiber(h: &DensityProfile, lambda: f64) -> Result<DensityProfile> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Domain(format!(
            "scale factor {lambda} must be positive"
        )));
    }
    let domain = [h.a() * lambda, h.b() * lambda];
    let kind = match &h.kind {
        DensityKind::Model { tag, scale, kink } => DensityKind::Model {
            tag: *tag,
            scale: scale / lambda,
            kink: kink.map(|k| Kink {
                at: k.at * lambda,
                slope: k.slope / lambda,
            }),
        },
        DensityKind::Sampled { values } => DensityKind::Sampled {
            values: values.clone(),
        },
        DensityKind::Mollified {
            source,
            epsilon,
            exponent_base,
        } => DensityKind::Mollified {
            source: Box::new(rescale_fiber(source, lambda)?),
            epsilon: epsilon * lambda,
            exponent_base: *exponent_base,
        },
    };
    DensityProfile::new(domain, h.n, kind)
}

/// Conic curvature-dimension test of an interval fiber: `K = 0` is the plain
/// density test, `K = N - 1` runs the Euclidean cone verifiers, `K = -(N - 1)` the
/// Minkowski cone verifiers, and any other `K` rescales the fiber onto one of those.
pub fn classify_cdcon(
    fiber: &DensityProfile,
    k: f64,
    n: f64,
    p: f64,
    cfg: &CdconConfig,
) -> Result<VerificationReport> {
    VerificationReport::timed(|| {
        if !(n > 1.0) {
            return Err(Error::Domain(format!("N = {n} must exceed 1")));
        }
        let fiber = fiber.with_n(n)?;
        let signature = if k > 0.0 {
            Signature::Riemannian
        } else {
            Signature::Lorentzian
        };
        let params = Parameters {
            k,
            n,
            p: Some(p),
            signature,
        };
        let mut report = VerificationReport::new(
            Condition::Cdcon,
            "conic curvature-dimension condition of the fiber",
            params,
            cfg.needle.tolerance,
        );
        let edge = n - 1.0;
        if k == 0.0 {
            let res = check_cd_density(&fiber, 0.0, n, cfg.needle.tolerance)?;
            let mut sub = VerificationReport::new(
                Condition::DensityConcavity,
                "(N-1)-th root of the density is concave",
                Parameters {
                    k: 0.0,
                    n,
                    p: None,
                    signature,
                },
                res.tolerance,
            );
            sub.absorb_slack(res.min_slack, res.samples);
            report.notes.push("K = 0: density test".into());
            report.push_sub(sub);
        } else if (k.abs() - edge).abs() <= 1e-12 * edge {
            let (sig, label) = if k > 0.0 {
                (Signature::Riemannian, "Euclidean cone")
            } else {
                (Signature::Lorentzian, "Minkowski cone")
            };
            report.notes.push(format!("K = {k}: {label}"));
            let warper = WarpingFunction::model(ModelTag::Id, natural_interval(ModelTag::Id), sig);
            let sheet = Sheet::new(warper, fiber.clone());
            report.push_sub(verify_needle_concavity(&sheet, 0.0, &cfg.needle)?);
            let exp = contraction_setup(&fiber, sig, cfg);
            report.push_sub(verify_contraction(&sheet, 0.0, &exp)?);
        } else {
            let lambda = (edge / k.abs()).sqrt();
            report.notes.push(format!("rescaled fiber by {lambda}"));
            let scaled = rescale_fiber(&fiber, lambda)?;
            report.push_sub(classify_cdcon(&scaled, k.signum() * edge, n, p, cfg)?);
        }
        Ok(report)
    })
}

/// A small rectangle in the middle of the fiber, contracted toward a point above it.
fn contraction_setup(
    fiber: &DensityProfile,
    sig: Signature,
    cfg: &CdconConfig,
) -> ContractionExperiment {
    let mid = 0.5 * (fiber.a() + fiber.b());
    let half = (0.1 * fiber.len()).min(0.15);
    let target_t = match sig {
        Signature::Lorentzian => 4.0,
        Signature::Riemannian => 2.0,
    };
    let mut exp = ContractionExperiment::new(
        Rect {
            t: [1.0, 1.5],
            r: [mid - half, mid + half],
        },
        (target_t, mid),
        cfg.cells,
    );
    exp.tolerance = cfg.contraction_tolerance;
    exp
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::densities::model_density;
    use std::f64::consts::PI;

    #[test]
    fn sine_fiber_passes_euclidean_test() {
        let h = model_density("sin", 2.0, [0.0, PI]).unwrap();
        let r = classify_cdcon(&h, 1.0, 2.0, 0.5, &CdconConfig::default()).unwrap();
        assert!(r.passed, "{}", r.min_slack);
        assert_eq!(r.sub_reports.len(), 2);
    }

    #[test]
    fn sinh_fiber_passes_minkowski_test() {
        let h = model_density("sinh", 3.0, [0.0, 1.0]).unwrap();
        let r = classify_cdcon(&h, -2.0, 3.0, 0.5, &CdconConfig::default()).unwrap();
        assert!(r.passed, "{}", r.min_slack);
    }

    #[test]
    fn rescaling_keeps_the_verdict() {
        let h = model_density("sinh", 2.0, [0.0, 1.0]).unwrap();
        let direct = classify_cdcon(&h, -4.0, 2.0, 0.5, &CdconConfig::default()).unwrap();
        let scaled = rescale_fiber(&h, 0.5).unwrap();
        let via = classify_cdcon(&scaled, -1.0, 2.0, 0.5, &CdconConfig::default()).unwrap();
        assert_eq!(direct.passed, via.passed);
        assert_eq!(
            serde_json::to_string(&direct.sub_reports[0]).unwrap(),
            serde_json::to_string(&via).unwrap()
        );
        assert!((scaled.h(0.3) - h.h(0.6)).abs() < 1e-15);
    }
}
