use super::needle::{verify_needle_concavity, NeedleConfig, Sheet};
use super::{Condition, Parameters, VerificationReport};
use crate::densities::{check_cd_density, DensityKind, DensityProfile, Kink, ModelTag};
use crate::error::Result;
use crate::warp::{check_warper, compute_eta, BumpTerm, Signature, WarperForm, WarpingFunction};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyMember {
    pub name: String,
    pub sheet: Sheet,
    pub kappa: f64,
}

fn sine(frequency: f64, bump: Option<BumpTerm>) -> WarpingFunction {
    WarpingFunction {
        interval: [0.0, PI / frequency],
        signature: Signature::Lorentzian,
        form: WarperForm::Model {
            tag: ModelTag::Sin,
            amplitude: 1.0,
            frequency,
            bump,
        },
        truncation: [-20.0, 20.0],
    }
}

fn density(tag: ModelTag, scale: f64, kink: Option<Kink>, n: f64) -> DensityProfile {
    DensityProfile::new([0.0, 1.0], n, DensityKind::Model { tag, scale, kink })
        .expect("valid model density")
}

/// Twenty perturbations of the sine cone with `kappa = -1`: frequency changes of
/// the warper, bumps on it, kinks in the fiber root and rescaled `cosh` fibers.
/// Some satisfy the hypotheses and some do not.
pub fn converse_family(n: f64) -> Vec<FamilyMember> {
    let mut out = Vec::with_capacity(20);
    let mut push = |name: String, warper: WarpingFunction, h: DensityProfile| {
        out.push(FamilyMember {
            name,
            sheet: Sheet::new(warper, h),
            kappa: -1.0,
        })
    };
    for omega in [0.5, 0.8, 0.95, 1.0, 1.05, 1.2, 1.5, 2.0] {
        push(
            format!("frequency {omega}"),
            sine(omega, None),
            density(ModelTag::Cosh, 1.0, None, n),
        );
    }
    for eps in [-0.2, -0.1, -0.05, 0.05, 0.1, 0.2] {
        let bump = BumpTerm {
            amplitude: eps,
            center: PI / 2.0,
            width: 0.5,
        };
        push(
            format!("bump {eps}"),
            sine(1.0, Some(bump)),
            density(ModelTag::Const, 1.0, None, n),
        );
    }
    for slope in [-0.3, 0.1, 0.3] {
        let kink = Kink { at: 0.5, slope };
        push(
            format!("kink {slope}"),
            sine(1.0, None),
            density(ModelTag::Const, 1.0, Some(kink), n),
        );
    }
    for scale in [0.5, 1.0, 1.5] {
        push(
            format!("cosh scale {scale}"),
            sine(1.0, None),
            density(ModelTag::Cosh, scale, None, n),
        );
    }
    out
}

/// Runs the needle test on every member and compares its verdict with the
/// hypotheses (warper inequality and fiber curvature with the computed `eta`).
/// An alarm is a member that passes the needle test while breaking a hypothesis;
/// a member meeting the hypotheses that fails the test is counted as well.
/// `min_slack` is minus the number of such members.
pub fn detect_converse_violation(
    family: &[FamilyMember],
    cfg: &NeedleConfig,
) -> Result<VerificationReport> {
    VerificationReport::timed(|| {
        let n = family.first().map_or(2.0, |m| m.sheet.n());
        let kappa = family.first().map_or(0.0, |m| m.kappa);
        let params = Parameters {
            k: -kappa * n,
            n: n + 1.0,
            p: None,
            signature: Signature::Lorentzian,
        };
        let mut report = VerificationReport::new(
            Condition::Converse,
            "needle verdict agrees with the warper and fiber hypotheses",
            params,
            0.5,
        );
        let (mut alarms, mut misses) = (0usize, 0usize);
        for member in family {
            let w = &member.sheet.warper;
            let warper = check_warper(w, member.kappa, cfg.tolerance)?;
            let budget = compute_eta(w, member.kappa);
            let fiber = check_cd_density(
                &member.sheet.density,
                budget.eta,
                member.sheet.n(),
                cfg.tolerance,
            )?;
            let mut needle = verify_needle_concavity(&member.sheet, member.kappa, cfg)?;
            let hypotheses = warper.passed && fiber.passed;
            needle.notes.push(format!("member: {}", member.name));
            needle.notes.push(format!(
                "hypotheses {}",
                if hypotheses { "hold" } else { "fail" }
            ));
            needle.diag("warper_slack", warper.min_slack);
            needle.diag("fiber_slack", fiber.min_slack);
            needle.diag("eta", budget.eta);
            if needle.passed && !hypotheses {
                alarms += 1;
                needle
                    .notes
                    .push("alarm: needle test passed with a broken hypothesis".into());
            }
            if !needle.passed && hypotheses {
                misses += 1;
                needle
                    .notes
                    .push("needle test failed although the hypotheses hold".into());
            }
            report.samples += needle.samples;
            report.sub_reports.push(needle);
        }
        report.diag("alarms", alarms as f64);
        report.diag("hypothesis_failures", misses as f64);
        report.min_slack = 0.0 - (alarms + misses) as f64;
        report.passed = alarms + misses == 0;
        Ok(report)
    })
}
