//! Runs the verifiers of an experiment and records the manifest.

use crate::config::{BuiltCone, ExperimentConfig, VerifierConfig};
use crate::error::{CliError, CliResult};
use conewarp::densities::{check_cd_density, DensityCheckResult};
use conewarp::serde_ext::Ext;
use conewarp::verify::{
    check_hawking, check_splitting_hypotheses, check_volume_singularity, classify_cdcon,
    converse_family, detect_converse_violation, verify_contraction, verify_needle_concavity,
    verify_pointwise_tcd, CdconConfig, ContractionExperiment, NeedleConfig, Parameters,
    PointwiseConfig, Sheet, Status,
};
use conewarp::warp::check_warper;
use conewarp::{Condition, Signature, VerificationReport};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

pub const MANIFEST_SCHEMA_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportEntry {
    pub index: usize,
    pub kind: String,
    pub path: String,
    pub passed: bool,
    pub status: Status,
    pub min_slack: Ext,
}

/// Everything about a run that is not part of the reproducible reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub tool_version: String,
    pub config_sha256: String,
    pub seed: u64,
    pub threads: usize,
    pub passed: bool,
    pub reports: Vec<ReportEntry>,
    pub timings_ms: BTreeMap<String, u64>,
}

pub struct RunOutcome {
    pub manifest: RunManifest,
    pub reports: Vec<VerificationReport>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// File name of the `index`-th report.
pub fn report_name(index: usize, kind: &str) -> String {
    format!("{index:02}-{kind}.json")
}

pub fn report_json(r: &VerificationReport) -> String {
    let mut s = serde_json::to_string_pretty(r).expect("report serializes");
    s.push('\n');
    s
}

/// Runs every verifier in order; reports are returned in the same order.
pub fn run_experiment(cfg: &ExperimentConfig, config_bytes: &[u8]) -> CliResult<RunOutcome> {
    let mut timings = BTreeMap::new();
    let clock = Instant::now();
    let cone = cfg.cone.build()?;
    timings.insert("build".to_string(), clock.elapsed().as_millis() as u64);

    let mut reports = Vec::with_capacity(cfg.verifiers.len());
    let mut entries = Vec::with_capacity(cfg.verifiers.len());
    for (index, v) in cfg.verifiers.iter().enumerate() {
        let start = Instant::now();
        let report = run_one(cfg, &cone, v)?;
        let stage = format!("{:02}-{}", index, v.kind());
        timings.insert(stage, start.elapsed().as_millis() as u64);
        entries.push(ReportEntry {
            index,
            kind: v.kind().to_string(),
            path: report_name(index, v.kind()),
            passed: report.passed,
            status: report.status,
            min_slack: Ext(report.min_slack),
        });
        reports.push(report);
    }
    timings.insert("total".to_string(), clock.elapsed().as_millis() as u64);
    let manifest = RunManifest {
        schema_version: MANIFEST_SCHEMA_VERSION,
        tool_version: TOOL_VERSION.to_string(),
        config_sha256: sha256_hex(config_bytes),
        seed: cfg.seed,
        threads: rayon::current_num_threads(),
        passed: entries.iter().all(|e| e.passed),
        reports: entries,
        timings_ms: timings,
    };
    Ok(RunOutcome { manifest, reports })
}

/// Writes reports and `manifest.json` into `dir`.
pub fn write_outcome(outcome: &RunOutcome, dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    for (entry, report) in outcome.manifest.reports.iter().zip(&outcome.reports) {
        let path = dir.join(&entry.path);
        std::fs::write(&path, report_json(report)).map_err(|e| CliError::io(&path, e))?;
    }
    let path = dir.join("manifest.json");
    let mut text = serde_json::to_string_pretty(&outcome.manifest).expect("manifest serializes");
    text.push('\n');
    std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))
}

fn seeded(cfg: &NeedleConfig, run_seed: u64) -> NeedleConfig {
    NeedleConfig {
        seed: run_seed.wrapping_add(cfg.seed),
        ..*cfg
    }
}

fn cone_parameters(cone: &BuiltCone) -> Parameters {
    let sig = cone.spec.warper.signature;
    let n = cone.spec.n;
    Parameters {
        k: match sig {
            Signature::Lorentzian => -cone.kappa * n,
            Signature::Riemannian => cone.kappa * n,
        },
        n: n + 1.0,
        p: None,
        signature: sig,
    }
}

/// Wraps a one-dimensional sweep as a report with its witness in the notes.
fn sweep_report(
    condition: Condition,
    inequality: &str,
    params: Parameters,
    res: &DensityCheckResult,
) -> VerificationReport {
    let mut r = VerificationReport::new(condition, inequality, params, res.tolerance);
    r.absorb_slack(res.min_slack, res.samples);
    r.notes.push(format!(
        "witness: {}",
        serde_json::to_string(&res.witness).expect("witness serializes")
    ));
    r.diag("ode_residual", res.ode_residual);
    r
}

fn run_one(
    cfg: &ExperimentConfig,
    cone: &BuiltCone,
    v: &VerifierConfig,
) -> CliResult<VerificationReport> {
    let sheet = || Sheet::new(cone.spec.warper.clone(), cone.density.clone());
    let n = cone.spec.n;
    let report = match v {
        VerifierConfig::Warper { tolerance } => {
            let res = check_warper(&cone.spec.warper, cone.kappa, *tolerance)?;
            let mut r = sweep_report(
                Condition::Warper,
                "f'' - kappa f <= 0 (Lorentzian) or f'' + kappa f <= 0 (Riemannian)",
                cone_parameters(cone),
                &res,
            );
            r.diag("kappa", cone.kappa);
            r
        }
        VerifierConfig::Density { eta, tolerance } => {
            let eta = eta.unwrap_or(cone.eta);
            let res = check_cd_density(&cone.density, eta, n, *tolerance)?;
            let params = Parameters {
                k: (n - 1.0) * eta,
                n,
                p: None,
                signature: cone.spec.warper.signature,
            };
            let mut r = sweep_report(
                Condition::DensityConcavity,
                "h^(1/(N-1)) is sigma-concave with curvature eta",
                params,
                &res,
            );
            r.diag("eta", eta);
            r
        }
        VerifierConfig::Needle(nc) => {
            verify_needle_concavity(&sheet(), cone.kappa, &seeded(nc, cfg.seed))?
        }
        VerifierConfig::Contraction {
            k,
            source,
            target,
            cells,
            times,
            tolerance,
        } => {
            let mut exp =
                ContractionExperiment::new(*source, *target, cells.unwrap_or(cfg.resolution));
            if let Some(t) = times {
                exp.times = t.clone();
            }
            if let Some(t) = tolerance {
                exp.tolerance = *t;
            }
            verify_contraction(&sheet(), *k, &exp)?
        }
        VerifierConfig::Pointwise {
            k,
            mu0,
            mu1,
            p,
            tolerance,
        } => {
            let mut pc = PointwiseConfig {
                p: *p,
                ..PointwiseConfig::default()
            };
            if let Some(t) = tolerance {
                pc.tolerance = *t;
            }
            verify_pointwise_tcd(&sheet(), *k, mu0, mu1, &pc)?
        }
        VerifierConfig::Hawking(h) => {
            let mut h = *h;
            h.seed = cfg.seed.wrapping_add(h.seed);
            check_hawking(&cone.spec, &h)?
        }
        VerifierConfig::Volume { r0 } => {
            let (_, r) = check_volume_singularity(&cone.spec, *r0)?;
            r
        }
        VerifierConfig::Splitting(s) => check_splitting_hypotheses(&cone.spec, s)?,
        VerifierConfig::Cdcon { k, p, settings } => {
            let settings = CdconConfig {
                needle: seeded(&settings.needle, cfg.seed),
                ..settings.clone()
            };
            classify_cdcon(&cone.density, *k, n, *p, &settings)?
        }
        VerifierConfig::Converse(nc) => {
            detect_converse_violation(&converse_family(n), &seeded(nc, cfg.seed))?
        }
    };
    Ok(report)
}
