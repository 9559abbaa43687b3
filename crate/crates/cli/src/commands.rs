//! One function per subcommand; output goes to the supplied writer.

use crate::config::{ExperimentConfig, TransportInstance, TransportMode};
use crate::diff::diff_paths;
use crate::error::{CliError, CliResult};
use crate::run::{run_experiment, write_outcome};
use crate::tables::{catalog_rows, catalog_text, write_geodesic_csv, write_plan_csv};
use conewarp::cone_geom::{geodesic_2d_with, metric_distance_with, MetricOptions};
use conewarp::densities::{check_cd_density, DensityKind};
use conewarp::serde_ext::Ext;
use conewarp::transport::{
    check_cyclical_monotonicity, cone_tau, lorentz_wasserstein_p, plan_support_costs,
    wasserstein_p, MonotonicityMode, DEFAULT_CYCLE_CAP,
};
use conewarp::warp::catalog_by_name;
use conewarp::{DensityProfile, ModelTag, Signature, WarpingFunction};
use serde_json::json;
use std::io::Write;
use std::path::{Path, PathBuf};

fn emit(out: &mut dyn Write, text: &str) -> CliResult<()> {
    out.write_all(text.as_bytes())
        .map_err(|e| CliError::io("stdout", e))
}

pub fn catalog(signature: Option<Signature>, as_json: bool, out: &mut dyn Write) -> CliResult<()> {
    let rows = catalog_rows(signature);
    if as_json {
        let mut s = serde_json::to_string_pretty(&rows).expect("rows serialize");
        s.push('\n');
        emit(out, &s)
    } else {
        emit(out, &catalog_text(&rows))
    }
}

/// Runs a config; writes reports to `out_dir` (or the config's own directory
/// setting) and prints a summary. Failing verifiers are listed with their worst
/// witnesses as JSON.
pub fn verify(config: &Path, out_dir: Option<&Path>, out: &mut dyn Write) -> CliResult<()> {
    let bytes = std::fs::read(config)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", config.display())))?;
    let text = String::from_utf8(bytes.clone()).map_err(|e| CliError::Config(e.to_string()))?;
    let cfg = ExperimentConfig::parse(&text)?;
    let outcome = run_experiment(&cfg, &bytes)?;
    let dir: PathBuf = out_dir.map_or_else(|| PathBuf::from(&cfg.output.dir), Path::to_path_buf);
    write_outcome(&outcome, &dir)?;
    for e in &outcome.manifest.reports {
        let verdict = if e.passed { "pass" } else { "FAIL" };
        emit(
            out,
            &format!("{verdict} {} min_slack={:?}\n", e.path, e.min_slack.0),
        )?;
    }
    if outcome.manifest.passed {
        return Ok(());
    }
    let failing: Vec<_> = outcome
        .manifest
        .reports
        .iter()
        .zip(&outcome.reports)
        .filter(|(e, _)| !e.passed)
        .map(|(e, r)| {
            json!({
                "report": e.path,
                "min_slack": Ext(r.min_slack),
                "witnesses": r.witnesses.iter().take(3).collect::<Vec<_>>(),
            })
        })
        .collect();
    let summary =
        serde_json::to_string_pretty(&json!({ "failed": failing })).expect("summary serializes");
    emit(out, &format!("{summary}\n"))?;
    Err(CliError::Failed(format!(
        "{} of {} verifiers failed",
        failing.len(),
        cfg.verifiers.len()
    )))
}

/// A catalog name, or a path to a warper document.
pub fn load_warper(spec: &str) -> CliResult<WarpingFunction> {
    if let Ok((w, _)) = catalog_by_name(spec) {
        return Ok(w);
    }
    let text = std::fs::read_to_string(spec).map_err(|_| {
        CliError::Config(format!(
            "`{spec}` is neither a catalog row nor a readable file"
        ))
    })?;
    let w: WarpingFunction =
        serde_json::from_str(&text).map_err(|e| CliError::Config(e.to_string()))?;
    w.validate().map_err(|e| CliError::Config(e.to_string()))?;
    Ok(w)
}

pub struct GeodesicArgs<'a> {
    pub warper: &'a str,
    pub from: (f64, f64),
    pub to: (f64, f64),
    pub nodes: usize,
    pub lattice: usize,
    pub csv: Option<&'a Path>,
}

pub fn geodesic(args: &GeodesicArgs<'_>, out: &mut dyn Write) -> CliResult<()> {
    let w = load_warper(args.warper)?;
    let opts = MetricOptions::with_lattice(args.lattice);
    let path = match geodesic_2d_with(&w, args.from, args.to, &opts, args.nodes) {
        Err(conewarp::Error::NoCausalCurve) => return Err(CliError::NoCausalCurve),
        other => other?,
    };
    match args.csv {
        Some(p) => {
            let file = std::fs::File::create(p).map_err(|e| CliError::io(p, e))?;
            write_geodesic_csv(&path, file)?;
            emit(out, &format!("{:?} length={:?}\n", path.kind, path.length))
        }
        None => write_geodesic_csv(&path, out),
    }
}

pub fn transport(instance: &Path, plan_csv: Option<&Path>, out: &mut dyn Write) -> CliResult<()> {
    let inst = TransportInstance::load(instance)?;
    let cone = inst.cone.build()?.spec;
    let p = inst.p;
    let opts = inst
        .lattice
        .map_or_else(MetricOptions::default, MetricOptions::with_lattice);
    let (value, plan, check) = match inst.mode {
        TransportMode::Metric => {
            let dist = |x: &_, y: &_| metric_distance_with(&cone, *x, *y, &opts);
            let (value, plan) = wasserstein_p(&inst.mu, &inst.nu, p, dist)?;
            let costs =
                plan_support_costs(&inst.mu, &inst.nu, &plan, |x, y| Ok(dist(x, y)?.powf(p)))?;
            let check =
                check_cyclical_monotonicity(&costs, MonotonicityMode::Min, DEFAULT_CYCLE_CAP).ok();
            (value, plan, check)
        }
        TransportMode::Lorentz => {
            let (value, plan) = lorentz_wasserstein_p(&inst.mu, &inst.nu, p, cone_tau(&cone))?;
            let check = if plan.causal_feasible {
                let mut tau = cone_tau(&cone);
                let costs = plan_support_costs(&inst.mu, &inst.nu, &plan, |x, y| {
                    Ok(tau(x, y)?.map_or(f64::NEG_INFINITY, |t| t.powf(p)))
                })?;
                check_cyclical_monotonicity(&costs, MonotonicityMode::Max, DEFAULT_CYCLE_CAP).ok()
            } else {
                None
            };
            (value, plan, check)
        }
    };
    if let Some(path) = plan_csv {
        let file = std::fs::File::create(path).map_err(|e| CliError::io(path, e))?;
        write_plan_csv(&plan, file)?;
    }
    let summary = json!({
        "mode": inst.mode,
        "p": p,
        "value": Ext(value),
        "optimal": plan.optimal,
        "causal_feasible": plan.causal_feasible,
        "marginal_error": plan.marginal_error(&inst.mu.weights, &inst.nu.weights),
        "cyclical_monotonicity": check,
    });
    emit(
        out,
        &format!(
            "{}\n",
            serde_json::to_string_pretty(&summary).expect("summary serializes")
        ),
    )
}

pub struct DensityArgs<'a> {
    pub model: Option<ModelTag>,
    pub profile: Option<&'a Path>,
    pub domain: [f64; 2],
    pub scale: f64,
    pub n: f64,
    pub eta: f64,
    pub tolerance: f64,
}

pub fn density_check(args: &DensityArgs<'_>, out: &mut dyn Write) -> CliResult<()> {
    let bad = |e: conewarp::Error| CliError::Config(e.to_string());
    let h = match (args.model, args.profile) {
        (Some(tag), None) => DensityProfile::new(
            args.domain,
            args.n,
            DensityKind::Model {
                tag,
                scale: args.scale,
                kink: None,
            },
        )
        .map_err(bad)?,
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            let p: DensityProfile =
                serde_json::from_str(&text).map_err(|e| CliError::Config(e.to_string()))?;
            p.with_n(args.n).map_err(bad)?
        }
        _ => {
            return Err(CliError::Config(
                "give exactly one of --model and --profile".into(),
            ))
        }
    };
    let res = check_cd_density(&h, args.eta, args.n, args.tolerance)?;
    emit(
        out,
        &format!(
            "{}\n",
            serde_json::to_string_pretty(&res).expect("result serializes")
        ),
    )?;
    if res.passed {
        Ok(())
    } else {
        Err(CliError::Failed(format!("min slack {:e}", res.min_slack)))
    }
}

pub fn report_diff(a: &Path, b: &Path, tolerance: f64, out: &mut dyn Write) -> CliResult<()> {
    let diffs = diff_paths(a, b, tolerance)?;
    for d in &diffs {
        emit(
            out,
            &format!("{}{}: {} != {}\n", d.file, d.pointer, d.left, d.right),
        )?;
    }
    if diffs.is_empty() {
        emit(out, "identical\n")
    } else {
        Err(CliError::Failed(format!("{} differences", diffs.len())))
    }
}
