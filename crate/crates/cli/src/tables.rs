//! Catalog rows and plot-ready CSV tables.

use crate::error::{CliError, CliResult};
use conewarp::cone_geom::GeodesicPath;
use conewarp::warp::{catalog, compute_eta};
use conewarp::{CatalogEntry, Signature, TransportPlan};
use serde::{Deserialize, Serialize};
use std::io::Write;

/// Seventeen significant digits, enough to round-trip any `f64`.
pub fn fmt17(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CatalogRow {
    pub name: CatalogEntry,
    pub signature: Signature,
    #[serde(with = "conewarp::serde_ext::pair")]
    pub interval: [f64; 2],
    pub f: String,
    pub eta: f64,
    pub kappa: f64,
    /// `eta` recomputed from the warper.
    pub eta_computed: f64,
}

pub fn catalog_rows(filter: Option<Signature>) -> Vec<CatalogRow> {
    CatalogEntry::ALL
        .iter()
        .filter(|e| filter.map_or(true, |s| e.signature() == s))
        .map(|&entry| {
            let (w, budget) = catalog(entry);
            CatalogRow {
                name: entry,
                signature: entry.signature(),
                interval: w.interval,
                f: entry.tag().name().to_string(),
                eta: budget.eta,
                kappa: budget.kappa,
                eta_computed: compute_eta(&w, budget.kappa).eta,
            }
        })
        .collect()
}

fn interval_label(i: [f64; 2]) -> String {
    let end = |v: f64| {
        if v == std::f64::consts::PI {
            "pi".to_string()
        } else if v.is_infinite() {
            if v > 0.0 { "inf" } else { "-inf" }.to_string()
        } else {
            format!("{v}")
        }
    };
    if i[0].is_infinite() && i[1].is_infinite() {
        "R".into()
    } else {
        let close = if i[1].is_infinite() { ")" } else { "]" };
        format!("[{}, {}{close}", end(i[0]), end(i[1]))
    }
}

pub fn catalog_text(rows: &[CatalogRow]) -> String {
    let mut out = format!(
        "{:<4} {:<10} {:<10} {:<6} {:>4} {:>6}\n",
        "name", "signature", "I", "f", "eta", "kappa"
    );
    for r in rows {
        let sig = match r.signature {
            Signature::Lorentzian => "lorentzian",
            Signature::Riemannian => "riemannian",
        };
        out.push_str(&format!(
            "{:<4} {:<10} {:<10} {:<6} {:>4} {:>6}\n",
            r.name.to_string(),
            sig,
            interval_label(r.interval),
            r.f,
            r.eta,
            r.kappa
        ));
    }
    out
}

fn csv_err(e: csv::Error) -> CliError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::io("csv output", io),
        other => CliError::Config(format!("{other:?}")),
    }
}

/// Node table `s, t, r, v_beta, integrand, tau` with `tau` the length up to the node.
pub fn write_geodesic_csv<W: Write>(path: &GeodesicPath, out: W) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["s", "t", "r", "v_beta", "integrand", "tau"])
        .map_err(csv_err)?;
    for (node, tau) in path.nodes.iter().zip(path.cumulative_length()) {
        w.write_record([
            fmt17(node.s),
            fmt17(node.t),
            fmt17(node.r),
            fmt17(node.v_beta),
            fmt17(node.integrand),
            fmt17(tau),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| CliError::io("csv output", e))
}

/// Plan entries `i, j, mass` with positive mass.
pub fn write_plan_csv<W: Write>(plan: &TransportPlan, out: W) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["i", "j", "mass"]).map_err(csv_err)?;
    for (i, j, m) in plan.triplets() {
        w.write_record([i.to_string(), j.to_string(), fmt17(m)])
            .map_err(csv_err)?;
    }
    w.flush().map_err(|e| CliError::io("csv output", e))
}
