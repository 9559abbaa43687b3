use super::needle::Sheet;
use super::{Condition, Parameters, VerificationReport, WitnessRecord, TRANSPORT_TOL};
use crate::coeffs::tau_coeff;
use crate::cone_geom::{
    causal_relation_reduced, exp_map, sheet_geodesic, shoot_metric, MetricOptions,
};
use crate::error::{Error, Result};
use crate::warp::Signature;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rect {
    pub t: [f64; 2],
    pub r: [f64; 2],
}

/// Contract the rectangle `source` toward `target` along geodesics and compare the
/// measure of the image at each time with the distortion bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContractionExperiment {
    pub source: Rect,
    /// `(t, r)` of the contraction point.
    pub target: (f64, f64),
    /// Cells per side.
    #[serde(default = "default_cells")]
    pub cells: usize,
    #[serde(default = "default_times")]
    pub times: Vec<f64>,
    #[serde(default = "default_tol")]
    pub tolerance: f64,
    /// Integration steps for Riemannian geodesics.
    #[serde(default = "default_steps")]
    pub steps: usize,
}

fn default_cells() -> usize {
    400
}

fn default_times() -> Vec<f64> {
    (1..8).map(|k| k as f64 / 8.0).collect()
}

fn default_tol() -> f64 {
    TRANSPORT_TOL
}

fn default_steps() -> usize {
    200
}

impl ContractionExperiment {
    pub fn new(source: Rect, target: (f64, f64), cells: usize) -> Self {
        Self {
            source,
            target,
            cells,
            times: default_times(),
            tolerance: default_tol(),
            steps: default_steps(),
        }
    }
}

/// Images of one grid vertex: geodesic length, then `(t, r)` at each time and at 1.
type Track = (f64, Vec<(f64, f64)>);

/// Per cell: `m(A_s cell) / m(cell) >= tau_{K,N}^{(s)}(theta)^N` with `theta` the
/// distance (or time separation) to the target, plus the same inequality summed
/// over the rectangle. Areas are shoelace areas of the image quadrilaterals
/// weighted by `f^N h` at their vertex average.
pub fn verify_contraction(
    sheet: &Sheet,
    k: f64,
    exp: &ContractionExperiment,
) -> Result<VerificationReport> {
    VerificationReport::timed(|| {
        let sig = sheet.warper.signature;
        let n_cone = sheet.n() + 1.0;
        let condition = match sig {
            Signature::Lorentzian => Condition::Tmcp,
            Signature::Riemannian => Condition::Mcp,
        };
        let params = Parameters {
            k,
            n: n_cone,
            p: None,
            signature: sig,
        };
        let mut report = VerificationReport::new(
            condition,
            "m(A_s) >= integral over A of tau_{K,N}^{(s)}(|ox|)^N dm(x)",
            params,
            exp.tolerance,
        );
        let n = exp.cells;
        if n == 0 || exp.times.is_empty() {
            return Err(Error::Grid(
                "contraction needs at least one cell and one time".into(),
            ));
        }
        let Rect {
            t: [ta, tb],
            r: [ra, rb],
        } = exp.source;
        if !(ta < tb && ra < rb) {
            return Err(Error::Domain("source rectangle is empty".into()));
        }
        if ra < sheet.density.a() || rb > sheet.density.b() {
            return Err(Error::Domain(
                "source rectangle leaves the fiber domain".into(),
            ));
        }
        let vertices: Vec<(f64, f64)> = (0..=n)
            .flat_map(|i| {
                (0..=n).map(move |j| {
                    (
                        ta + (tb - ta) * i as f64 / n as f64,
                        ra + (rb - ra) * j as f64 / n as f64,
                    )
                })
            })
            .collect();
        let tracks: Vec<Track> = match sig {
            Signature::Lorentzian => vertices
                .par_iter()
                .map(|&v| lorentz_track(sheet, exp, v))
                .collect::<Result<_>>()?,
            Signature::Riemannian => riemann_tracks(sheet, exp, &vertices)?,
        };
        let weight = |t: f64, r: f64| sheet.warper.f(t).powf(sheet.n()) * sheet.density.h(r);
        let cell_measure = |idx: usize| -> f64 {
            let (i, j) = (idx / n, idx % n);
            let q = [
                i * (n + 1) + j,
                (i + 1) * (n + 1) + j,
                (i + 1) * (n + 1) + j + 1,
                i * (n + 1) + j + 1,
            ];
            measure(q.map(|v| tracks[v].1[exp.times.len()]), &weight)
        };
        let base: Vec<f64> = (0..n * n).map(cell_measure).collect();
        let theta: Vec<f64> = (0..n * n)
            .map(|idx| {
                let (i, j) = (idx / n, idx % n);
                let q = [
                    i * (n + 1) + j,
                    (i + 1) * (n + 1) + j,
                    (i + 1) * (n + 1) + j + 1,
                    i * (n + 1) + j + 1,
                ];
                q.iter().map(|&v| tracks[v].0).sum::<f64>() / 4.0
            })
            .collect();
        let total: f64 = base.iter().sum();
        let mut records: Vec<WitnessRecord> = (0..n * n)
            .map(|idx| {
                let (i, j) = (idx / n, idx % n);
                WitnessRecord {
                    start: exp.target,
                    end: (
                        ta + (tb - ta) * (i as f64 + 0.5) / n as f64,
                        ra + (rb - ra) * (j as f64 + 0.5) / n as f64,
                    ),
                    s: f64::NAN,
                    slack: f64::INFINITY,
                }
            })
            .collect();
        let mut aggregate = f64::INFINITY;
        for (si, &s) in exp.times.iter().enumerate() {
            let mut image_total = 0.0;
            let mut bound_total = 0.0;
            for idx in 0..n * n {
                let (i, j) = (idx / n, idx % n);
                let q = [
                    i * (n + 1) + j,
                    (i + 1) * (n + 1) + j,
                    (i + 1) * (n + 1) + j + 1,
                    i * (n + 1) + j + 1,
                ];
                let m_s = measure(q.map(|v| tracks[v].1[si]), &weight);
                let bound = tau_coeff(k, n_cone, s, theta[idx]).powf(n_cone).as_f64();
                image_total += m_s;
                bound_total += bound * base[idx];
                let slack = m_s / (bound * base[idx]) - 1.0;
                if slack < records[idx].slack {
                    records[idx].slack = slack;
                    records[idx].s = s;
                }
            }
            let slack = image_total / bound_total - 1.0;
            aggregate = aggregate.min(slack);
            report.diag(&format!("ratio_s{:.4}", s), image_total / total);
        }
        report.absorb(records);
        report.absorb_slack(aggregate, 0);
        report.diag("aggregate_slack", aggregate);
        report.diag("source_measure", total);
        Ok(report)
    })
}

/// Shoelace area of the quadrilateral in the `(t, r)` chart times the weight at its vertex average.
pub(super) fn measure(q: [(f64, f64); 4], weight: &dyn Fn(f64, f64) -> f64) -> f64 {
    let mut area = 0.0;
    for k in 0..4 {
        let (x0, y0) = q[k];
        let (x1, y1) = q[(k + 1) % 4];
        area += x0 * y1 - x1 * y0;
    }
    let tc = q.iter().map(|p| p.0).sum::<f64>() / 4.0;
    let rc = q.iter().map(|p| p.1).sum::<f64>() / 4.0;
    0.5 * area.abs() * weight(tc, rc)
}

fn lorentz_track(sheet: &Sheet, exp: &ContractionExperiment, v: (f64, f64)) -> Result<Track> {
    let w = &sheet.warper;
    let o = exp.target;
    let d = (v.1 - o.1).abs();
    let dir = (v.1 - o.1).signum();
    let past = v.0 < o.0;
    let (lo, hi) = if past { (v.0, o.0) } else { (o.0, v.0) };
    if !causal_relation_reduced(w, lo, hi, d).is_chronological() {
        return Err(Error::Precondition(format!(
            "vertex ({}, {}) is not chronologically related to the target",
            v.0, v.1
        )));
    }
    let g = sheet_geodesic(w, lo, hi, d, &MetricOptions::default())?;
    let at = |s: f64| -> (f64, f64) {
        if past {
            // runs from v to o; the contraction starts at o
            let (t, rho) = g.point(1.0 - s);
            (t, v.1 - dir * rho)
        } else {
            let (t, rho) = g.point(s);
            (t, o.1 + dir * rho)
        }
    };
    let mut pts: Vec<(f64, f64)> = exp.times.iter().map(|&s| at(s)).collect();
    pts.push(v);
    Ok((g.length, pts))
}

/// Riemannian tracks by shooting from the target, continued along the grid.
fn riemann_tracks(
    sheet: &Sheet,
    exp: &ContractionExperiment,
    vertices: &[(f64, f64)],
) -> Result<Vec<Track>> {
    let w = &sheet.warper;
    let o = exp.target;
    let mut out = Vec::with_capacity(vertices.len());
    let mut guess: Option<(f64, f64)> = None;
    let n = exp.cells + 1;
    let mut row_start: Option<(f64, f64)> = None;
    for (idx, &v) in vertices.iter().enumerate() {
        if idx % n == 0 {
            guess = row_start;
        }
        let d = v.1 - o.1;
        let g = match guess {
            Some(g) => g,
            None => {
                let sheet_g =
                    sheet_geodesic(w, o.0, v.0, d.abs(), &MetricOptions::with_lattice(200))?;
                let (t1, rho1) = sheet_g.point(1e-3);
                let dt = t1 - o.0;
                let dr = rho1 * d.signum() * w.f(o.0);
                (dr.atan2(dt), sheet_g.length)
            }
        };
        let (angle, len) = shoot_metric(w, o.0, v.0, d, g, exp.steps)?;
        if idx % n == 0 {
            row_start = Some((angle, len));
        }
        guess = Some((angle, len));
        let mut pts: Vec<(f64, f64)> = exp
            .times
            .iter()
            .map(|&s| {
                let (t, r) = exp_map(w, o.0, angle, s * len, exp.steps);
                (t, o.1 + r)
            })
            .collect();
        pts.push(v);
        out.push((len, pts));
    }
    Ok(out)
}
