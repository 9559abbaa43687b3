use super::contraction::{measure, Rect};
use super::needle::Sheet;
use super::{Condition, Parameters, VerificationReport, WitnessRecord, TRANSPORT_TOL};
use crate::coeffs::tau_coeff;
use crate::cone_geom::{causal_relation_reduced, sheet_geodesic, MetricOptions};
use crate::error::{Error, Result};
use crate::transport::min_cost_coupling;
use crate::warp::Signature;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Piecewise-constant density (relative to the sheet measure) on a rectangle cut
/// into `cells x cells` pieces; empty `density` means uniform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellMeasure {
    pub rect: Rect,
    pub cells: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub density: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PointwiseConfig {
    pub p: f64,
    pub times: Vec<f64>,
    pub tolerance: f64,
}

impl Default for PointwiseConfig {
    fn default() -> Self {
        Self {
            p: 0.5,
            times: (1..8).map(|k| k as f64 / 8.0).collect(),
            tolerance: TRANSPORT_TOL,
        }
    }
}

struct Grid {
    rect: Rect,
    n: usize,
}

impl Grid {
    fn vertex(&self, i: f64, j: f64) -> (f64, f64) {
        let Rect {
            t: [ta, tb],
            r: [ra, rb],
        } = self.rect;
        (
            ta + (tb - ta) * i / self.n as f64,
            ra + (rb - ra) * j / self.n as f64,
        )
    }

    fn center(&self, idx: usize) -> (f64, f64) {
        self.vertex((idx / self.n) as f64 + 0.5, (idx % self.n) as f64 + 0.5)
    }
}

/// Pointwise timelike displacement inequality for the optimal `l_p` coupling.
///
/// The coupling is computed exactly between cell atoms, turned into a map by
/// barycentric projection and interpolated to cell corners. Along the geodesics
/// from each corner to its image the Jacobian `J_s` of a cell is the weighted
/// shoelace area ratio, and the checked inequality is
/// `J_s^{1/N} >= tau^{(1-s)}(theta) + tau^{(s)}(theta) J_1^{1/N}`, which is the
/// density form after dividing by `rho_0^{-1/N}`. The same quantity on the 2x2
/// refinement of each cell estimates the discretization error.
pub fn verify_pointwise_tcd(
    sheet: &Sheet,
    k: f64,
    mu0: &CellMeasure,
    mu1: &CellMeasure,
    cfg: &PointwiseConfig,
) -> Result<VerificationReport> {
    VerificationReport::timed(|| {
        if sheet.warper.signature != Signature::Lorentzian {
            return Err(Error::Precondition(
                "the pointwise timelike test needs a Lorentzian sheet".into(),
            ));
        }
        if !(cfg.p > 0.0 && cfg.p < 1.0) {
            return Err(Error::Domain(format!(
                "exponent p = {} must lie in (0, 1)",
                cfg.p
            )));
        }
        let n_cone = sheet.n() + 1.0;
        let params = Parameters {
            k,
            n: n_cone,
            p: Some(cfg.p),
            signature: Signature::Lorentzian,
        };
        let mut report = VerificationReport::new(
            Condition::Tcd,
            "rho_s^(-1/N) >= tau^(1-s)(theta) rho_0^(-1/N) + tau^(s)(theta) rho_1^(-1/N) along the optimal coupling",
            params,
            cfg.tolerance,
        );
        let weight = |t: f64, r: f64| sheet.warper.f(t).powf(sheet.n()) * sheet.density.h(r);
        let (g0, a) = atoms(mu0, &weight)?;
        let (g1, b) = atoms(mu1, &weight)?;
        let w = &sheet.warper;
        let cost: Vec<Vec<Option<f64>>> = (0..a.len())
            .map(|i| {
                let x = g0.center(i);
                (0..b.len())
                    .map(|j| {
                        let y = g1.center(j);
                        let d = (y.1 - x.1).abs();
                        if y.0 > x.0 && causal_relation_reduced(w, x.0, y.0, d).is_chronological() {
                            let g =
                                sheet_geodesic(w, x.0, y.0, d, &MetricOptions::default()).ok()?;
                            Some(-g.length.powf(cfg.p))
                        } else {
                            None
                        }
                    })
                    .collect()
            })
            .collect();
        let (flow, _) = min_cost_coupling(&a, &b, &cost).ok_or_else(|| {
            Error::Dualizability("no coupling is concentrated on timelike pairs".into())
        })?;
        let targets: Vec<(f64, f64)> = (0..a.len())
            .map(|i| {
                let (mut t, mut r) = (0.0, 0.0);
                for (j, &m) in flow[i].iter().enumerate() {
                    let y = g1.center(j);
                    t += m * y.0;
                    r += m * y.1;
                }
                (t / a[i], r / a[i])
            })
            .collect();
        let n = g0.n;
        let map_at = |i: f64, j: f64| -> (f64, f64) { interpolate(&targets, n, i - 0.5, j - 0.5) };
        let coarse = cell_slacks(sheet, k, &g0, 1, &map_at, cfg)?;
        let fine = cell_slacks(sheet, k, &g0, 2, &map_at, cfg)?;
        let mut budget = 0.0f64;
        let mut records = Vec::with_capacity(n * n);
        for idx in 0..n * n {
            let (i, j) = (idx / n, idx % n);
            // the four subcells of cell (i, j) in the refined grid
            let subs = [
                (2 * i) * 2 * n + 2 * j,
                (2 * i) * 2 * n + 2 * j + 1,
                (2 * i + 1) * 2 * n + 2 * j,
                (2 * i + 1) * 2 * n + 2 * j + 1,
            ];
            let (slack, s) = coarse[idx];
            let fine_slack = subs
                .iter()
                .map(|&q| fine[q].0)
                .fold(f64::INFINITY, f64::min);
            budget = budget.max((slack - fine_slack).abs());
            records.push(WitnessRecord {
                start: g0.center(idx),
                end: targets[idx],
                s,
                slack: slack.min(fine_slack),
            });
        }
        report.diag("resolution_budget", budget);
        if budget > cfg.tolerance {
            return Err(Error::Resolution {
                budget,
                tol: cfg.tolerance,
            });
        }
        report.absorb(records);
        Ok(report)
    })
}

/// Cell centers with masses normalized to one.
fn atoms(mu: &CellMeasure, weight: &dyn Fn(f64, f64) -> f64) -> Result<(Grid, Vec<f64>)> {
    let n = mu.cells;
    if n == 0 {
        return Err(Error::Grid("a cell measure needs at least one cell".into()));
    }
    if !mu.density.is_empty() && mu.density.len() != n * n {
        return Err(Error::InvalidMeasure(format!(
            "{} density values for {} cells",
            mu.density.len(),
            n * n
        )));
    }
    if mu.density.iter().any(|&v| !(v.is_finite() && v > 0.0)) {
        return Err(Error::InvalidMeasure(
            "cell densities must be positive".into(),
        ));
    }
    let grid = Grid { rect: mu.rect, n };
    let Rect {
        t: [ta, tb],
        r: [ra, rb],
    } = mu.rect;
    let area = (tb - ta) * (rb - ra) / (n * n) as f64;
    let mut mass: Vec<f64> = (0..n * n)
        .map(|idx| {
            let (t, r) = grid.center(idx);
            let rho = if mu.density.is_empty() {
                1.0
            } else {
                mu.density[idx]
            };
            rho * area * weight(t, r)
        })
        .collect();
    let total: f64 = mass.iter().sum();
    if !(total > 0.0 && total.is_finite()) {
        return Err(Error::InvalidMeasure("cell measure has no mass".into()));
    }
    for m in &mut mass {
        *m /= total;
    }
    Ok((grid, mass))
}

/// Bilinear interpolation of center values at fractional center indices, extended
/// linearly past the outer centers.
fn interpolate(vals: &[(f64, f64)], n: usize, x: f64, y: f64) -> (f64, f64) {
    if n == 1 {
        return vals[0];
    }
    let i = (x.floor().max(0.0) as usize).min(n - 2);
    let j = (y.floor().max(0.0) as usize).min(n - 2);
    let (u, v) = (x - i as f64, y - j as f64);
    let at = |a: usize, b: usize| vals[a * n + b];
    let mix = |p: (f64, f64), q: (f64, f64), w: f64| (p.0 + w * (q.0 - p.0), p.1 + w * (q.1 - p.1));
    mix(
        mix(at(i, j), at(i, j + 1), v),
        mix(at(i + 1, j), at(i + 1, j + 1), v),
        u,
    )
}

/// Worst slack and its time for every cell of the grid refined `refine` times per side.
fn cell_slacks(
    sheet: &Sheet,
    k: f64,
    grid: &Grid,
    refine: usize,
    map_at: &(dyn Fn(f64, f64) -> (f64, f64) + Sync),
    cfg: &PointwiseConfig,
) -> Result<Vec<(f64, f64)>> {
    let n = grid.n * refine;
    let step = 1.0 / refine as f64;
    let w = &sheet.warper;
    let n_cone = sheet.n() + 1.0;
    let tracks: Vec<(f64, Vec<(f64, f64)>)> = (0..(n + 1) * (n + 1))
        .into_par_iter()
        .map(|v| {
            let (i, j) = ((v / (n + 1)) as f64 * step, (v % (n + 1)) as f64 * step);
            let x = grid.vertex(i, j);
            let y = map_at(i, j);
            let d = (y.1 - x.1).abs();
            let dir = (y.1 - x.1).signum();
            if !(y.0 > x.0 && causal_relation_reduced(w, x.0, y.0, d).is_chronological()) {
                return Err(Error::Dualizability(format!(
                    "interpolated map sends ({}, {}) outside its chronological future",
                    x.0, x.1
                )));
            }
            let g = sheet_geodesic(w, x.0, y.0, d, &MetricOptions::default())?;
            let mut pts: Vec<(f64, f64)> = cfg
                .times
                .iter()
                .map(|&s| {
                    let (t, rho) = g.point(s);
                    (t, x.1 + dir * rho)
                })
                .collect();
            pts.push(x);
            pts.push(y);
            Ok((g.length, pts))
        })
        .collect::<Result<_>>()?;
    let weight = |t: f64, r: f64| sheet.warper.f(t).powf(sheet.n()) * sheet.density.h(r);
    let m = cfg.times.len();
    let out = (0..n * n)
        .map(|idx| {
            let (i, j) = (idx / n, idx % n);
            let q = [
                i * (n + 1) + j,
                (i + 1) * (n + 1) + j,
                (i + 1) * (n + 1) + j + 1,
                i * (n + 1) + j + 1,
            ];
            let quad = |slot: usize| -> [(f64, f64); 4] { q.map(|v| tracks[v].1[slot]) };
            let m0 = measure(quad(m), &weight);
            let j1 = measure(quad(m + 1), &weight) / m0;
            let theta = q.iter().map(|&v| tracks[v].0).sum::<f64>() / 4.0;
            let mut worst = (f64::INFINITY, f64::NAN);
            for (si, &s) in cfg.times.iter().enumerate() {
                let js = measure(quad(si), &weight) / m0;
                let rhs = tau_coeff(k, n_cone, 1.0 - s, theta).as_f64()
                    + tau_coeff(k, n_cone, s, theta).as_f64() * j1.powf(1.0 / n_cone);
                let slack = js.powf(1.0 / n_cone) - rhs;
                if slack < worst.0 {
                    worst = (slack, s);
                }
            }
            worst
        })
        .collect();
    Ok(out)
}
