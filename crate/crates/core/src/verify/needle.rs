use super::sampling::latin_hypercube;
use super::{Condition, Parameters, VerificationReport, WitnessRecord, NEEDLE_TOL};
use crate::coeffs::{sigma_kappa, CoeffValue};
use crate::cone_geom::{sheet_geodesic, MetricOptions};
use crate::densities::DensityProfile;
use crate::error::{Error, Result};
use crate::warp::{Signature, WarpingFunction};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// The two-dimensional sheet `I x_f [a, b]` weighted by `f^{N-1} h`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sheet {
    pub warper: WarpingFunction,
    pub density: DensityProfile,
}

impl Sheet {
    pub fn new(warper: WarpingFunction, density: DensityProfile) -> Self {
        Self { warper, density }
    }

    pub fn n(&self) -> f64 {
        self.density.n
    }

    /// `(f^{N-1} h)^{1/(N-1)} = f g` at `(t, r)`.
    pub fn root_weight(&self, t: f64, r: f64) -> f64 {
        self.warper.f(t) * self.density.root(r)
    }

    /// Base window `I` cut to `[-3, 3]` with a collar at vanishing endpoints.
    pub fn default_window(&self) -> Result<[f64; 2]> {
        let [lo, hi] = self.warper.truncated()?;
        let (mut lo, mut hi) = (lo.max(-3.0), hi.min(3.0));
        if !(lo < hi) {
            return Err(Error::NoTimelikeSample);
        }
        let c = 1e-3 * (hi - lo);
        if self.warper.vanishes_at(lo) {
            lo += c;
        }
        if self.warper.vanishes_at(hi) {
            hi -= c;
        }
        Ok([lo, hi])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NeedleConfig {
    pub samples: usize,
    /// Subintervals of `[0, 1]` on which each geodesic is evaluated.
    pub nodes: usize,
    pub seed: u64,
    pub tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<[f64; 2]>,
    /// Integration steps per subinterval for Riemannian geodesics.
    pub steps: usize,
}

impl Default for NeedleConfig {
    fn default() -> Self {
        Self {
            samples: 1000,
            nodes: 16,
            seed: 0,
            tolerance: NEEDLE_TOL,
            window: None,
            steps: 32,
        }
    }
}

/// Checks that `psi = (f^{N-1} h)^{1/(N-1)}` restricted to sheet geodesics obeys
/// the three-point `sigma` inequality with curvature `-kappa L^2` (Lorentzian) or
/// `kappa L^2` (Riemannian). Slacks are scaled by the largest `psi` on the curve.
pub fn verify_needle_concavity(
    sheet: &Sheet,
    kappa: f64,
    cfg: &NeedleConfig,
) -> Result<VerificationReport> {
    VerificationReport::timed(|| {
        let sig = sheet.warper.signature;
        let n = sheet.n();
        let (condition, k, kappa_eff) = match sig {
            Signature::Lorentzian => (Condition::NeedleTcd, -kappa * n, -kappa),
            Signature::Riemannian => (Condition::NeedleCd, kappa * n, kappa),
        };
        let params = Parameters {
            k,
            n: n + 1.0,
            p: None,
            signature: sig,
        };
        let mut report = VerificationReport::new(
            condition,
            "three-point sigma concavity of (f^(N-1) h)^(1/(N-1)) along sheet geodesics",
            params,
            cfg.tolerance,
        );
        let window = match cfg.window {
            Some(w) => w,
            None => sheet.default_window()?,
        };
        if cfg.samples == 0 || cfg.nodes < 2 || !(window[0] < window[1]) {
            return Err(Error::NoTimelikeSample);
        }
        let draws = latin_hypercube::<5>(cfg.samples, cfg.seed);
        let curves: Vec<Result<Vec<(f64, f64)>>> = draws
            .par_iter()
            .map(|u| match sig {
                Signature::Lorentzian => lorentz_needle(sheet, window, u, cfg.nodes),
                Signature::Riemannian => riemann_needle(sheet, window, kappa, u, cfg),
            })
            .collect();
        let mut records = Vec::with_capacity(curves.len());
        for c in curves {
            let pts = c?;
            records.push(three_point_slack(sheet, &pts, kappa_eff));
        }
        if records.is_empty() {
            return Err(Error::NoTimelikeSample);
        }
        report.absorb(records);
        report.diag("window_lo", window[0]);
        report.diag("window_hi", window[1]);
        Ok(report)
    })
}

/// `[(L, 0), p_0, ..., p_nodes]`: the length, then `(t, r)` at `u_k = k / nodes`.
fn lorentz_needle(
    sheet: &Sheet,
    [lo, hi]: [f64; 2],
    u: &[f64; 5],
    nodes: usize,
) -> Result<Vec<(f64, f64)>> {
    let w = &sheet.warper;
    let width = hi - lo;
    let t0 = lo + u[0] * 0.95 * width;
    let gap = 0.05 * width;
    let t1 = t0 + gap + u[1] * (hi - t0 - gap);
    let avail = w.inv_f_integral(t0, t1).min(sheet.density.len());
    let d = (0.05 + 0.9 * u[2]) * avail;
    let slack = sheet.density.len() - d;
    let (r0, sign) = if u[4] < 0.5 {
        (sheet.density.a() + u[3] * slack, 1.0)
    } else {
        (sheet.density.b() - u[3] * slack, -1.0)
    };
    let g = sheet_geodesic(w, t0, t1, d, &MetricOptions::default())?;
    let mut out = Vec::with_capacity(nodes + 2);
    out.push((g.length, 0.0));
    for k in 0..=nodes {
        let (t, rho) = g.point(k as f64 / nodes as f64);
        out.push((t, r0 + sign * rho));
    }
    Ok(out)
}

fn riemann_needle(
    sheet: &Sheet,
    [lo, hi]: [f64; 2],
    kappa: f64,
    u: &[f64; 5],
    cfg: &NeedleConfig,
) -> Result<Vec<(f64, f64)>> {
    let w = &sheet.warper;
    let width = hi - lo;
    let t0 = lo + u[0] * width;
    let angle = std::f64::consts::PI * (2.0 * u[1] - 1.0);
    let r0 = sheet.density.a() + u[3] * sheet.density.len();
    let mut max_len = width.max(sheet.density.len());
    if kappa > 0.0 {
        max_len = max_len.min(0.9 * std::f64::consts::PI / kappa.sqrt());
    }
    let mut len = (0.05 + 0.9 * u[2]) * max_len;
    for _ in 0..40 {
        if let Some(pts) = trace(w, t0, angle, len, cfg.nodes, cfg.steps) {
            let inside = pts.iter().all(|&(t, r)| {
                t >= lo && t <= hi && r0 + r >= sheet.density.a() && r0 + r <= sheet.density.b()
            });
            if inside {
                let mut out = Vec::with_capacity(pts.len() + 1);
                out.push((len, 0.0));
                out.extend(pts.into_iter().map(|(t, r)| (t, r0 + r)));
                return Ok(out);
            }
        }
        len *= 0.7;
    }
    Err(Error::NoTimelikeSample)
}

/// Unit-speed geodesic from `(t0, 0)` recorded at `nodes + 1` equally spaced
/// arclengths; `None` if it runs into the apex.
fn trace(
    w: &WarpingFunction,
    t0: f64,
    angle: f64,
    length: f64,
    nodes: usize,
    steps: usize,
) -> Option<Vec<(f64, f64)>> {
    let c = w.f(t0) * angle.sin();
    let rhs = |t: f64, p: f64| -> Option<(f64, f64, f64)> {
        let (f, f1, _) = w.eval(t);
        if !(f > 0.0) {
            return None;
        }
        Some((p, c * c * f1 / (f * f * f), c / (f * f)))
    };
    let base = length / (nodes * steps) as f64;
    let seg = length / nodes as f64;
    let (mut t, mut p, mut r) = (t0, angle.cos(), 0.0);
    let mut out = vec![(t, r)];
    for _ in 0..nodes {
        let mut left = seg;
        while left > 0.0 {
            // near the apex the chart curvature grows like 1/f
            let (f, f1, _) = w.eval(t);
            let h = base.min(0.01 * f / f1.abs().max(1e-2)).min(left);
            let k1 = rhs(t, p)?;
            let k2 = rhs(t + 0.5 * h * k1.0, p + 0.5 * h * k1.1)?;
            let k3 = rhs(t + 0.5 * h * k2.0, p + 0.5 * h * k2.1)?;
            let k4 = rhs(t + h * k3.0, p + h * k3.1)?;
            t += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
            p += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
            r += h / 6.0 * (k1.2 + 2.0 * k2.2 + 2.0 * k3.2 + k4.2);
            left -= h;
            if left < 1e-14 * seg {
                left = 0.0;
            }
            if !(h > 1e-12 * seg) {
                return None;
            }
        }
        out.push((t, r));
    }
    Some(out)
}

/// Smallest normalized margin over all node triples `i < k < j` of
/// `psi_k - sigma^(1-s)(theta) psi_i - sigma^(s)(theta) psi_j`.
fn three_point_slack(sheet: &Sheet, pts: &[(f64, f64)], kappa_eff: f64) -> WitnessRecord {
    let len = pts[0].0;
    let pts = &pts[1..];
    let m = pts.len() - 1;
    let psi: Vec<f64> = pts.iter().map(|&(t, r)| sheet.root_weight(t, r)).collect();
    let scale = psi.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let mut worst = f64::INFINITY;
    let mut at = 0;
    for i in 0..m {
        for j in i + 2..=m {
            let theta = (j - i) as f64 / m as f64 * len;
            for k in i + 1..j {
                let s = (k - i) as f64 / (j - i) as f64;
                let lhs = psi[k];
                let rhs = combine(sigma_kappa(kappa_eff, 1.0 - s, theta), psi[i])
                    + combine(sigma_kappa(kappa_eff, s, theta), psi[j]);
                let margin = lhs - rhs;
                if margin < worst {
                    worst = margin;
                    at = k;
                }
            }
        }
    }
    let slack = if scale > 0.0 { worst / scale } else { 0.0 };
    WitnessRecord {
        start: pts[0],
        end: pts[m],
        s: at as f64 / m as f64,
        slack,
    }
}

fn combine(c: CoeffValue, psi: f64) -> f64 {
    match c {
        CoeffValue::Finite(v) => v * psi,
        CoeffValue::Infinite if psi == 0.0 => 0.0,
        CoeffValue::Infinite => f64::INFINITY,
    }
}
