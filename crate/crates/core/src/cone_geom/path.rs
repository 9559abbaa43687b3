//! Discretized curves: geodesic node tables, lengths and energies.

use super::{metric_distance_with, ConePoint, ConeSpec, FiberPoint, MetricOptions, SheetGeodesic};
use crate::error::{Error, Result};
use crate::warp::{Signature, WarpingFunction};
use serde::{Deserialize, Serialize};

pub const DEFAULT_NODES: usize = 65;
const FD_STEP: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathKind {
    MetricMinimizer,
    TimelikeMaximizer,
    Null,
    Causal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeodesicNode {
    pub s: f64,
    pub t: f64,
    pub r: f64,
    /// Fiber speed per unit length (per unit base time along null curves).
    pub v_beta: f64,
    /// `sqrt(|t'^2 -+ f^2 v_beta^2|)` in the same parametrization.
    pub integrand: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeodesicPath {
    pub kind: PathKind,
    pub signature: Signature,
    pub length: f64,
    #[serde(with = "crate::serde_ext")]
    pub shooting_constant: f64,
    pub nodes: Vec<GeodesicNode>,
}

pub(super) fn build_path(g: &SheetGeodesic<'_>, r0: f64, sign: f64, count: usize) -> GeodesicPath {
    let w = g.warper();
    let count = count.max(2);
    let scale = if g.length > 0.0 {
        g.length
    } else {
        (g.t1 - g.t0).abs().max(f64::MIN_POSITIVE)
    };
    let e = w.signature.sign();
    let nodes = (0..count)
        .map(|k| {
            let s = k as f64 / (count - 1) as f64;
            let (t, rho) = g.point(s);
            let (tdot, v) = velocity(g, s, scale);
            let f = w.f(t);
            GeodesicNode {
                s,
                t,
                r: r0 + sign * rho,
                v_beta: v,
                integrand: (tdot * tdot + e * f * f * v * v).abs().sqrt(),
            }
        })
        .collect();
    GeodesicPath {
        kind: g.kind,
        signature: w.signature,
        length: g.length,
        shooting_constant: g.shooting_constant,
        nodes,
    }
}

/// Second-order difference quotient in arclength; one-sided near the ends.
fn velocity(g: &SheetGeodesic<'_>, s: f64, scale: f64) -> (f64, f64) {
    let h = FD_STEP;
    let diff = |a: (f64, f64), b: (f64, f64), c: (f64, f64), w: [f64; 3]| {
        let den = 2.0 * h * scale;
        (
            (w[0] * a.0 + w[1] * b.0 + w[2] * c.0) / den,
            (w[0] * a.1 + w[1] * b.1 + w[2] * c.1) / den,
        )
    };
    if s - h < 0.0 {
        diff(
            g.point(s),
            g.point(s + h),
            g.point(s + 2.0 * h),
            [-3.0, 4.0, -1.0],
        )
    } else if s + h > 1.0 {
        diff(
            g.point(s - 2.0 * h),
            g.point(s - h),
            g.point(s),
            [1.0, -4.0, 3.0],
        )
    } else {
        diff(g.point(s - h), g.point(s), g.point(s + h), [-1.0, 0.0, 1.0])
    }
}

impl GeodesicPath {
    /// Largest `|f^2 v_beta - c|` relative to `max(|c|, 1)`; zero for null curves.
    pub fn conserved_drift(&self, w: &WarpingFunction) -> f64 {
        if !self.shooting_constant.is_finite() {
            return 0.0;
        }
        let c = self.shooting_constant;
        self.nodes
            .iter()
            .filter(|n| w.f(n.t) > 0.0)
            .map(|n| {
                let f = w.f(n.t);
                (f * f * n.v_beta - c).abs()
            })
            .fold(0.0, f64::max)
            / c.abs().max(1.0)
    }

    /// Strict monotonicity of the base component (ties allowed only for a point path).
    pub fn base_monotone(&self) -> bool {
        let inc = self.nodes.windows(2).all(|p| p[1].t > p[0].t);
        let dec = self.nodes.windows(2).all(|p| p[1].t < p[0].t);
        inc || dec
    }

    /// Cumulative length at each node, assuming proportional-to-length parametrization.
    pub fn cumulative_length(&self) -> Vec<f64> {
        self.nodes.iter().map(|n| n.s * self.length).collect()
    }

    pub fn to_sample(&self) -> CurveSample {
        let scale = if self.length > 0.0 { self.length } else { 1.0 };
        CurveSample {
            param: self.nodes.iter().map(|n| n.s * scale).collect(),
            t: self.nodes.iter().map(|n| n.t).collect(),
            x: self.nodes.iter().map(|n| FiberPoint::Coord(n.r)).collect(),
        }
    }
}

/// A discretized curve `(alpha, beta)` with its parameter values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveSample {
    pub param: Vec<f64>,
    pub t: Vec<f64>,
    pub x: Vec<FiberPoint>,
}

impl CurveSample {
    /// Straight chart segment sampled at `n + 1` uniform parameters on `[0, 1]`.
    pub fn segment(t0: f64, x0: f64, t1: f64, x1: f64, n: usize) -> Self {
        let u: Vec<f64> = (0..=n).map(|k| k as f64 / n as f64).collect();
        Self {
            t: u.iter().map(|s| t0 + s * (t1 - t0)).collect(),
            x: u.iter()
                .map(|s| FiberPoint::Coord(x0 + s * (x1 - x0)))
                .collect(),
            param: u,
        }
    }

    fn check(&self) -> Result<()> {
        let n = self.param.len();
        if n < 2 || self.t.len() != n || self.x.len() != n {
            return Err(Error::Grid(
                "curve needs at least two nodes of matching lengths".into(),
            ));
        }
        Ok(())
    }
}

/// Per-segment `(dt^2, f(t_mid)^2 dx^2, d_param)`.
fn segments(cone: &ConeSpec, c: &CurveSample) -> Result<Vec<(f64, f64, f64)>> {
    c.check()?;
    (0..c.param.len() - 1)
        .map(|k| {
            let dt = c.t[k + 1] - c.t[k];
            let dx = cone.fiber.distance(c.x[k], c.x[k + 1])?;
            let f = cone.warper.f(0.5 * (c.t[k] + c.t[k + 1]));
            Ok((dt * dt, f * f * dx * dx, c.param[k + 1] - c.param[k]))
        })
        .collect()
}

const CAUSAL_TOL: f64 = 1e-9;

/// Length `int sqrt(a'^2 +- f(a)^2 v^2)` by the composite midpoint rule.
pub fn path_length(cone: &ConeSpec, c: &CurveSample) -> Result<f64> {
    let e = cone.signature().sign();
    let mut total = 0.0;
    for (k, (a, b, _)) in segments(cone, c)?.into_iter().enumerate() {
        let q = a + e * b;
        if q < -CAUSAL_TOL * (a + b).max(f64::MIN_POSITIVE) {
            return Err(Error::NonCausalPath {
                node: k,
                residual: q,
            });
        }
        total += q.max(0.0).sqrt();
    }
    Ok(total)
}

/// `1/2 int (a'^2 +- f(a)^2 v^2)` in the curve's own parametrization.
pub fn energy(cone: &ConeSpec, c: &CurveSample) -> Result<f64> {
    let e = cone.signature().sign();
    let mut total = 0.0;
    for (k, (a, b, dp)) in segments(cone, c)?.into_iter().enumerate() {
        let q = a + e * b;
        if e < 0.0 && q < -CAUSAL_TOL * (a + b).max(f64::MIN_POSITIVE) {
            return Err(Error::NonCausalPath {
                node: k,
                residual: q,
            });
        }
        if dp <= 0.0 {
            return Err(Error::Grid(format!("parameter not increasing at node {k}")));
        }
        total += 0.5 * q.max(0.0) / dp;
    }
    Ok(total)
}

/// Sum of cone distances between consecutive nodes (metric cones only).
pub fn variational_length(cone: &ConeSpec, c: &CurveSample, opts: &MetricOptions) -> Result<f64> {
    c.check()?;
    let mut total = 0.0;
    for k in 0..c.param.len() - 1 {
        total += metric_distance_with(
            cone,
            ConePoint {
                t: c.t[k],
                x: c.x[k],
            },
            ConePoint {
                t: c.t[k + 1],
                x: c.x[k + 1],
            },
            opts,
        )?;
    }
    Ok(total)
}
