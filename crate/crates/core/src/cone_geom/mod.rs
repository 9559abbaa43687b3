//! Geometry of generalized cones `I x_f X`: fibers, causal relations, time
//! separation, the warped distance and geodesics.
//!
//! Every query is reduced to the two-dimensional sheet spanned by the base and a
//! fiber geodesic, so only the endpoint base values and their fiber distance
//! matter.

mod lorentz;
mod metric;
mod path;

pub use lorentz::TimelikeSolution;
pub use metric::{exp_map, shoot_metric, MetricOptions, MetricSolution};
pub use path::{
    energy, path_length, variational_length, CurveSample, GeodesicNode, GeodesicPath, PathKind,
};

use crate::densities::DensityProfile;
use crate::error::{Error, Result};
use crate::warp::{Signature, WarpingFunction};
use serde::{Deserialize, Serialize};

/// Margins within this of zero classify a pair as null rather than chronological.
pub const NULL_COLLAR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Fiber {
    Interval {
        a: f64,
        b: f64,
    },
    Circle {
        circumference: f64,
    },
    /// Finite metric space; geodesics between nodes are not subdivided.
    Finite {
        distances: Vec<Vec<f64>>,
    },
}

/// Coordinate on an interval or circle, or a node index of a finite fiber.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FiberPoint {
    Coord(f64),
    Node { node: usize },
}

impl Fiber {
    pub fn validate(&self) -> Result<()> {
        match self {
            Fiber::Interval { a, b } if !(a < b) => {
                Err(Error::InvalidFiber(format!("empty interval [{a}, {b}]")))
            }
            Fiber::Circle { circumference } if !(*circumference > 0.0) => Err(Error::InvalidFiber(
                format!("circumference {circumference} must be positive"),
            )),
            Fiber::Finite { distances } => validate_matrix(distances),
            _ => Ok(()),
        }
    }

    pub fn distance(&self, x: FiberPoint, y: FiberPoint) -> Result<f64> {
        match (self, x, y) {
            (Fiber::Interval { a, b }, FiberPoint::Coord(x), FiberPoint::Coord(y)) => {
                for v in [x, y] {
                    if v < a - 1e-12 || v > b + 1e-12 {
                        return Err(Error::InvalidFiber(format!("{v} outside [{a}, {b}]")));
                    }
                }
                Ok((x - y).abs())
            }
            (Fiber::Circle { circumference: c }, FiberPoint::Coord(x), FiberPoint::Coord(y)) => {
                let d = (x - y).rem_euclid(*c);
                Ok(d.min(c - d))
            }
            (
                Fiber::Finite { distances },
                FiberPoint::Node { node: i },
                FiberPoint::Node { node: j },
            ) => distances
                .get(i)
                .and_then(|row| row.get(j))
                .copied()
                .ok_or_else(|| Error::InvalidFiber(format!("node pair ({i}, {j}) out of range"))),
            _ => Err(Error::InvalidFiber(
                "fiber point kind does not match the fiber".into(),
            )),
        }
    }

    /// Point at distance `rho` from `x` along a shortest fiber path toward `y`.
    pub fn move_toward(&self, x: FiberPoint, y: FiberPoint, rho: f64) -> Result<FiberPoint> {
        match (self, x, y) {
            (Fiber::Interval { .. }, FiberPoint::Coord(a), FiberPoint::Coord(b)) => {
                Ok(FiberPoint::Coord(a + (b - a).signum() * rho))
            }
            (Fiber::Circle { circumference: c }, FiberPoint::Coord(a), FiberPoint::Coord(b)) => {
                let fwd = (b - a).rem_euclid(*c);
                let dir = if fwd <= c - fwd { 1.0 } else { -1.0 };
                Ok(FiberPoint::Coord((a + dir * rho).rem_euclid(*c)))
            }
            (Fiber::Finite { .. }, _, _) => {
                let d = self.distance(x, y)?;
                if rho <= 1e-12 {
                    Ok(x)
                } else if (rho - d).abs() <= 1e-12 {
                    Ok(y)
                } else {
                    Err(Error::InvalidFiber(
                        "finite fibers carry no interior geodesic points".into(),
                    ))
                }
            }
            _ => Err(Error::InvalidFiber(
                "fiber point kind does not match the fiber".into(),
            )),
        }
    }

    /// Largest realizable fiber distance.
    pub fn diameter(&self) -> f64 {
        match self {
            Fiber::Interval { a, b } => b - a,
            Fiber::Circle { circumference } => 0.5 * circumference,
            Fiber::Finite { distances } => distances.iter().flatten().fold(0.0, |m, &v| m.max(v)),
        }
    }

    /// A pair of points at fiber distance `d`, if the fiber has one.
    pub fn pair_at_distance(&self, d: f64) -> Option<(FiberPoint, FiberPoint)> {
        match self {
            Fiber::Interval { a, b } if d <= b - a => {
                Some((FiberPoint::Coord(*a), FiberPoint::Coord(a + d)))
            }
            Fiber::Circle { circumference } if d <= 0.5 * circumference => {
                Some((FiberPoint::Coord(0.0), FiberPoint::Coord(d)))
            }
            Fiber::Finite { distances } => {
                for (i, row) in distances.iter().enumerate() {
                    for (j, &v) in row.iter().enumerate() {
                        if (v - d).abs() <= 1e-12 {
                            return Some((
                                FiberPoint::Node { node: i },
                                FiberPoint::Node { node: j },
                            ));
                        }
                    }
                }
                None
            }
            _ => None,
        }
    }
}

fn validate_matrix(m: &[Vec<f64>]) -> Result<()> {
    const TOL: f64 = 1e-12;
    let n = m.len();
    if n == 0 || m.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidFiber(
            "distance matrix must be square and nonempty".into(),
        ));
    }
    for i in 0..n {
        if m[i][i].abs() > TOL {
            return Err(Error::InvalidFiber(format!("nonzero diagonal at {i}")));
        }
        for j in 0..n {
            if !(m[i][j] >= -TOL) || (m[i][j] - m[j][i]).abs() > TOL {
                return Err(Error::InvalidFiber(format!(
                    "entry ({i}, {j}) negative or asymmetric"
                )));
            }
            if i != j && m[i][j] <= TOL {
                return Err(Error::InvalidFiber(format!(
                    "distinct nodes {i}, {j} at distance zero"
                )));
            }
            for k in 0..n {
                if m[i][k] > m[i][j] + m[j][k] + TOL {
                    return Err(Error::InvalidFiber(format!(
                        "triangle inequality fails for ({i}, {j}, {k})"
                    )));
                }
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FiberMeasure {
    Density { profile: DensityProfile },
    Weights { weights: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConePoint {
    pub t: f64,
    pub x: FiberPoint,
}

impl ConePoint {
    pub fn new(t: f64, x: f64) -> Self {
        Self {
            t,
            x: FiberPoint::Coord(x),
        }
    }

    pub fn node(t: f64, node: usize) -> Self {
        Self {
            t,
            x: FiberPoint::Node { node },
        }
    }
}

/// Cone `I x_f X` with reference measure `f(t)^N dt (x) m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConeSpec {
    pub warper: WarpingFunction,
    pub fiber: Fiber,
    #[serde(rename = "N")]
    pub n: f64,
    pub fiber_measure: FiberMeasure,
}

impl ConeSpec {
    pub fn new(
        warper: WarpingFunction,
        fiber: Fiber,
        n: f64,
        fiber_measure: FiberMeasure,
    ) -> Result<Self> {
        let c = Self {
            warper,
            fiber,
            n,
            fiber_measure,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        self.warper.validate()?;
        self.fiber.validate()?;
        if !(self.n > 1.0) {
            return Err(Error::Domain(format!("N = {} must exceed 1", self.n)));
        }
        match (&self.fiber, &self.fiber_measure) {
            (Fiber::Interval { a, b }, FiberMeasure::Density { profile }) => {
                if (profile.a() - a).abs() > 1e-12 || (profile.b() - b).abs() > 1e-12 {
                    return Err(Error::InvalidMeasure(
                        "density domain differs from the fiber interval".into(),
                    ));
                }
                Ok(())
            }
            (Fiber::Circle { circumference }, FiberMeasure::Density { profile }) => {
                if profile.a().abs() > 1e-12 || (profile.b() - circumference).abs() > 1e-12 {
                    return Err(Error::InvalidMeasure(
                        "circle density must live on [0, circumference]".into(),
                    ));
                }
                Ok(())
            }
            (Fiber::Finite { distances }, FiberMeasure::Weights { weights }) => {
                if weights.len() != distances.len() || weights.iter().any(|w| !(*w >= 0.0)) {
                    return Err(Error::InvalidMeasure(
                        "one nonnegative weight per node required".into(),
                    ));
                }
                Ok(())
            }
            _ => Err(Error::InvalidMeasure(
                "fiber measure kind does not match the fiber".into(),
            )),
        }
    }

    pub fn signature(&self) -> Signature {
        self.warper.signature
    }

    /// Total fiber mass `m(X)`.
    pub fn fiber_mass(&self) -> f64 {
        match &self.fiber_measure {
            FiberMeasure::Density { profile } => {
                crate::quad::integrate(|r| profile.h(r), profile.a(), profile.b(), 1e-14, 1e-13)
                    .value
            }
            FiberMeasure::Weights { weights } => weights.iter().sum(),
        }
    }

    /// Fiber density at a coordinate (1 for finite fibers).
    pub fn fiber_density(&self, r: f64) -> f64 {
        match &self.fiber_measure {
            FiberMeasure::Density { profile } => profile.h(r),
            FiberMeasure::Weights { .. } => 1.0,
        }
    }

    pub fn require(&self, sig: Signature) -> Result<()> {
        if self.signature() != sig {
            return Err(Error::Precondition(format!("query needs a {sig:?} cone")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CausalRelation {
    Chronological,
    Causal,
    Unrelated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CausalVerdict {
    pub relation: CausalRelation,
    /// `int_s^t du/f - d_X`, `+inf` when an endpoint is the apex.
    #[serde(with = "crate::serde_ext")]
    pub margin: f64,
    /// Set when an endpoint sits where `f` vanishes.
    pub apex: bool,
}

impl CausalVerdict {
    pub fn is_causal(&self) -> bool {
        self.relation != CausalRelation::Unrelated
    }

    pub fn is_chronological(&self) -> bool {
        self.relation == CausalRelation::Chronological
    }
}

/// Causal relation of `(s, x)` and `(t, y)` with `d_X(x, y) = d` on a Lorentzian sheet.
pub fn causal_relation_reduced(w: &WarpingFunction, s: f64, t: f64, d: f64) -> CausalVerdict {
    let verdict = |relation, margin, apex| CausalVerdict {
        relation,
        margin,
        apex,
    };
    if s == t && d == 0.0 {
        return verdict(CausalRelation::Causal, 0.0, false);
    }
    if s >= t {
        return verdict(CausalRelation::Unrelated, w.inv_f_integral(s, t) - d, false);
    }
    if w.vanishes_at(s) || w.vanishes_at(t) {
        return verdict(CausalRelation::Chronological, f64::INFINITY, true);
    }
    let margin = w.inv_f_integral(s, t) - d;
    let relation = if margin > NULL_COLLAR {
        CausalRelation::Chronological
    } else if margin >= -NULL_COLLAR {
        CausalRelation::Causal
    } else {
        CausalRelation::Unrelated
    };
    verdict(relation, margin, false)
}

pub fn causal_relation(cone: &ConeSpec, p: ConePoint, q: ConePoint) -> Result<CausalVerdict> {
    cone.require(Signature::Lorentzian)?;
    let d = cone.fiber.distance(p.x, q.x)?;
    Ok(causal_relation_reduced(&cone.warper, p.t, q.t, d))
}

/// Time separation on a Lorentzian sheet; zero for pairs that are not chronological.
pub fn time_separation_reduced(w: &WarpingFunction, s: f64, t: f64, d: f64) -> Result<f64> {
    let v = causal_relation_reduced(w, s, t, d);
    if !v.is_chronological() {
        return Ok(0.0);
    }
    Ok(sheet_geodesic(w, s, t, d, &MetricOptions::default())?.length)
}

pub fn time_separation(cone: &ConeSpec, p: ConePoint, q: ConePoint) -> Result<f64> {
    cone.require(Signature::Lorentzian)?;
    let d = cone.fiber.distance(p.x, q.x)?;
    time_separation_reduced(&cone.warper, p.t, q.t, d)
}

pub fn metric_distance_reduced(
    w: &WarpingFunction,
    s: f64,
    t: f64,
    d: f64,
    opts: &MetricOptions,
) -> Result<f64> {
    Ok(sheet_geodesic(w, s, t, d, opts)?.length)
}

pub fn metric_distance(cone: &ConeSpec, p: ConePoint, q: ConePoint) -> Result<f64> {
    metric_distance_with(cone, p, q, &MetricOptions::default())
}

pub fn metric_distance_with(
    cone: &ConeSpec,
    p: ConePoint,
    q: ConePoint,
    opts: &MetricOptions,
) -> Result<f64> {
    cone.require(Signature::Riemannian)?;
    let d = cone.fiber.distance(p.x, q.x)?;
    metric_distance_reduced(&cone.warper, p.t, q.t, d, opts)
}

#[derive(Debug, Clone)]
enum Repr {
    Vertical,
    /// One endpoint is the apex; the curve is radial and carries the other fiber point.
    Apex {
        at_start: bool,
    },
    Timelike(TimelikeSolution),
    Null,
    Metric(MetricSolution),
}

/// A geodesic of the two-dimensional sheet from `(t0, 0)` to `(t1, d)`.
#[derive(Debug, Clone)]
pub struct SheetGeodesic<'a> {
    w: &'a WarpingFunction,
    pub kind: PathKind,
    pub t0: f64,
    pub t1: f64,
    pub d: f64,
    /// Riemannian length or Lorentzian proper time.
    pub length: f64,
    /// Conserved `f^2 v_beta` (`+inf` along null curves).
    pub shooting_constant: f64,
    repr: Repr,
}

/// Maximizer (Lorentzian) or minimizer (Riemannian) between `(t0, 0)` and `(t1, d)`.
pub fn sheet_geodesic<'a>(
    w: &'a WarpingFunction,
    t0: f64,
    t1: f64,
    d: f64,
    opts: &MetricOptions,
) -> Result<SheetGeodesic<'a>> {
    if !(d >= 0.0) {
        return Err(Error::Domain(format!(
            "fiber distance {d} must be nonnegative"
        )));
    }
    let make = |kind, length, c, repr| SheetGeodesic {
        w,
        kind,
        t0,
        t1,
        d,
        length,
        shooting_constant: c,
        repr,
    };
    let apex0 = w.vanishes_at(t0);
    let apex1 = w.vanishes_at(t1);
    match w.signature {
        Signature::Lorentzian => {
            let v = causal_relation_reduced(w, t0, t1, d);
            if !v.is_causal() {
                return Err(Error::NoCausalCurve);
            }
            if t0 == t1 {
                return Ok(make(PathKind::Null, 0.0, 0.0, Repr::Vertical));
            }
            if v.apex {
                return Ok(make(
                    PathKind::TimelikeMaximizer,
                    t1 - t0,
                    0.0,
                    Repr::Apex { at_start: apex0 },
                ));
            }
            if d == 0.0 {
                return Ok(make(
                    PathKind::TimelikeMaximizer,
                    t1 - t0,
                    0.0,
                    Repr::Vertical,
                ));
            }
            if !v.is_chronological() {
                return Ok(make(PathKind::Null, 0.0, f64::INFINITY, Repr::Null));
            }
            let sol = TimelikeSolution::solve(w, t0, t1, d)?;
            Ok(make(
                PathKind::TimelikeMaximizer,
                sol.tau,
                sol.c,
                Repr::Timelike(sol),
            ))
        }
        Signature::Riemannian => {
            if apex0 || apex1 {
                return Ok(make(
                    PathKind::MetricMinimizer,
                    (t1 - t0).abs(),
                    0.0,
                    Repr::Apex { at_start: apex0 },
                ));
            }
            if d == 0.0 {
                return Ok(make(
                    PathKind::MetricMinimizer,
                    (t1 - t0).abs(),
                    0.0,
                    Repr::Vertical,
                ));
            }
            let sol = MetricSolution::solve(w, t0, t1, d, opts)?;
            Ok(make(
                PathKind::MetricMinimizer,
                sol.length,
                sol.shooting_constant(w),
                Repr::Metric(sol),
            ))
        }
    }
}

impl<'a> SheetGeodesic<'a> {
    pub fn warper(&self) -> &'a WarpingFunction {
        self.w
    }

    /// `(t, rho)` at parameter `s in [0, 1]`, with `rho` the fiber displacement from
    /// the start. Timelike and metric curves are parametrized proportionally to length.
    pub fn point(&self, s: f64) -> (f64, f64) {
        let s = s.clamp(0.0, 1.0);
        let lerp_t = self.t0 + s * (self.t1 - self.t0);
        match &self.repr {
            Repr::Vertical => (lerp_t, 0.0),
            Repr::Apex { at_start } => (lerp_t, if *at_start { self.d } else { 0.0 }),
            Repr::Null => {
                let rho = if s == 1.0 {
                    self.d
                } else {
                    self.w.inv_f_integral(self.t0, lerp_t)
                };
                (lerp_t, rho.min(self.d))
            }
            Repr::Timelike(sol) => sol.point_at(self.w, s),
            Repr::Metric(sol) => sol.point_at(s),
        }
    }

    /// Node table with `nodes` equally spaced parameters, fiber coordinate `r0 + sign * rho`.
    pub fn to_path(&self, r0: f64, sign: f64, nodes: usize) -> GeodesicPath {
        path::build_path(self, r0, sign, nodes)
    }
}

/// Geodesic of the warped sheet `I x_f R` between `(t0, r0)` and `(t1, r1)`.
pub fn geodesic_2d(w: &WarpingFunction, p: (f64, f64), q: (f64, f64)) -> Result<GeodesicPath> {
    geodesic_2d_with(w, p, q, &MetricOptions::default(), path::DEFAULT_NODES)
}

pub fn geodesic_2d_with(
    w: &WarpingFunction,
    p: (f64, f64),
    q: (f64, f64),
    opts: &MetricOptions,
    nodes: usize,
) -> Result<GeodesicPath> {
    let d = (q.1 - p.1).abs();
    let g = sheet_geodesic(w, p.0, q.0, d, opts)?;
    let sign = if q.1 >= p.1 { 1.0 } else { -1.0 };
    Ok(g.to_path(p.1, sign, nodes))
}

/// Cone geodesic between two cone points, with its fiber endpoints.
pub struct ConeGeodesic<'a> {
    pub sheet: SheetGeodesic<'a>,
    pub from: ConePoint,
    pub to: ConePoint,
    fiber: &'a Fiber,
}

impl<'a> ConeGeodesic<'a> {
    pub fn new(
        cone: &'a ConeSpec,
        p: ConePoint,
        q: ConePoint,
        opts: &MetricOptions,
    ) -> Result<Self> {
        let d = cone.fiber.distance(p.x, q.x)?;
        Ok(Self {
            sheet: sheet_geodesic(&cone.warper, p.t, q.t, d, opts)?,
            from: p,
            to: q,
            fiber: &cone.fiber,
        })
    }

    pub fn point(&self, s: f64) -> Result<ConePoint> {
        if s <= 0.0 {
            return Ok(self.from);
        }
        if s >= 1.0 {
            return Ok(self.to);
        }
        let (t, rho) = self.sheet.point(s);
        Ok(ConePoint {
            t,
            x: self.fiber.move_toward(self.from.x, self.to.x, rho)?,
        })
    }
}

/// Largest disagreement of time separations (or distances) between two cones that
/// share their warper and dimension, over `(t0, t1, d)` triples.
pub fn fiber_independence_probe(
    a: &ConeSpec,
    b: &ConeSpec,
    triples: &[(f64, f64, f64)],
) -> Result<f64> {
    if a.warper != b.warper || a.n != b.n {
        return Err(Error::Precondition("cones must share warper and N".into()));
    }
    let mut worst: f64 = 0.0;
    for &(t0, t1, d) in triples {
        let value = |cone: &ConeSpec| -> Result<f64> {
            let (x, y) = cone
                .fiber
                .pair_at_distance(d)
                .ok_or_else(|| Error::Precondition(format!("fiber has no pair at distance {d}")))?;
            let (p, q) = (ConePoint { t: t0, x }, ConePoint { t: t1, x: y });
            match cone.signature() {
                Signature::Lorentzian => time_separation(cone, p, q),
                Signature::Riemannian => metric_distance(cone, p, q),
            }
        };
        worst = worst.max((value(a)? - value(b)?).abs());
    }
    Ok(worst)
}
